#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zcam/pcap.hpp"

namespace zcam::flow {

/// Number of statistics computed per flow. Together with the Timestamp column
/// (flow start) they make up the 77 feature columns of the flow CSV.
inline constexpr std::size_t kNumStats = 76;
inline constexpr std::size_t kNumFeatureColumns = kNumStats + 1;
inline constexpr std::size_t kNumCsvColumns = 84;

using FlowStats = std::array<double, kNumStats>;

/// Column names of the statistics in CSV order (CICFlowMeter naming).
extern const std::array<std::string_view, kNumStats> kStatNames;
/// All 84 CSV column names.
extern const std::array<std::string_view, kNumCsvColumns> kCsvColumns;

/// Index of a statistic by name; nullopt if unknown.
std::optional<std::size_t> stat_index(std::string_view name);

struct Timeouts {
  std::int64_t flow_us = 600'000'000;     // hard cap on flow age
  std::int64_t idle_us = 120'000'000;     // gap after which a flow is closed
  std::int64_t activity_us = 5'000'000;   // gap separating active periods
  std::int64_t reorder_us = 1'000;        // accepted timestamp regression
  std::int64_t bulk_gap_us = 1'000'000;
  std::int64_t subflow_gap_us = 1'000'000;
};

enum class Direction : std::uint8_t { Forward = 0, Backward = 1 };

/// Bidirectional flow identity, oriented so (ip_a, port_a) is the initiator.
struct FlowKey {
  std::uint32_t ip_a = 0;
  std::uint32_t ip_b = 0;
  std::uint16_t port_a = 0;
  std::uint16_t port_b = 0;
  std::uint8_t protocol = 0;
  bool operator==(const FlowKey&) const = default;
};

/// Count / mean / M2 / min / max accumulator. Empty sets report zeros.
class RunningStats {
 public:
  void add(double v) noexcept;
  std::uint64_t count() const noexcept { return n_; }
  double sum() const noexcept { return sum_; }
  double mean() const noexcept { return n_ ? mean_ : 0.0; }
  double variance() const noexcept { return n_ ? m2_ / static_cast<double>(n_) : 0.0; }
  double stddev() const noexcept;
  double min() const noexcept { return n_ ? min_ : 0.0; }
  double max() const noexcept { return n_ ? max_ : 0.0; }

 private:
  std::uint64_t n_ = 0;
  double sum_ = 0.0, mean_ = 0.0, m2_ = 0.0, min_ = 0.0, max_ = 0.0;
};

/// Per-flow statistics under construction.
class FlowAccumulator {
 public:
  FlowAccumulator(const pcap::PacketSummary& first, const Timeouts& timeouts);

  void add(const pcap::PacketSummary& p, Direction dir);

  std::int64_t first_ts() const noexcept { return first_ts_; }
  std::int64_t last_ts() const noexcept { return last_ts_; }
  std::uint64_t packets() const noexcept { return pkts_[0] + pkts_[1]; }
  std::uint64_t packets(Direction d) const noexcept { return pkts_[idx(d)]; }

  /// True once both FINs were acknowledged, or a RST was seen.
  bool tcp_closed() const noexcept { return rst_ || (fin_acked_[0] && fin_acked_[1]); }

  FlowStats finalize() const;

 private:
  static std::size_t idx(Direction d) noexcept { return static_cast<std::size_t>(d); }
  void update_bulk(std::size_t d, const pcap::PacketSummary& p, std::int64_t ts);

  struct Bulk {
    std::int64_t start = 0, last = 0;
    std::uint64_t run_count = 0, run_size = 0;
    std::uint64_t states = 0, packets = 0, size = 0;
    std::int64_t duration = 0;
  };

  Timeouts timeouts_;
  std::int64_t first_ts_ = 0, last_ts_ = 0;
  std::array<std::uint64_t, 2> pkts_{};
  std::array<RunningStats, 2> payload_;
  std::array<RunningStats, 2> iat_;
  std::array<std::int64_t, 2> dir_last_ts_{};
  std::array<std::uint64_t, 2> header_bytes_{};
  std::array<std::uint64_t, 2> psh_{}, urg_{};
  std::array<std::optional<std::uint16_t>, 2> init_win_;
  std::array<Bulk, 2> bulk_{};
  RunningStats all_payload_, flow_iat_;
  std::array<std::uint64_t, 8> flags_{};  // FIN SYN RST PSH ACK URG CWR ECE
  std::uint64_t fwd_act_data_ = 0;
  std::uint64_t fwd_min_header_ = 0;
  std::uint64_t subflow_gaps_ = 0;
  std::int64_t active_start_ = 0, active_end_ = 0;
  RunningStats active_, idle_;
  std::array<bool, 2> fin_seen_{}, fin_acked_{};
  bool rst_ = false;
};

struct FlowRecord {
  std::uint64_t flow_id = 0;
  FlowKey key;
  std::int64_t start_ts = 0;
  FlowStats stats{};
  std::optional<std::string> label;
};

/// Single-writer table of active flows.
class FlowMeter {
 public:
  explicit FlowMeter(Timeouts timeouts = {});

  struct Lookup {
    FlowKey key;
    Direction direction = Direction::Forward;
    bool is_new = true;
  };

  /// Which active flow a packet belongs to, or the key a new flow would get.
  Lookup flow_key_of(const pcap::PacketSummary& p) const;

  /// Adds a packet; returns the records this closes. Throws ClockRegression.
  std::vector<FlowRecord> ingest(const pcap::PacketSummary& p);

  /// Closes flows whose last packet is more than the idle timeout before `now`.
  std::vector<FlowRecord> expire(std::int64_t now);
  /// Closes every active flow (end of capture).
  std::vector<FlowRecord> flush();

  std::size_t active_flows() const noexcept { return table_.size(); }
  std::uint64_t packets_ingested() const noexcept { return ingested_; }
  const Timeouts& timeouts() const noexcept { return timeouts_; }

 private:
  struct Entry {
    FlowKey key;
    std::uint64_t seq;
    FlowAccumulator acc;
  };
  struct Endpoints {
    std::uint64_t a, b;
    std::uint8_t proto;
    bool operator==(const Endpoints&) const = default;
  };
  struct EndpointsHash {
    std::size_t operator()(const Endpoints& e) const noexcept;
  };
  static Endpoints canonical(const pcap::PacketSummary& p);
  FlowRecord emit(Entry&& e);
  std::vector<FlowRecord> emit_sorted(std::vector<Entry>&& entries);

  Timeouts timeouts_;
  std::unordered_map<Endpoints, Entry, EndpointsHash> table_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_flow_id_ = 0;
  std::uint64_t ingested_ = 0;
};

/// Meters a packet sequence (timestamp ordered) to completion.
std::vector<FlowRecord> meter_packets(std::span<const pcap::PacketSummary> packets,
                                      const Timeouts& timeouts = {});

/// Reads, decodes and meters a capture file; every record gets `label`.
std::vector<FlowRecord> meter_capture(const std::filesystem::path& path, const Timeouts& timeouts = {},
                                      std::optional<std::string> label = std::nullopt,
                                      pcap::DecodeStats* stats = nullptr);

}  // namespace zcam::flow
