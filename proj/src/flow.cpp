#include "zcam/flow.hpp"

#include <algorithm>
#include <cmath>

#include "zcam/error.hpp"
#include "zcam/rng.hpp"

namespace zcam::flow {

using pcap::PacketSummary;
namespace tf = pcap::tcp_flag;

const std::array<std::string_view, kNumStats> kStatNames = {
    "Flow Duration",     "Tot Fwd Pkts",      "Tot Bwd Pkts",      "TotLen Fwd Pkts",
    "TotLen Bwd Pkts",   "Fwd Pkt Len Max",   "Fwd Pkt Len Min",   "Fwd Pkt Len Mean",
    "Fwd Pkt Len Std",   "Bwd Pkt Len Max",   "Bwd Pkt Len Min",   "Bwd Pkt Len Mean",
    "Bwd Pkt Len Std",   "Flow Byts/s",       "Flow Pkts/s",       "Flow IAT Mean",
    "Flow IAT Std",      "Flow IAT Max",      "Flow IAT Min",      "Fwd IAT Tot",
    "Fwd IAT Mean",      "Fwd IAT Std",       "Fwd IAT Max",       "Fwd IAT Min",
    "Bwd IAT Tot",       "Bwd IAT Mean",      "Bwd IAT Std",       "Bwd IAT Max",
    "Bwd IAT Min",       "Fwd PSH Flags",     "Bwd PSH Flags",     "Fwd URG Flags",
    "Bwd URG Flags",     "Fwd Header Len",    "Bwd Header Len",    "Fwd Pkts/s",
    "Bwd Pkts/s",        "Pkt Len Min",       "Pkt Len Max",       "Pkt Len Mean",
    "Pkt Len Std",       "Pkt Len Var",       "FIN Flag Cnt",      "SYN Flag Cnt",
    "RST Flag Cnt",      "PSH Flag Cnt",      "ACK Flag Cnt",      "URG Flag Cnt",
    "CWR Flag Cnt",      "ECE Flag Cnt",      "Down/Up Ratio",     "Pkt Size Avg",
    "Fwd Seg Size Avg",  "Bwd Seg Size Avg",  "Fwd Byts/b Avg",    "Fwd Pkts/b Avg",
    "Fwd Blk Rate Avg",  "Bwd Byts/b Avg",    "Bwd Pkts/b Avg",    "Bwd Blk Rate Avg",
    "Subflow Fwd Pkts",  "Subflow Fwd Byts",  "Subflow Bwd Pkts",  "Subflow Bwd Byts",
    "Init Fwd Win Byts", "Init Bwd Win Byts", "Fwd Act Data Pkts", "Fwd Seg Size Min",
    "Active Mean",       "Active Std",        "Active Max",        "Active Min",
    "Idle Mean",         "Idle Std",          "Idle Max",          "Idle Min",
};

const std::array<std::string_view, kNumCsvColumns> kCsvColumns = [] {
  std::array<std::string_view, kNumCsvColumns> cols{};
  const std::array<std::string_view, 7> head = {"Flow ID", "Src IP",   "Src Port", "Dst IP",
                                                "Dst Port", "Protocol", "Timestamp"};
  std::size_t i = 0;
  for (auto h : head) cols[i++] = h;
  for (auto s : kStatNames) cols[i++] = s;
  cols[i] = "Label";
  return cols;
}();

std::optional<std::size_t> stat_index(std::string_view name) {
  for (std::size_t i = 0; i < kStatNames.size(); ++i)
    if (kStatNames[i] == name) return i;
  return std::nullopt;
}

void RunningStats::add(double v) noexcept {
  ++n_;
  sum_ += v;
  if (n_ == 1) {
    mean_ = min_ = max_ = v;
    m2_ = 0.0;
    return;
  }
  const double delta = v - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (v - mean_);
  min_ = std::min(min_, v);
  max_ = std::max(max_, v);
}

double RunningStats::stddev() const noexcept { return std::sqrt(std::max(0.0, variance())); }

FlowAccumulator::FlowAccumulator(const PacketSummary& first, const Timeouts& timeouts)
    : timeouts_(timeouts),
      first_ts_(first.timestamp_us),
      last_ts_(first.timestamp_us),
      active_start_(first.timestamp_us),
      active_end_(first.timestamp_us) {
  add(first, Direction::Forward);
}

void FlowAccumulator::update_bulk(std::size_t d, const PacketSummary& p, std::int64_t ts) {
  // A payload-bearing packet in one direction ends the other direction's run.
  bulk_[1 - d].run_count = 0;
  Bulk& b = bulk_[d];
  if (b.run_count == 0 || ts - b.last > timeouts_.bulk_gap_us) {
    b.start = b.last = ts;
    b.run_count = 1;
    b.run_size = p.payload_len;
    return;
  }
  ++b.run_count;
  b.run_size += p.payload_len;
  if (b.run_count == 4) {
    ++b.states;
    b.packets += 4;
    b.size += b.run_size;
    b.duration += ts - b.start;
  } else if (b.run_count > 4) {
    ++b.packets;
    b.size += p.payload_len;
    b.duration += ts - b.last;
  }
  b.last = ts;
}

void FlowAccumulator::add(const PacketSummary& p, Direction dir) {
  const std::size_t d = idx(dir);
  const std::int64_t ts = p.timestamp_us;

  if (packets() > 0) {
    const std::int64_t gap = std::max<std::int64_t>(0, ts - last_ts_);
    flow_iat_.add(static_cast<double>(gap));
    if (gap > timeouts_.subflow_gap_us) ++subflow_gaps_;
    if (ts - active_end_ > timeouts_.activity_us) {
      if (active_end_ - active_start_ > 0) active_.add(static_cast<double>(active_end_ - active_start_));
      idle_.add(static_cast<double>(ts - active_end_));
      active_start_ = active_end_ = ts;
    } else {
      active_end_ = std::max(active_end_, ts);
    }
  }
  if (pkts_[d] > 0) {
    iat_[d].add(static_cast<double>(std::max<std::int64_t>(0, ts - dir_last_ts_[d])));
    dir_last_ts_[d] = std::max(dir_last_ts_[d], ts);
  } else {
    dir_last_ts_[d] = ts;
    init_win_[d] = p.tcp_window;
  }
  last_ts_ = std::max(last_ts_, ts);

  ++pkts_[d];
  payload_[d].add(p.payload_len);
  all_payload_.add(p.payload_len);
  header_bytes_[d] += p.transport_header_len;

  constexpr std::array<std::uint8_t, 8> order = {tf::FIN, tf::SYN, tf::RST, tf::PSH,
                                                 tf::ACK, tf::URG, tf::CWR, tf::ECE};
  for (std::size_t f = 0; f < order.size(); ++f)
    if (p.has(order[f])) ++flags_[f];
  if (p.has(tf::PSH)) ++psh_[d];
  if (p.has(tf::URG)) ++urg_[d];

  if (dir == Direction::Forward) {
    if (p.payload_len > 0) ++fwd_act_data_;
    fwd_min_header_ = pkts_[0] == 1 ? p.transport_header_len
                                    : std::min<std::uint64_t>(fwd_min_header_, p.transport_header_len);
  }
  if (p.payload_len > 0) update_bulk(d, p, ts);

  if (p.protocol == pcap::kProtoTcp) {
    if (p.has(tf::ACK) && fin_seen_[1 - d]) fin_acked_[1 - d] = true;
    if (p.has(tf::FIN)) fin_seen_[d] = true;
    if (p.has(tf::RST)) rst_ = true;
  }
}

FlowStats FlowAccumulator::finalize() const {
  FlowStats f{};
  const double duration = static_cast<double>(last_ts_ - first_ts_);
  const double seconds = duration / 1e6;
  const auto rate = [&](double v) { return seconds > 0.0 ? v / seconds : 0.0; };
  const double fwd = static_cast<double>(pkts_[0]), bwd = static_cast<double>(pkts_[1]);

  std::size_t i = 0;
  f[i++] = duration;
  f[i++] = fwd;
  f[i++] = bwd;
  f[i++] = payload_[0].sum();
  f[i++] = payload_[1].sum();
  for (std::size_t d = 0; d < 2; ++d) {
    f[i++] = payload_[d].max();
    f[i++] = payload_[d].min();
    f[i++] = payload_[d].mean();
    f[i++] = payload_[d].stddev();
  }
  f[i++] = rate(payload_[0].sum() + payload_[1].sum());
  f[i++] = rate(fwd + bwd);
  f[i++] = flow_iat_.mean();
  f[i++] = flow_iat_.stddev();
  f[i++] = flow_iat_.max();
  f[i++] = flow_iat_.min();
  for (std::size_t d = 0; d < 2; ++d) {
    f[i++] = iat_[d].sum();
    f[i++] = iat_[d].mean();
    f[i++] = iat_[d].stddev();
    f[i++] = iat_[d].max();
    f[i++] = iat_[d].min();
  }
  f[i++] = static_cast<double>(psh_[0]);
  f[i++] = static_cast<double>(psh_[1]);
  f[i++] = static_cast<double>(urg_[0]);
  f[i++] = static_cast<double>(urg_[1]);
  f[i++] = static_cast<double>(header_bytes_[0]);
  f[i++] = static_cast<double>(header_bytes_[1]);
  f[i++] = rate(fwd);
  f[i++] = rate(bwd);
  f[i++] = all_payload_.min();
  f[i++] = all_payload_.max();
  f[i++] = all_payload_.mean();
  f[i++] = all_payload_.stddev();
  f[i++] = all_payload_.variance();
  for (auto c : flags_) f[i++] = static_cast<double>(c);
  f[i++] = pkts_[0] > 0 ? std::floor(bwd / fwd) : 0.0;
  f[i++] = all_payload_.mean();
  f[i++] = payload_[0].mean();
  f[i++] = payload_[1].mean();
  for (const Bulk& b : bulk_) {
    const double states = static_cast<double>(b.states);
    f[i++] = b.states ? static_cast<double>(b.size) / states : 0.0;
    f[i++] = b.states ? static_cast<double>(b.packets) / states : 0.0;
    f[i++] = b.duration > 0 ? static_cast<double>(b.size) / (static_cast<double>(b.duration) / 1e6) : 0.0;
  }
  const double subflows = 1.0 + static_cast<double>(subflow_gaps_);
  f[i++] = fwd / subflows;
  f[i++] = payload_[0].sum() / subflows;
  f[i++] = bwd / subflows;
  f[i++] = payload_[1].sum() / subflows;
  f[i++] = static_cast<double>(init_win_[0].value_or(0));
  f[i++] = static_cast<double>(init_win_[1].value_or(0));
  f[i++] = static_cast<double>(fwd_act_data_);
  f[i++] = static_cast<double>(fwd_min_header_);

  RunningStats active = active_;
  if (active_end_ - active_start_ > 0) active.add(static_cast<double>(active_end_ - active_start_));
  for (const RunningStats* s : std::array<const RunningStats*, 2>{&active, &idle_}) {
    f[i++] = s->mean();
    f[i++] = s->stddev();
    f[i++] = s->max();
    f[i++] = s->min();
  }
  return f;
}

FlowMeter::FlowMeter(Timeouts timeouts) : timeouts_(timeouts) {}

std::size_t FlowMeter::EndpointsHash::operator()(const Endpoints& e) const noexcept {
  return static_cast<std::size_t>(splitmix64(e.a ^ splitmix64(e.b ^ (std::uint64_t(e.proto) << 56))));
}

FlowMeter::Endpoints FlowMeter::canonical(const PacketSummary& p) {
  const std::uint64_t src = std::uint64_t(p.src_ip) << 16 | p.src_port;
  const std::uint64_t dst = std::uint64_t(p.dst_ip) << 16 | p.dst_port;
  return {std::min(src, dst), std::max(src, dst), p.protocol};
}

FlowMeter::Lookup FlowMeter::flow_key_of(const PacketSummary& p) const {
  if (auto it = table_.find(canonical(p)); it != table_.end()) {
    const FlowKey& k = it->second.key;
    const bool fwd = k.ip_a == p.src_ip && k.port_a == p.src_port;
    return {k, fwd ? Direction::Forward : Direction::Backward, false};
  }
  return {FlowKey{p.src_ip, p.dst_ip, p.src_port, p.dst_port, p.protocol}, Direction::Forward, true};
}

FlowRecord FlowMeter::emit(Entry&& e) {
  FlowRecord r;
  r.flow_id = ++next_flow_id_;
  r.key = e.key;
  r.start_ts = e.acc.first_ts();
  r.stats = e.acc.finalize();
  return r;
}

std::vector<FlowRecord> FlowMeter::ingest(const PacketSummary& p) {
  std::vector<FlowRecord> out;
  if (p.protocol != pcap::kProtoTcp && p.protocol != pcap::kProtoUdp) return out;
  ++ingested_;
  const Endpoints ep = canonical(p);
  auto it = table_.find(ep);
  if (it != table_.end()) {
    Entry& e = it->second;
    const std::int64_t ts = p.timestamp_us;
    if (ts < e.acc.last_ts() - timeouts_.reorder_us)
      fail(Errc::ClockRegression, "packet at " + std::to_string(ts) + " us is " +
                                      std::to_string(e.acc.last_ts() - ts) + " us behind its flow");
    const bool idle = ts - e.acc.last_ts() > timeouts_.idle_us;
    const bool aged = ts - e.acc.first_ts() > timeouts_.flow_us;
    if (!idle && !aged) {
      const bool fwd = e.key.ip_a == p.src_ip && e.key.port_a == p.src_port;
      e.acc.add(p, fwd ? Direction::Forward : Direction::Backward);
      if (e.acc.tcp_closed()) {
        out.push_back(emit(std::move(e)));
        table_.erase(it);
      }
      return out;
    }
    out.push_back(emit(std::move(e)));
    table_.erase(it);
  }
  Entry fresh{FlowKey{p.src_ip, p.dst_ip, p.src_port, p.dst_port, p.protocol}, next_seq_++,
              FlowAccumulator(p, timeouts_)};
  if (fresh.acc.tcp_closed()) {
    out.push_back(emit(std::move(fresh)));
  } else {
    table_.emplace(ep, std::move(fresh));
  }
  return out;
}

std::vector<FlowRecord> FlowMeter::emit_sorted(std::vector<Entry>&& entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.acc.first_ts() != b.acc.first_ts()) return a.acc.first_ts() < b.acc.first_ts();
    return a.seq < b.seq;
  });
  std::vector<FlowRecord> out;
  out.reserve(entries.size());
  for (auto& e : entries) out.push_back(emit(std::move(e)));
  return out;
}

std::vector<FlowRecord> FlowMeter::expire(std::int64_t now) {
  std::vector<Entry> done;
  for (auto it = table_.begin(); it != table_.end();) {
    if (now - it->second.acc.last_ts() > timeouts_.idle_us) {
      done.push_back(std::move(it->second));
      it = table_.erase(it);
    } else {
      ++it;
    }
  }
  return emit_sorted(std::move(done));
}

std::vector<FlowRecord> FlowMeter::flush() {
  std::vector<Entry> done;
  done.reserve(table_.size());
  for (auto& [ep, e] : table_) done.push_back(std::move(e));
  table_.clear();
  return emit_sorted(std::move(done));
}

std::vector<FlowRecord> meter_packets(std::span<const PacketSummary> packets, const Timeouts& timeouts) {
  FlowMeter meter(timeouts);
  std::vector<FlowRecord> out;
  std::int64_t next_sweep = packets.empty() ? 0 : packets.front().timestamp_us;
  const auto append = [&out](std::vector<FlowRecord>&& rs) {
    for (auto& r : rs) out.push_back(std::move(r));
  };
  for (const auto& p : packets) {
    append(meter.ingest(p));
    if (p.timestamp_us >= next_sweep) {
      append(meter.expire(p.timestamp_us));
      next_sweep = p.timestamp_us + 1'000'000;
    }
  }
  append(meter.flush());
  return out;
}

std::vector<FlowRecord> meter_capture(const std::filesystem::path& path, const Timeouts& timeouts,
                                      std::optional<std::string> label, pcap::DecodeStats* stats) {
  const auto packets = pcap::read_packets(path, stats);
  auto records = meter_packets(packets, timeouts);
  for (auto& r : records) r.label = label;
  return records;
}

}  // namespace zcam::flow
