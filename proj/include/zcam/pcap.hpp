#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <vector>

namespace zcam::pcap {

enum class ByteOrder { Big, Little };
enum class TsResolution { Micro, Nano };

inline constexpr std::uint32_t kMagicMicro = 0xa1b2c3d4;
inline constexpr std::uint32_t kMagicNano = 0xa1b23c4d;
inline constexpr std::uint32_t kLinkEthernet = 1;

struct CaptureHeader {
  std::uint32_t magic = kMagicMicro;  // as it appears in the file's own byte order
  std::uint16_t version_major = 2;
  std::uint16_t version_minor = 4;
  std::int32_t thiszone = 0;
  std::uint32_t sigfigs = 0;
  std::uint32_t snaplen = 65535;
  std::uint32_t linktype = kLinkEthernet;
  ByteOrder byte_order = ByteOrder::Little;
  TsResolution ts_resolution = TsResolution::Micro;
};

struct RawFrame {
  std::uint32_t ts_sec = 0;
  std::uint32_t ts_frac = 0;  // micro- or nanoseconds, per the capture header
  std::uint32_t orig_len = 0;
  std::vector<std::uint8_t> data;

  /// Timestamp in microseconds since the epoch; nanosecond captures are truncated.
  std::int64_t timestamp_us(TsResolution res) const noexcept {
    const std::int64_t frac = res == TsResolution::Nano ? ts_frac / 1000 : ts_frac;
    return static_cast<std::int64_t>(ts_sec) * 1'000'000 + frac;
  }
};

/// Parses the 24-byte global header. Throws UnknownMagic, UnsupportedLinkType or Truncated.
CaptureHeader parse_header(std::span<const std::uint8_t> bytes);

/// Streaming reader over a classic capture file. Frames come back in file order.
class CaptureReader {
 public:
  explicit CaptureReader(const std::filesystem::path& path);

  const CaptureHeader& header() const noexcept { return header_; }

  /// Next frame, or nullopt at end of file. A trailing partial record is dropped
  /// and counted in truncated_records().
  std::optional<RawFrame> next();

  std::size_t frames_read() const noexcept { return frames_; }
  std::size_t truncated_records() const noexcept { return truncated_; }

 private:
  std::ifstream in_;
  CaptureHeader header_;
  std::size_t frames_ = 0;
  std::size_t truncated_ = 0;
};

// TCP flag bits as they appear in the header.
namespace tcp_flag {
inline constexpr std::uint8_t FIN = 0x01;
inline constexpr std::uint8_t SYN = 0x02;
inline constexpr std::uint8_t RST = 0x04;
inline constexpr std::uint8_t PSH = 0x08;
inline constexpr std::uint8_t ACK = 0x10;
inline constexpr std::uint8_t URG = 0x20;
inline constexpr std::uint8_t ECE = 0x40;
inline constexpr std::uint8_t CWR = 0x80;
}  // namespace tcp_flag

inline constexpr std::uint8_t kProtoTcp = 6;
inline constexpr std::uint8_t kProtoUdp = 17;

struct PacketSummary {
  std::int64_t timestamp_us = 0;
  std::uint32_t src_ip = 0;  // host order
  std::uint32_t dst_ip = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t protocol = 0;
  std::uint16_t ip_total_len = 0;
  std::uint16_t ip_header_len = 0;
  std::uint16_t transport_header_len = 0;
  std::uint16_t payload_len = 0;
  std::uint8_t tcp_flags = 0;
  std::optional<std::uint16_t> tcp_window;

  bool has(std::uint8_t flag) const noexcept { return (tcp_flags & flag) != 0; }
  bool operator==(const PacketSummary&) const = default;
};

/// Decodes Ethernet / optional single 802.1Q tag / IPv4 / TCP|UDP.
/// Returns nullopt (skip) for traffic outside that stack and for non-first fragments.
/// Throws MalformedHeader when declared lengths exceed the bytes available;
/// `wire_len` is the original frame length and defaults to the captured length.
std::optional<PacketSummary> decode_packet(std::span<const std::uint8_t> frame,
                                           std::int64_t timestamp_us,
                                           std::optional<std::size_t> wire_len = std::nullopt);

struct DecodeStats {
  std::size_t frames = 0;
  std::size_t emitted = 0;
  std::size_t skipped = 0;
  std::size_t malformed = 0;
  std::size_t truncated = 0;
};

/// Reads and decodes a whole capture file.
std::vector<PacketSummary> read_packets(const std::filesystem::path& path,
                                        DecodeStats* stats = nullptr);

std::string format_ipv4(std::uint32_t ip);

}  // namespace zcam::pcap
