#include "zcam/pcap.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <string>

#include "zcam/error.hpp"

namespace zcam::pcap {
namespace {

constexpr std::uint32_t kPcapngMagic = 0x0a0d0d0a;
constexpr std::size_t kGlobalHeaderLen = 24;
constexpr std::size_t kRecordHeaderLen = 16;
constexpr std::size_t kEthernetLen = 14;

std::uint32_t bswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00) | ((v << 8) & 0xff0000) | (v << 24);
}

std::uint32_t read_u32(const std::uint8_t* p, ByteOrder order) {
  if (order == ByteOrder::Little)
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
  return std::uint32_t(p[3]) | std::uint32_t(p[2]) << 8 | std::uint32_t(p[1]) << 16 |
         std::uint32_t(p[0]) << 24;
}

std::uint16_t read_u16(const std::uint8_t* p, ByteOrder order) {
  if (order == ByteOrder::Little) return std::uint16_t(p[0] | p[1] << 8);
  return std::uint16_t(p[1] | p[0] << 8);
}

// Network byte order.
std::uint16_t be16(const std::uint8_t* p) { return std::uint16_t(p[0] << 8 | p[1]); }
std::uint32_t be32(const std::uint8_t* p) { return read_u32(p, ByteOrder::Big); }

}  // namespace

CaptureHeader parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kGlobalHeaderLen) fail(Errc::Truncated, "capture global header needs 24 bytes");
  const std::uint32_t raw = read_u32(bytes.data(), ByteOrder::Little);
  CaptureHeader h;
  h.magic = raw;
  switch (raw) {
    case kMagicMicro: h.byte_order = ByteOrder::Little; h.ts_resolution = TsResolution::Micro; break;
    case kMagicNano: h.byte_order = ByteOrder::Little; h.ts_resolution = TsResolution::Nano; break;
    case 0xd4c3b2a1: h.byte_order = ByteOrder::Big; h.ts_resolution = TsResolution::Micro; break;
    case 0x4d3cb2a1: h.byte_order = ByteOrder::Big; h.ts_resolution = TsResolution::Nano; break;
    case kPcapngMagic: fail(Errc::UnknownMagic, "pcapng captures are not supported; convert to classic pcap");
    default: fail(Errc::UnknownMagic, "unrecognized capture magic 0x" + [&] {
        std::array<char, 9> buf{};
        std::snprintf(buf.data(), buf.size(), "%08x", bswap32(raw));
        return std::string(buf.data());
      }());
  }
  const auto* p = bytes.data();
  h.version_major = read_u16(p + 4, h.byte_order);
  h.version_minor = read_u16(p + 6, h.byte_order);
  h.thiszone = static_cast<std::int32_t>(read_u32(p + 8, h.byte_order));
  h.sigfigs = read_u32(p + 12, h.byte_order);
  h.snaplen = read_u32(p + 16, h.byte_order);
  h.linktype = read_u32(p + 20, h.byte_order);
  if (h.linktype != kLinkEthernet)
    fail(Errc::UnsupportedLinkType, "link type " + std::to_string(h.linktype) + " (only Ethernet is decoded)");
  return h;
}

CaptureReader::CaptureReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) fail(Errc::Io, "cannot open " + path.string());
  std::array<std::uint8_t, kGlobalHeaderLen> buf{};
  in_.read(reinterpret_cast<char*>(buf.data()), buf.size());
  header_ = parse_header(std::span(buf.data(), static_cast<std::size_t>(in_.gcount())));
}

std::optional<RawFrame> CaptureReader::next() {
  std::array<std::uint8_t, kRecordHeaderLen> rec{};
  in_.read(reinterpret_cast<char*>(rec.data()), rec.size());
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got == 0) return std::nullopt;
  if (got < rec.size()) {
    ++truncated_;
    return std::nullopt;
  }
  RawFrame f;
  const auto order = header_.byte_order;
  f.ts_sec = read_u32(rec.data(), order);
  f.ts_frac = read_u32(rec.data() + 4, order);
  const std::uint32_t incl = read_u32(rec.data() + 8, order);
  f.orig_len = read_u32(rec.data() + 12, order);
  f.data.resize(incl);
  in_.read(reinterpret_cast<char*>(f.data.data()), incl);
  if (static_cast<std::size_t>(in_.gcount()) < incl) {
    ++truncated_;
    return std::nullopt;
  }
  ++frames_;
  return f;
}

std::optional<PacketSummary> decode_packet(std::span<const std::uint8_t> frame,
                                           std::int64_t timestamp_us,
                                           std::optional<std::size_t> wire_len) {
  if (frame.size() < kEthernetLen) fail(Errc::MalformedHeader, "frame shorter than an Ethernet header");
  std::size_t off = 12;
  std::uint16_t ethertype = be16(frame.data() + off);
  off += 2;
  if (ethertype == 0x8100) {
    if (frame.size() < off + 4) fail(Errc::MalformedHeader, "truncated 802.1Q tag");
    ethertype = be16(frame.data() + off + 2);
    off += 4;
    if (ethertype == 0x8100 || ethertype == 0x88a8) return std::nullopt;
  }
  if (ethertype != 0x0800) return std::nullopt;

  // Bytes of the frame past the link header, as captured and as on the wire.
  const std::size_t captured = frame.size() - off;
  const std::size_t original = std::max(wire_len.value_or(frame.size()), frame.size()) - off;
  if (captured < 20) fail(Errc::MalformedHeader, "truncated IPv4 header");
  const std::uint8_t* ip = frame.data() + off;
  if ((ip[0] >> 4) != 4) fail(Errc::MalformedHeader, "IPv4 ethertype with version " + std::to_string(ip[0] >> 4));
  const std::size_t ihl = std::size_t(ip[0] & 0x0f) * 4;
  const std::uint16_t total_len = be16(ip + 2);
  if (ihl < 20 || ihl > captured) fail(Errc::MalformedHeader, "bad IPv4 header length");
  if (total_len < ihl || total_len > original) fail(Errc::MalformedHeader, "IPv4 total length exceeds frame");
  const std::uint16_t frag_offset = be16(ip + 6) & 0x1fff;
  if (frag_offset != 0) return std::nullopt;
  const std::uint8_t proto = ip[9];
  if (proto != kProtoTcp && proto != kProtoUdp) return std::nullopt;

  PacketSummary s;
  s.timestamp_us = timestamp_us;
  s.src_ip = be32(ip + 12);
  s.dst_ip = be32(ip + 16);
  s.protocol = proto;
  s.ip_total_len = total_len;
  s.ip_header_len = static_cast<std::uint16_t>(ihl);

  const std::uint8_t* l4 = ip + ihl;
  const std::size_t l4_captured = captured - ihl;
  if (proto == kProtoTcp) {
    if (l4_captured < 20) fail(Errc::MalformedHeader, "truncated TCP header");
    const std::size_t thl = std::size_t(l4[12] >> 4) * 4;
    if (thl < 20 || thl > l4_captured) fail(Errc::MalformedHeader, "bad TCP data offset");
    s.transport_header_len = static_cast<std::uint16_t>(thl);
    s.tcp_flags = l4[13];
    s.tcp_window = be16(l4 + 14);
  } else {
    if (l4_captured < 8) fail(Errc::MalformedHeader, "truncated UDP header");
    s.transport_header_len = 8;
  }
  s.src_port = be16(l4);
  s.dst_port = be16(l4 + 2);
  const std::size_t headers = ihl + s.transport_header_len;
  if (headers > total_len) fail(Errc::MalformedHeader, "headers exceed IPv4 total length");
  s.payload_len = static_cast<std::uint16_t>(total_len - headers);
  return s;
}

std::vector<PacketSummary> read_packets(const std::filesystem::path& path, DecodeStats* stats) {
  CaptureReader reader(path);
  DecodeStats st;
  std::vector<PacketSummary> out;
  while (auto frame = reader.next()) {
    ++st.frames;
    try {
      auto p = decode_packet(frame->data, frame->timestamp_us(reader.header().ts_resolution),
                             frame->orig_len);
      if (p) {
        out.push_back(*p);
        ++st.emitted;
      } else {
        ++st.skipped;
      }
    } catch (const Error& e) {
      if (e.code() != Errc::MalformedHeader) throw;
      ++st.malformed;
    }
  }
  st.truncated = reader.truncated_records();
  if (stats) *stats = st;
  return out;
}

std::string format_ipv4(std::uint32_t ip) {
  return std::to_string(ip >> 24) + "." + std::to_string((ip >> 16) & 0xff) + "." +
         std::to_string((ip >> 8) & 0xff) + "." + std::to_string(ip & 0xff);
}

}  // namespace zcam::pcap
