#include <doctest.h>

#include "support/pcap_writer.hpp"
#include "zcam/error.hpp"
#include "zcam/pcap.hpp"

using namespace zcam;
using zcam::test::FrameSpec;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Io;
}

}  // namespace

TEST_CASE("global header magics and byte orders") {
  for (auto order : {pcap::ByteOrder::Little, pcap::ByteOrder::Big}) {
    for (bool nano : {false, true}) {
      test::CaptureWriter w({order, nano});
      const auto h = pcap::parse_header(w.bytes());
      CHECK(h.byte_order == order);
      CHECK(h.ts_resolution == (nano ? pcap::TsResolution::Nano : pcap::TsResolution::Micro));
      CHECK(h.version_major == 2);
      CHECK(h.version_minor == 4);
      CHECK(h.snaplen == 65535);
    }
  }
}

TEST_CASE("header errors") {
  std::vector<std::uint8_t> ng = {0x0a, 0x0d, 0x0d, 0x0a};
  ng.resize(24);
  CHECK(code_of([&] { pcap::parse_header(ng); }) == Errc::UnknownMagic);
  std::vector<std::uint8_t> junk(24, 0x11);
  CHECK(code_of([&] { pcap::parse_header(junk); }) == Errc::UnknownMagic);
  test::CaptureWriter raw_ip({pcap::ByteOrder::Little, false, 101});
  CHECK(code_of([&] { pcap::parse_header(raw_ip.bytes()); }) == Errc::UnsupportedLinkType);
  std::vector<std::uint8_t> shorty(10, 0);
  CHECK(code_of([&] { pcap::parse_header(shorty); }) == Errc::Truncated);
}

TEST_CASE("decode TCP SYN without payload") {
  FrameSpec s;
  s.flags = pcap::tcp_flag::SYN;
  s.window = 29200;
  s.ts_us = 1234567;
  const auto frame = test::build_frame(s);
  const auto p = pcap::decode_packet(frame, s.ts_us);
  REQUIRE(p);
  CHECK(p->ip_total_len == 40);
  CHECK(p->payload_len == 0);
  CHECK(p->transport_header_len == 20);
  CHECK(p->ip_header_len == 20);
  CHECK(p->has(pcap::tcp_flag::SYN));
  CHECK_FALSE(p->has(pcap::tcp_flag::ACK));
  CHECK(p->tcp_window == 29200);
  CHECK(p->src_ip == 0x0a000001);
  CHECK(p->dst_port == 443);
  CHECK(p->timestamp_us == 1234567);
  CHECK(pcap::format_ipv4(p->src_ip) == "10.0.0.1");
}

TEST_CASE("decode UDP total length 36 gives 8 payload bytes and no window") {
  FrameSpec s;
  s.protocol = pcap::kProtoUdp;
  s.payload = 8;
  const auto p = test::decode(s);
  CHECK(p.ip_total_len == 36);
  CHECK(p.payload_len == 8);
  CHECK(p.transport_header_len == 8);
  CHECK_FALSE(p.tcp_window.has_value());
}

TEST_CASE("TCP options widen the header") {
  FrameSpec s;
  s.tcp_options = 3;
  s.payload = 10;
  const auto p = test::decode(s);
  CHECK(p.transport_header_len == 32);
  CHECK(p.payload_len == 10);
}

TEST_CASE("VLAN tag is unwrapped once") {
  FrameSpec s;
  s.vlan = 42;
  s.payload = 5;
  const auto p = test::decode(s);
  CHECK(p.payload_len == 5);
  FrameSpec plain = s;
  plain.vlan.reset();
  CHECK(p == test::decode(plain));
}

TEST_CASE("non-IPv4 and non-first fragments are skipped") {
  FrameSpec arp;
  arp.ethertype = 0x0806;
  auto f = test::build_frame(arp);
  CHECK_FALSE(pcap::decode_packet(f, 0).has_value());
  FrameSpec v6;
  v6.ethertype = 0x86dd;
  f = test::build_frame(v6);
  CHECK_FALSE(pcap::decode_packet(f, 0).has_value());
  FrameSpec frag;
  frag.frag_offset = 100;
  f = test::build_frame(frag);
  CHECK_FALSE(pcap::decode_packet(f, 0).has_value());
  FrameSpec icmp;
  icmp.protocol = 1;
  icmp.payload = 8;
  f = test::build_frame(icmp);
  // ICMP is built like UDP by the writer; only the protocol byte matters here.
  CHECK_FALSE(pcap::decode_packet(f, 0).has_value());
}

TEST_CASE("declared lengths beyond the frame are malformed") {
  FrameSpec s;
  s.payload = 20;
  auto f = test::build_frame(s);
  f.resize(f.size() - 10);
  CHECK(code_of([&] { pcap::decode_packet(f, 0); }) == Errc::MalformedHeader);
  // A snapped frame whose wire length covers the declared size decodes fine.
  CHECK(pcap::decode_packet(f, 0, f.size() + 10)->payload_len == 20);
  std::vector<std::uint8_t> tiny(10, 0);
  CHECK(code_of([&] { pcap::decode_packet(tiny, 0); }) == Errc::MalformedHeader);
}

TEST_CASE("capture reader in both byte orders and resolutions") {
  test::TempDir dir("pcap");
  for (auto order : {pcap::ByteOrder::Little, pcap::ByteOrder::Big}) {
    for (bool nano : {false, true}) {
      test::CaptureWriter w({order, nano});
      FrameSpec a;
      a.ts_us = 5'000'123;
      a.payload = 7;
      FrameSpec arp;
      arp.ethertype = 0x0806;
      arp.ts_us = 5'100'000;
      w.add(a);
      w.add(test::build_frame(arp), arp.ts_us);
      w.add(test::build_frame(a), 6'000'000, nano ? 999 : 0);
      const auto path = dir / "c.pcap";
      w.save(path);
      pcap::DecodeStats st;
      const auto pk = pcap::read_packets(path, &st);
      CHECK(st.frames == 3);
      CHECK(st.emitted == 2);
      CHECK(st.skipped == 1);
      REQUIRE(pk.size() == 2);
      CHECK(pk[0].timestamp_us == 5'000'123);
      // nanoseconds truncate to microseconds
      CHECK(pk[1].timestamp_us == 6'000'000);
      CHECK(pk[0].payload_len == 7);
    }
  }
}

TEST_CASE("trailing partial record is dropped and counted") {
  test::TempDir dir("pcap");
  test::CaptureWriter w;
  FrameSpec a;
  w.add(a);
  w.add(a);
  auto bytes = w.bytes();
  bytes.resize(bytes.size() - 5);
  const auto path = dir / "t.pcap";
  {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  }
  pcap::DecodeStats st;
  const auto pk = pcap::read_packets(path, &st);
  CHECK(pk.size() == 1);
  CHECK(st.truncated == 1);
}

TEST_CASE("malformed frames are counted, not fatal") {
  test::TempDir dir("pcap");
  test::CaptureWriter w;
  FrameSpec a;
  a.payload = 30;
  auto bad = test::build_frame(a);
  bad.resize(bad.size() - 20);
  w.add(bad, 0);
  w.add(a);
  const auto path = dir / "m.pcap";
  w.save(path);
  pcap::DecodeStats st;
  const auto pk = pcap::read_packets(path, &st);
  CHECK(pk.size() == 1);
  CHECK(st.malformed == 1);
}

TEST_CASE("missing file is an Io error") {
  CHECK(code_of([] { pcap::read_packets("/nonexistent/zcam.pcap"); }) == Errc::Io);
}
