#include "zcam/flow_csv.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace zcam::flow {

std::string format_number(double v) {
  if (std::isfinite(v) && v == std::trunc(v) && std::fabs(v) < 9.007199254740992e15)
    return std::to_string(static_cast<long long>(v));
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_csv(std::ostream& out, std::span<const FlowRecord> records) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) out << (i ? "," : "") << kCsvColumns[i];
  out << '\n';
  for (const auto& r : records) {
    out << r.flow_id << ',' << pcap::format_ipv4(r.key.ip_a) << ',' << r.key.port_a << ','
        << pcap::format_ipv4(r.key.ip_b) << ',' << r.key.port_b << ',' << int(r.key.protocol) << ','
        << r.start_ts;
    for (double v : r.stats) out << ',' << format_number(v);
    out << ',' << r.label.value_or("") << '\n';
  }
}

}  // namespace zcam::flow
