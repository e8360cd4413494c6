#pragma once

#include <ostream>
#include <span>
#include <string>

#include "zcam/flow.hpp"

namespace zcam::flow {

/// Shortest round-trip text for a double; integral values print without a fraction.
std::string format_number(double v);

/// Writes the 84-column flow CSV (header row included).
void write_csv(std::ostream& out, std::span<const FlowRecord> records);

}  // namespace zcam::flow
