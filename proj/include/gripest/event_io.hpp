#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gripest/types.hpp"

namespace gripest {

/// Decodes one JSONL sensor-log record.
///
/// Recognised types are `imu`, `steering`, `radar` and `ref_vel`. Unknown
/// fields are ignored. Malformed JSON raises ParseError, a missing or
/// mistyped field raises SchemaError and a non-finite number raises RangeError.
SensorEvent parse_event(std::string_view line);

/// Encodes an event as a single JSONL record (no trailing newline).
std::string serialize_event(const SensorEvent& event);

/// Reads a whole log. Errors are rethrown with the 1-based line number
/// prefixed to the message; blank lines are skipped.
std::vector<SensorEvent> read_log(std::istream& in);
std::vector<SensorEvent> read_log_file(const std::string& path);

/// Rounds a timestamp to microsecond resolution.
double round_to_microseconds(double t);

}  // namespace gripest
