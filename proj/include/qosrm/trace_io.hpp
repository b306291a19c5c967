// Text trace format, one access per line in ATD arrival order:
//
//   <address hex> <instruction_index decimal> <is_load 0|1> [dep_index decimal]
//
// instruction_index is the absolute program-order index of the access; it is
// reduced modulo the instruction window when forming an AccessRecord.
// dep_index, when present, is the program-order index of the load this
// access depends on. Blank lines and lines starting with '#' are skipped.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qosrm/cache_atd.hpp"

namespace qosrm {

struct TraceEntry {
  std::uint64_t address = 0;
  std::uint64_t instruction_index = 0;
  bool is_load = true;
  std::optional<std::uint64_t> dep_index;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

AccessRecord to_access_record(const TraceEntry& entry,
                              std::uint32_t window = kInstructionWindow);

/// Throws std::runtime_error naming the offending line on malformed input.
std::vector<TraceEntry> read_trace(std::istream& in);
std::vector<TraceEntry> read_trace_file(const std::string& path);

void write_trace(std::ostream& out, std::span<const TraceEntry> entries);
void write_trace_file(const std::string& path, std::span<const TraceEntry> entries);

}  // namespace qosrm
