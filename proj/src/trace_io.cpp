#include "qosrm/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace qosrm {
namespace {

std::string_view next_field(std::string_view& line) {
  const auto start = line.find_first_not_of(" \t\r");
  if (start == std::string_view::npos) {
    line = {};
    return {};
  }
  line.remove_prefix(start);
  const auto end = line.find_first_of(" \t\r");
  std::string_view field = line.substr(0, end);
  line.remove_prefix(end == std::string_view::npos ? line.size() : end);
  return field;
}

template <typename T>
bool parse_number(std::string_view field, T& out, int base) {
  if (base == 16 && field.size() > 2 && field[0] == '0' && (field[1] == 'x' || field[1] == 'X')) {
    field.remove_prefix(2);
  }
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out, base);
  return ec == std::errc{} && ptr == end;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("trace line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

AccessRecord to_access_record(const TraceEntry& entry, std::uint32_t window) {
  return AccessRecord{entry.address,
                      static_cast<std::uint32_t>(entry.instruction_index % window),
                      entry.is_load};
}

std::vector<TraceEntry> read_trace(std::istream& in) {
  std::vector<TraceEntry> entries;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#') continue;

    TraceEntry e;
    const auto addr = next_field(line);
    const auto index = next_field(line);
    const auto load = next_field(line);
    const auto dep = next_field(line);
    if (!next_field(line).empty()) fail(line_no, "too many fields");
    if (load.empty()) fail(line_no, "expected at least 3 fields");
    if (!parse_number(addr, e.address, 16)) fail(line_no, "bad address '" + std::string(addr) + "'");
    if (!parse_number(index, e.instruction_index, 10)) {
      fail(line_no, "bad instruction index '" + std::string(index) + "'");
    }
    if (load == "1") {
      e.is_load = true;
    } else if (load == "0") {
      e.is_load = false;
    } else {
      fail(line_no, "is_load must be 0 or 1");
    }
    if (!dep.empty()) {
      std::uint64_t d = 0;
      if (!parse_number(dep, d, 10)) fail(line_no, "bad dep_index '" + std::string(dep) + "'");
      e.dep_index = d;
    }
    entries.push_back(e);
  }
  return entries;
}

std::vector<TraceEntry> read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path);
  return read_trace(in);
}

void write_trace(std::ostream& out, std::span<const TraceEntry> entries) {
  std::ostringstream line;
  for (const TraceEntry& e : entries) {
    line.str({});
    line << std::hex << "0x" << e.address << std::dec << ' ' << e.instruction_index << ' '
         << (e.is_load ? 1 : 0);
    if (e.dep_index) line << ' ' << *e.dep_index;
    out << line.str() << '\n';
  }
}

void write_trace_file(const std::string& path, std::span<const TraceEntry> entries) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file " + path);
  write_trace(out, entries);
}

}  // namespace qosrm
