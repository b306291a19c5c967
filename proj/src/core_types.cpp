#include "qosrm/core_types.hpp"

#include <stdexcept>

namespace qosrm {

std::string_view to_string(CoreSize c) {
  switch (c) {
    case CoreSize::S: return "S";
    case CoreSize::M: return "M";
    case CoreSize::L: return "L";
  }
  return "?";
}

std::optional<CoreSize> parse_core_size(std::string_view name) {
  if (name == "S") return CoreSize::S;
  if (name == "M") return CoreSize::M;
  if (name == "L") return CoreSize::L;
  return std::nullopt;
}

void validate_core_table(const CoreTable& table) {
  for (std::size_t i = 0; i < kNumCoreSizes; ++i) {
    if (table[i].size != kCoreSizes[i]) {
      throw std::invalid_argument("core table must be ordered S, M, L");
    }
    if (table[i].dispatch_width == 0 || table[i].rob == 0) {
      throw std::invalid_argument("core dispatch width and ROB must be positive");
    }
  }
  for (std::size_t i = 1; i < kNumCoreSizes; ++i) {
    const CoreConfig& a = table[i - 1];
    const CoreConfig& b = table[i];
    if (!(a.dispatch_width < b.dispatch_width && a.rob < b.rob && a.rs < b.rs && a.lsq < b.lsq)) {
      throw std::invalid_argument("core resources must strictly increase with size");
    }
  }
}

}  // namespace qosrm
