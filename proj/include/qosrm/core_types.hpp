#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace qosrm {

enum class CoreSize : std::uint8_t { S = 0, M = 1, L = 2 };

inline constexpr std::size_t kNumCoreSizes = 3;
inline constexpr std::array<CoreSize, kNumCoreSizes> kCoreSizes{CoreSize::S, CoreSize::M,
                                                                CoreSize::L};

constexpr std::size_t index_of(CoreSize c) { return static_cast<std::size_t>(c); }

std::string_view to_string(CoreSize c);
std::optional<CoreSize> parse_core_size(std::string_view name);

/// One reconfigurable core size point.
struct CoreConfig {
  CoreSize size = CoreSize::M;
  std::uint32_t dispatch_width = 4;
  std::uint32_t rob = 128;
  std::uint32_t rs = 64;
  std::uint32_t lsq = 32;
};

/// Small/medium/large out-of-order cores: 2/4/8-wide.
inline constexpr std::array<CoreConfig, kNumCoreSizes> kDefaultCores{{
    {CoreSize::S, 2, 64, 16, 10},
    {CoreSize::M, 4, 128, 64, 32},
    {CoreSize::L, 8, 256, 128, 64},
}};

using CoreTable = std::array<CoreConfig, kNumCoreSizes>;

/// Throws std::invalid_argument unless every field strictly increases S < M < L.
void validate_core_table(const CoreTable& table);

}  // namespace qosrm
