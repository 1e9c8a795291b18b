#pragma once

// Helpers shared by the training loops in robust.cpp and nn_boost.cpp.

#include <cstdint>
#include <span>

#include "mrboost/nn.hpp"

namespace mrb::detail {

inline constexpr std::uint64_t kInitSalt = 0x1001;
inline constexpr std::uint64_t kBatchSalt = 0x2002;
inline constexpr std::uint64_t kExpDrawSalt = 0x3003;
inline constexpr std::uint64_t kPoolSalt = 0x4004;

/// Xavier initialization for boosting stage `stage`.
MlpParams init_params(std::span<const std::size_t> sizes, std::uint64_t seed,
                      std::uint64_t stage);

/// Attack stream id for SGD step `step` of stage `stage`.
inline std::uint64_t attack_stream(std::uint64_t stage, std::uint64_t step) {
  return (stage << 32) | step;
}

}  // namespace mrb::detail
