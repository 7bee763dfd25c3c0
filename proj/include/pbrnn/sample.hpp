#pragma once

#include "pbrnn/core_math.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace pbrnn {

using ClassId = std::size_t;

/// One classifier input: a temporal sequence of flattened patch (or pixel)
/// vectors labeled by the center pixel.
struct SampleSequence {
  std::vector<Vector> vectors;
  std::optional<ClassId> label;
  std::size_t row = 0;
  std::size_t col = 0;
  /// 1 = clear datum, 0 = contaminated datum (vector is all zeros).
  std::vector<std::uint8_t> valid_mask;

  std::size_t length() const noexcept { return vectors.size(); }
  std::size_t input_dim() const noexcept { return vectors.empty() ? 0 : vectors.front().size(); }

  friend bool operator==(const SampleSequence &, const SampleSequence &) = default;
};

} // namespace pbrnn
