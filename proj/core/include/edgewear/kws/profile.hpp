#pragma once

#include <cstddef>

#include "edgewear/kws/model.hpp"
#include "edgewear/kws/quantize.hpp"

namespace edgewear::kws {

/// Static resource counts for one inference over a 49x13 window.
struct ResourceProfile {
  std::size_t params = 0;
  std::size_t macs = 0;
  /// Largest (input + output) activation footprint of any single layer.
  std::size_t peak_activation_bytes = 0;
  /// One storage element per parameter: 4 bytes (float) or 1 byte (INT8).
  std::size_t weight_bytes = 0;
  /// INT8 only: extra bytes from keeping biases as INT32 accumulators.
  std::size_t bias_widening_bytes = 0;
};

ResourceProfile profile(const KwsModel& model);
ResourceProfile profile(const QuantizedKwsModel& model);

}  // namespace edgewear::kws
