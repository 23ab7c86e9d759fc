#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "edgewear/kws/model.hpp"

namespace edgewear::kws {

/// Smallest scale ever assigned to a tensor. Degenerate calibration ranges
/// (max == min) fall back to this instead of dividing by zero.
inline constexpr double kMinQuantScale = 1e-6;

/// real = scale * (q - zero_point)
struct QuantParams {
  double scale = 1.0;
  int32_t zero_point = 0;

  bool operator==(const QuantParams&) const = default;
};

/// real multiplier ~= m0 * 2^-shift with m0 in [2^14, 2^15).
///
/// The 15-bit mantissa keeps |acc * m0| far below 2^53, so the integer
/// pipeline can be replayed exactly in double arithmetic.
struct FixedMultiplier {
  int32_t m0 = 0;
  int32_t shift = 0;

  bool operator==(const FixedMultiplier&) const = default;
};

FixedMultiplier quantize_multiplier(double real);
/// round-half-up(acc * m0 / 2^shift), arithmetic on int64.
int32_t apply_multiplier(int32_t acc, const FixedMultiplier& m);

/// Asymmetric int8 parameters covering [lo, hi] (range widened to include 0).
QuantParams choose_activation_params(double lo, double hi);
/// Symmetric int8 parameters (zero_point 0, codes in [-127, 127]).
QuantParams choose_weight_params(std::span<const double> weights);

int8_t quantize_value(double v, const QuantParams& p);

struct QConv1d {
  std::size_t in_ch = 0;
  std::size_t out_ch = 0;
  std::size_t kernel = 0;
  std::vector<int8_t> weight;  // [out][k][in]
  std::vector<int32_t> bias;   // scale = in.scale * weight_params.scale
  QuantParams weight_params;
  FixedMultiplier requant;
  QuantParams output;  // post-ReLU activation
};

struct QDense {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<int8_t> weight;  // [out][in]
  std::vector<int32_t> bias;
  QuantParams weight_params;
  FixedMultiplier requant;
  QuantParams output;  // logits
};

/// INT8 weights/activations, INT32 accumulators, fixed-point requantization.
struct QuantizedKwsModel {
  InputNorm norm;
  QuantParams input;
  QConv1d conv1;
  QConv1d conv2;
  QDense dense;

  std::size_t parameter_count() const {
    return conv1.weight.size() + conv1.bias.size() + conv2.weight.size() + conv2.bias.size() + dense.weight.size() +
           dense.bias.size();
  }
};

/// Observed activation ranges from float inference over calibration data.
struct CalibrationRanges {
  double input_lo = 0.0, input_hi = 0.0;
  double conv1_hi = 0.0;
  double conv2_hi = 0.0;
  double logits_lo = 0.0, logits_hi = 0.0;
};

CalibrationRanges calibrate(const KwsModel& model, std::span<const dsp::FeatureMatrix> calibration);

/// Post-training per-tensor quantization. Throws ConfigError on empty
/// calibration data.
QuantizedKwsModel quantize_int8(const KwsModel& model, std::span<const dsp::FeatureMatrix> calibration);

/// Integer-only forward pass. Returns the quantized logits.
std::array<int8_t, kNumLabels> forward_int8_logits(const QuantizedKwsModel& model, const dsp::FeatureMatrix& features);
/// Quantized input tensor [49][13] as the integer pipeline sees it.
std::vector<int8_t> quantize_input(const QuantizedKwsModel& model, const dsp::FeatureMatrix& features);
/// Softmax of the dequantized logits.
Posterior forward_int8(const QuantizedKwsModel& model, const dsp::FeatureMatrix& features);

std::vector<double> dequantize(std::span<const int8_t> q, const QuantParams& p);

}  // namespace edgewear::kws
