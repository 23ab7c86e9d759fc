#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "edgewear/dsp/mfcc.hpp"
#include "edgewear/kws/labels.hpp"

namespace edgewear::kws {

inline constexpr std::size_t kInputFrames = 49;
inline constexpr std::size_t kInputCoeffs = 13;

using Posterior = std::array<double, kNumLabels>;

/// 1-D convolution over time, "same" padding. Weight layout [out][k][in].
struct Conv1d {
  std::size_t in_ch = 0;
  std::size_t out_ch = 0;
  std::size_t kernel = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  std::size_t parameter_count() const { return weight.size() + bias.size(); }
  double& w(std::size_t o, std::size_t k, std::size_t i) { return weight[(o * kernel + k) * in_ch + i]; }
  double w(std::size_t o, std::size_t k, std::size_t i) const { return weight[(o * kernel + k) * in_ch + i]; }
};

/// Fully connected layer. Weight layout [out][in].
struct Dense {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  std::size_t parameter_count() const { return weight.size() + bias.size(); }
};

/// Per-coefficient standardization applied before the first convolution.
/// Fitted on the training split; not a trainable parameter.
struct InputNorm {
  std::vector<double> mean = std::vector<double>(kInputCoeffs, 0.0);
  std::vector<double> inv_std = std::vector<double>(kInputCoeffs, 1.0);

  double apply(std::size_t coeff, double v) const { return (v - mean[coeff]) * inv_std[coeff]; }
};

/// conv(13->8,k3)+ReLU+pool2 -> conv(8->16,k3)+ReLU+pool2 -> dense(192->4) -> softmax.
/// Dropout layers exist only at training time.
struct KwsModel {
  Conv1d conv1;
  Conv1d conv2;
  Dense dense;
  InputNorm norm;

  /// Correctly shaped, all-zero model.
  static KwsModel zeros();
  /// He-uniform weights, zero biases.
  static KwsModel init(uint64_t seed);

  std::size_t parameter_count() const {
    return conv1.parameter_count() + conv2.parameter_count() + dense.parameter_count();
  }

  /// Flat views over every trainable tensor, in a fixed order.
  std::vector<std::span<double>> parameters();
  std::vector<std::span<const double>> parameters() const;
};

// Intermediate shapes for the fixed topology.
inline constexpr std::size_t kConv1Channels = 8;
inline constexpr std::size_t kConv2Channels = 16;
inline constexpr std::size_t kPool1Frames = kInputFrames / 2;  // 24
inline constexpr std::size_t kPool2Frames = kPool1Frames / 2;  // 12
inline constexpr std::size_t kFlatten = kPool2Frames * kConv2Channels;  // 192

/// Softmax posterior over {heydotty, confuse, noise, unknown}.
/// Throws InputError if `features` is not 49x13.
Posterior forward_float(const KwsModel& model, const dsp::FeatureMatrix& features);
/// Pre-softmax scores.
std::array<double, kNumLabels> forward_logits(const KwsModel& model, const dsp::FeatureMatrix& features);

Posterior softmax(std::span<const double> logits);
std::size_t argmax(std::span<const double> v);

void check_feature_shape(const dsp::FeatureMatrix& features);

}  // namespace edgewear::kws
