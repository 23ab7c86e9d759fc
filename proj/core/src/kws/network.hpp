#pragma once

// Float forward/backward kernels shared by inference, training and
// calibration. Activations are time-major: [frame][channel].

#include <array>
#include <vector>

#include "edgewear/kws/model.hpp"

namespace edgewear::kws::detail {

struct ForwardCache {
  std::vector<double> x0;  // normalized input [49][13]
  std::vector<double> z1;  // conv1 pre-activation [49][8]
  std::vector<double> p1;  // pooled [24][8] (after dropout when training)
  std::vector<std::size_t> arg1;  // argmax index into z1 per pooled element
  std::vector<double> z2;  // [24][16]
  std::vector<double> p2;  // [12][16] == flatten, after dropout
  std::vector<std::size_t> arg2;
  std::array<double, kNumLabels> logits{};
};

/// Optional inverted-dropout masks (already scaled by 1/(1-p)).
struct DropoutMasks {
  std::vector<double> after_pool1;  // 24*8
  std::vector<double> after_pool2;  // 12*16
};

void normalize_input(const KwsModel& m, const dsp::FeatureMatrix& f, std::vector<double>& x0);

void conv1d_same(const Conv1d& c, const std::vector<double>& in, std::size_t frames, std::vector<double>& out);
void relu_maxpool2(const std::vector<double>& z, std::size_t frames, std::size_t channels, std::vector<double>& out,
                   std::vector<std::size_t>& arg);

void forward(const KwsModel& m, const dsp::FeatureMatrix& f, ForwardCache& cache, const DropoutMasks* masks = nullptr);

/// Accumulates d(loss)/d(params) for one example into `grad` (scaled by
/// `weight`), given a cache from forward(). Returns the example's loss.
double backward(const KwsModel& m, const ForwardCache& cache, std::size_t label, KwsModel& grad, double weight,
                const DropoutMasks* masks = nullptr);

}  // namespace edgewear::kws::detail
