#include "edgewear/kws/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "edgewear/error.hpp"
#include "network.hpp"

namespace edgewear::kws {
namespace {

Conv1d make_conv(std::size_t in, std::size_t out, std::size_t k) {
  Conv1d c;
  c.in_ch = in;
  c.out_ch = out;
  c.kernel = k;
  c.weight.assign(in * out * k, 0.0);
  c.bias.assign(out, 0.0);
  return c;
}

void he_uniform(std::vector<double>& w, std::size_t fan_in, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& v : w) v = dist(rng);
}

}  // namespace

KwsModel KwsModel::zeros() {
  KwsModel m;
  m.conv1 = make_conv(kInputCoeffs, kConv1Channels, 3);
  m.conv2 = make_conv(kConv1Channels, kConv2Channels, 3);
  m.dense.in = kFlatten;
  m.dense.out = kNumLabels;
  m.dense.weight.assign(kFlatten * kNumLabels, 0.0);
  m.dense.bias.assign(kNumLabels, 0.0);
  return m;
}

KwsModel KwsModel::init(uint64_t seed) {
  KwsModel m = zeros();
  std::mt19937_64 rng(seed);
  he_uniform(m.conv1.weight, m.conv1.in_ch * m.conv1.kernel, rng);
  he_uniform(m.conv2.weight, m.conv2.in_ch * m.conv2.kernel, rng);
  he_uniform(m.dense.weight, m.dense.in, rng);
  return m;
}

std::vector<std::span<double>> KwsModel::parameters() {
  return {conv1.weight, conv1.bias, conv2.weight, conv2.bias, dense.weight, dense.bias};
}

std::vector<std::span<const double>> KwsModel::parameters() const {
  return {conv1.weight, conv1.bias, conv2.weight, conv2.bias, dense.weight, dense.bias};
}

void check_feature_shape(const dsp::FeatureMatrix& f) {
  if (f.rows != kInputFrames || f.cols != kInputCoeffs || f.values.size() != kInputFrames * kInputCoeffs) {
    throw InputError("kws: expected 49x13 features, got " + std::to_string(f.rows) + "x" + std::to_string(f.cols));
  }
}

Posterior softmax(std::span<const double> logits) {
  Posterior p{};
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::distance(v.begin(), std::max_element(v.begin(), v.end())));
}

std::array<double, kNumLabels> forward_logits(const KwsModel& model, const dsp::FeatureMatrix& features) {
  check_feature_shape(features);
  detail::ForwardCache cache;
  detail::forward(model, features, cache);
  return cache.logits;
}

Posterior forward_float(const KwsModel& model, const dsp::FeatureMatrix& features) {
  const auto logits = forward_logits(model, features);
  return softmax(logits);
}

namespace detail {

void normalize_input(const KwsModel& m, const dsp::FeatureMatrix& f, std::vector<double>& x0) {
  x0.resize(kInputFrames * kInputCoeffs);
  for (std::size_t t = 0; t < kInputFrames; ++t) {
    for (std::size_t c = 0; c < kInputCoeffs; ++c) {
      x0[t * kInputCoeffs + c] = m.norm.apply(c, f.values[t * kInputCoeffs + c]);
    }
  }
}

void conv1d_same(const Conv1d& c, const std::vector<double>& in, std::size_t frames, std::vector<double>& out) {
  out.assign(frames * c.out_ch, 0.0);
  const auto half = static_cast<long>(c.kernel / 2);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t o = 0; o < c.out_ch; ++o) {
      double acc = c.bias[o];
      for (std::size_t k = 0; k < c.kernel; ++k) {
        const long src = static_cast<long>(t) + static_cast<long>(k) - half;
        if (src < 0 || src >= static_cast<long>(frames)) continue;
        const double* x = &in[static_cast<std::size_t>(src) * c.in_ch];
        const double* w = &c.weight[(o * c.kernel + k) * c.in_ch];
        for (std::size_t i = 0; i < c.in_ch; ++i) acc += w[i] * x[i];
      }
      out[t * c.out_ch + o] = acc;
    }
  }
}

void relu_maxpool2(const std::vector<double>& z, std::size_t frames, std::size_t channels, std::vector<double>& out,
                   std::vector<std::size_t>& arg) {
  const std::size_t pooled = frames / 2;
  out.assign(pooled * channels, 0.0);
  arg.assign(pooled * channels, 0);
  for (std::size_t t = 0; t < pooled; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t a = (2 * t) * channels + c;
      const std::size_t b = (2 * t + 1) * channels + c;
      const std::size_t best = z[b] > z[a] ? b : a;
      arg[t * channels + c] = best;
      out[t * channels + c] = std::max(0.0, z[best]);
    }
  }
}

void forward(const KwsModel& m, const dsp::FeatureMatrix& f, ForwardCache& cache, const DropoutMasks* masks) {
  normalize_input(m, f, cache.x0);
  conv1d_same(m.conv1, cache.x0, kInputFrames, cache.z1);
  relu_maxpool2(cache.z1, kInputFrames, kConv1Channels, cache.p1, cache.arg1);
  if (masks) {
    for (std::size_t i = 0; i < cache.p1.size(); ++i) cache.p1[i] *= masks->after_pool1[i];
  }
  conv1d_same(m.conv2, cache.p1, kPool1Frames, cache.z2);
  relu_maxpool2(cache.z2, kPool1Frames, kConv2Channels, cache.p2, cache.arg2);
  if (masks) {
    for (std::size_t i = 0; i < cache.p2.size(); ++i) cache.p2[i] *= masks->after_pool2[i];
  }
  for (std::size_t o = 0; o < kNumLabels; ++o) {
    double acc = m.dense.bias[o];
    const double* w = &m.dense.weight[o * kFlatten];
    for (std::size_t i = 0; i < kFlatten; ++i) acc += w[i] * cache.p2[i];
    cache.logits[o] = acc;
  }
}

namespace {

// Gradient through ReLU+maxpool: route d(pooled) to the winning position
// when it was positive.
void unpool_relu(const std::vector<double>& dpooled, const std::vector<std::size_t>& arg, const std::vector<double>& z,
                 std::vector<double>& dz) {
  dz.assign(z.size(), 0.0);
  for (std::size_t i = 0; i < dpooled.size(); ++i) {
    if (z[arg[i]] > 0.0) dz[arg[i]] += dpooled[i];
  }
}

void conv_backward(const Conv1d& c, const std::vector<double>& in, std::size_t frames, const std::vector<double>& dz,
                   Conv1d& grad, double weight, std::vector<double>* din) {
  if (din) din->assign(frames * c.in_ch, 0.0);
  const auto half = static_cast<long>(c.kernel / 2);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t o = 0; o < c.out_ch; ++o) {
      const double g = dz[t * c.out_ch + o];
      if (g == 0.0) continue;
      grad.bias[o] += weight * g;
      for (std::size_t k = 0; k < c.kernel; ++k) {
        const long src = static_cast<long>(t) + static_cast<long>(k) - half;
        if (src < 0 || src >= static_cast<long>(frames)) continue;
        const std::size_t s = static_cast<std::size_t>(src) * c.in_ch;
        const std::size_t wo = (o * c.kernel + k) * c.in_ch;
        for (std::size_t i = 0; i < c.in_ch; ++i) {
          grad.weight[wo + i] += weight * g * in[s + i];
          if (din) (*din)[s + i] += c.weight[wo + i] * g;
        }
      }
    }
  }
}

}  // namespace

double backward(const KwsModel& m, const ForwardCache& cache, std::size_t label, KwsModel& grad, double weight,
                const DropoutMasks* masks) {
  const auto p = softmax(cache.logits);
  const double loss = -std::log(std::max(p[label], 1e-300));

  std::array<double, kNumLabels> dlogits{};
  for (std::size_t o = 0; o < kNumLabels; ++o) dlogits[o] = p[o] - (o == label ? 1.0 : 0.0);

  std::vector<double> dp2(kFlatten, 0.0);
  for (std::size_t o = 0; o < kNumLabels; ++o) {
    grad.dense.bias[o] += weight * dlogits[o];
    for (std::size_t i = 0; i < kFlatten; ++i) {
      grad.dense.weight[o * kFlatten + i] += weight * dlogits[o] * cache.p2[i];
      dp2[i] += m.dense.weight[o * kFlatten + i] * dlogits[o];
    }
  }
  if (masks) {
    for (std::size_t i = 0; i < dp2.size(); ++i) dp2[i] *= masks->after_pool2[i];
  }
  std::vector<double> dz2;
  unpool_relu(dp2, cache.arg2, cache.z2, dz2);
  std::vector<double> dp1;
  conv_backward(m.conv2, cache.p1, kPool1Frames, dz2, grad.conv2, weight, &dp1);
  if (masks) {
    for (std::size_t i = 0; i < dp1.size(); ++i) dp1[i] *= masks->after_pool1[i];
  }
  std::vector<double> dz1;
  unpool_relu(dp1, cache.arg1, cache.z1, dz1);
  conv_backward(m.conv1, cache.x0, kInputFrames, dz1, grad.conv1, weight, nullptr);
  return loss;
}

}  // namespace detail
}  // namespace edgewear::kws
