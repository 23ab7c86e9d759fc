#include "edgewear/kws/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edgewear/error.hpp"
#include "network.hpp"

namespace edgewear::kws {

FixedMultiplier quantize_multiplier(double real) {
  if (!(real > 0.0) || !std::isfinite(real)) return {0, 0};
  int exp = 0;
  const double frac = std::frexp(real, &exp);  // real = frac * 2^exp, frac in [0.5, 1)
  auto m0 = static_cast<int64_t>(std::llround(frac * (1 << 15)));
  int shift = 15 - exp;
  if (m0 == (1 << 15)) {
    m0 /= 2;
    --shift;
  }
  return {static_cast<int32_t>(m0), shift};
}

int32_t apply_multiplier(int32_t acc, const FixedMultiplier& m) {
  const int64_t prod = static_cast<int64_t>(acc) * m.m0;
  int64_t r;
  if (m.shift > 0) {
    r = (prod + (int64_t{1} << (m.shift - 1))) >> m.shift;
  } else {
    r = prod * (int64_t{1} << (-m.shift));
  }
  return static_cast<int32_t>(std::clamp<int64_t>(r, std::numeric_limits<int32_t>::min(),
                                                  std::numeric_limits<int32_t>::max()));
}

QuantParams choose_activation_params(double lo, double hi) {
  lo = std::min(lo, 0.0);
  hi = std::max(hi, 0.0);
  QuantParams p;
  p.scale = std::max((hi - lo) / 255.0, kMinQuantScale);
  p.zero_point = static_cast<int32_t>(std::clamp<long>(std::lround(-128.0 - lo / p.scale), -128, 127));
  return p;
}

QuantParams choose_weight_params(std::span<const double> weights) {
  double maxabs = 0.0;
  for (double w : weights) maxabs = std::max(maxabs, std::abs(w));
  return {std::max(maxabs / 127.0, kMinQuantScale), 0};
}

int8_t quantize_value(double v, const QuantParams& p) {
  const long q = std::lround(v / p.scale) + p.zero_point;
  return static_cast<int8_t>(std::clamp<long>(q, -128, 127));
}

std::vector<double> dequantize(std::span<const int8_t> q, const QuantParams& p) {
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) out[i] = p.scale * (static_cast<int32_t>(q[i]) - p.zero_point);
  return out;
}

CalibrationRanges calibrate(const KwsModel& model, std::span<const dsp::FeatureMatrix> calibration) {
  CalibrationRanges r;
  detail::ForwardCache cache;
  bool first = true;
  for (const auto& f : calibration) {
    check_feature_shape(f);
    detail::forward(model, f, cache);
    const auto [in_lo, in_hi] = std::minmax_element(cache.x0.begin(), cache.x0.end());
    const auto c1 = *std::max_element(cache.z1.begin(), cache.z1.end());
    const auto c2 = *std::max_element(cache.z2.begin(), cache.z2.end());
    const auto [lg_lo, lg_hi] = std::minmax_element(cache.logits.begin(), cache.logits.end());
    if (first) {
      r = {*in_lo, *in_hi, c1, c2, *lg_lo, *lg_hi};
      first = false;
    } else {
      r.input_lo = std::min(r.input_lo, *in_lo);
      r.input_hi = std::max(r.input_hi, *in_hi);
      r.conv1_hi = std::max(r.conv1_hi, c1);
      r.conv2_hi = std::max(r.conv2_hi, c2);
      r.logits_lo = std::min(r.logits_lo, *lg_lo);
      r.logits_hi = std::max(r.logits_hi, *lg_hi);
    }
  }
  // Post-ReLU tensors never go below zero.
  r.conv1_hi = std::max(r.conv1_hi, 0.0);
  r.conv2_hi = std::max(r.conv2_hi, 0.0);
  return r;
}

namespace {

std::vector<int8_t> quantize_weights(std::span<const double> w, const QuantParams& p) {
  std::vector<int8_t> q(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    q[i] = static_cast<int8_t>(std::clamp<long>(std::lround(w[i] / p.scale), -127, 127));
  }
  return q;
}

std::vector<int32_t> quantize_bias(std::span<const double> b, double scale) {
  std::vector<int32_t> q(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double v = std::round(b[i] / scale);
    q[i] = static_cast<int32_t>(std::clamp(v, -2147483648.0, 2147483647.0));
  }
  return q;
}

QConv1d quantize_conv(const Conv1d& c, const QuantParams& in, const QuantParams& out) {
  QConv1d q;
  q.in_ch = c.in_ch;
  q.out_ch = c.out_ch;
  q.kernel = c.kernel;
  q.weight_params = choose_weight_params(c.weight);
  q.weight = quantize_weights(c.weight, q.weight_params);
  q.bias = quantize_bias(c.bias, in.scale * q.weight_params.scale);
  q.output = out;
  q.requant = quantize_multiplier(in.scale * q.weight_params.scale / out.scale);
  return q;
}

// Integer conv + ReLU (via the output clamp) + maxpool(2).
std::vector<int8_t> qconv_relu_pool(const QConv1d& c, const QuantParams& in, const std::vector<int8_t>& x,
                                    std::size_t frames) {
  std::vector<int8_t> z(frames * c.out_ch);
  const auto half = static_cast<long>(c.kernel / 2);
  // ReLU: real >= 0 <=> q >= zero_point.
  const int32_t lo = std::max<int32_t>(-128, c.output.zero_point);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t o = 0; o < c.out_ch; ++o) {
      int32_t acc = c.bias[o];
      for (std::size_t k = 0; k < c.kernel; ++k) {
        const long src = static_cast<long>(t) + static_cast<long>(k) - half;
        if (src < 0 || src >= static_cast<long>(frames)) continue;
        for (std::size_t i = 0; i < c.in_ch; ++i) {
          acc += (static_cast<int32_t>(x[static_cast<std::size_t>(src) * c.in_ch + i]) - in.zero_point) *
                 static_cast<int32_t>(c.weight[(o * c.kernel + k) * c.in_ch + i]);
        }
      }
      const int32_t v = apply_multiplier(acc, c.requant) + c.output.zero_point;
      z[t * c.out_ch + o] = static_cast<int8_t>(std::clamp<int32_t>(v, lo, 127));
    }
  }
  const std::size_t pooled = frames / 2;
  std::vector<int8_t> out(pooled * c.out_ch);
  for (std::size_t t = 0; t < pooled; ++t) {
    for (std::size_t o = 0; o < c.out_ch; ++o) {
      out[t * c.out_ch + o] = std::max(z[(2 * t) * c.out_ch + o], z[(2 * t + 1) * c.out_ch + o]);
    }
  }
  return out;
}

}  // namespace

QuantizedKwsModel quantize_int8(const KwsModel& model, std::span<const dsp::FeatureMatrix> calibration) {
  if (calibration.empty()) throw ConfigError("quantize_int8: calibration set is empty");
  const auto ranges = calibrate(model, calibration);

  QuantizedKwsModel q;
  q.norm = model.norm;
  q.input = choose_activation_params(ranges.input_lo, ranges.input_hi);
  const auto a1 = choose_activation_params(0.0, ranges.conv1_hi);
  const auto a2 = choose_activation_params(0.0, ranges.conv2_hi);
  const auto logits = choose_activation_params(ranges.logits_lo, ranges.logits_hi);

  q.conv1 = quantize_conv(model.conv1, q.input, a1);
  q.conv2 = quantize_conv(model.conv2, a1, a2);

  q.dense.in = model.dense.in;
  q.dense.out = model.dense.out;
  q.dense.weight_params = choose_weight_params(model.dense.weight);
  q.dense.weight = quantize_weights(model.dense.weight, q.dense.weight_params);
  q.dense.bias = quantize_bias(model.dense.bias, a2.scale * q.dense.weight_params.scale);
  q.dense.output = logits;
  q.dense.requant = quantize_multiplier(a2.scale * q.dense.weight_params.scale / logits.scale);
  return q;
}

std::vector<int8_t> quantize_input(const QuantizedKwsModel& model, const dsp::FeatureMatrix& features) {
  check_feature_shape(features);
  std::vector<int8_t> x(kInputFrames * kInputCoeffs);
  for (std::size_t t = 0; t < kInputFrames; ++t) {
    for (std::size_t c = 0; c < kInputCoeffs; ++c) {
      x[t * kInputCoeffs + c] = quantize_value(model.norm.apply(c, features.at(t, c)), model.input);
    }
  }
  return x;
}

std::array<int8_t, kNumLabels> forward_int8_logits(const QuantizedKwsModel& model, const dsp::FeatureMatrix& features) {
  const auto x = quantize_input(model, features);
  const auto p1 = qconv_relu_pool(model.conv1, model.input, x, kInputFrames);
  const auto p2 = qconv_relu_pool(model.conv2, model.conv1.output, p1, kPool1Frames);
  std::array<int8_t, kNumLabels> out{};
  const auto& d = model.dense;
  const int32_t in_zp = model.conv2.output.zero_point;
  for (std::size_t o = 0; o < d.out; ++o) {
    int32_t acc = d.bias[o];
    for (std::size_t i = 0; i < d.in; ++i) {
      acc += (static_cast<int32_t>(p2[i]) - in_zp) * static_cast<int32_t>(d.weight[o * d.in + i]);
    }
    const int32_t v = apply_multiplier(acc, d.requant) + d.output.zero_point;
    out[o] = static_cast<int8_t>(std::clamp<int32_t>(v, -128, 127));
  }
  return out;
}

Posterior forward_int8(const QuantizedKwsModel& model, const dsp::FeatureMatrix& features) {
  const auto q = forward_int8_logits(model, features);
  std::array<double, kNumLabels> logits{};
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    logits[i] = model.dense.output.scale * (static_cast<int32_t>(q[i]) - model.dense.output.zero_point);
  }
  return softmax(logits);
}

}  // namespace edgewear::kws
