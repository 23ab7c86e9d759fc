#pragma once

// Scalar reference for the wake-word network, written from the topology
// description with channel-major nested vectors:
//   x[c][t] -> conv k3 same (13->8) -> relu -> maxpool2 -> conv k3 same (8->16)
//   -> relu -> maxpool2 -> flatten time-major -> dense 192->4.
// The integer replay evaluates the INT8 pipeline in double arithmetic.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "edgewear/kws/model.hpp"
#include "edgewear/kws/quantize.hpp"

namespace oracle {

using Grid = std::vector<std::vector<double>>;  // [channel][time]

inline Grid conv_same(const Grid& x, std::size_t out_ch, std::size_t k, const std::vector<double>& w,
                      const std::vector<double>& b) {
  const std::size_t in_ch = x.size();
  const std::size_t T = x[0].size();
  Grid y(out_ch, std::vector<double>(T, 0.0));
  for (std::size_t o = 0; o < out_ch; ++o) {
    for (std::size_t t = 0; t < T; ++t) {
      double s = b[o];
      for (std::size_t j = 0; j < k; ++j) {
        const long src = static_cast<long>(t + j) - static_cast<long>(k / 2);
        if (src < 0 || src >= static_cast<long>(T)) continue;
        for (std::size_t i = 0; i < in_ch; ++i) s += w[(o * k + j) * in_ch + i] * x[i][static_cast<std::size_t>(src)];
      }
      y[o][t] = s;
    }
  }
  return y;
}

inline Grid relu_pool(const Grid& z) {
  Grid p(z.size(), std::vector<double>(z[0].size() / 2));
  for (std::size_t c = 0; c < z.size(); ++c)
    for (std::size_t t = 0; t < p[c].size(); ++t) p[c][t] = std::max({0.0, z[c][2 * t], z[c][2 * t + 1]});
  return p;
}

inline std::array<double, 4> float_logits(const edgewear::kws::KwsModel& m, const edgewear::dsp::FeatureMatrix& f) {
  Grid x(13, std::vector<double>(49));
  for (std::size_t c = 0; c < 13; ++c)
    for (std::size_t t = 0; t < 49; ++t) x[c][t] = (f.at(t, c) - m.norm.mean[c]) * m.norm.inv_std[c];
  const Grid p1 = relu_pool(conv_same(x, 8, 3, m.conv1.weight, m.conv1.bias));
  const Grid p2 = relu_pool(conv_same(p1, 16, 3, m.conv2.weight, m.conv2.bias));
  std::array<double, 4> out{};
  for (std::size_t o = 0; o < 4; ++o) {
    double s = m.dense.bias[o];
    for (std::size_t t = 0; t < 12; ++t)
      for (std::size_t c = 0; c < 16; ++c) s += m.dense.weight[o * 192 + t * 16 + c] * p2[c][t];
    out[o] = s;
  }
  return out;
}

// round-half-up(acc * m0 / 2^shift) without integer shifts.
inline double requant(double acc, const edgewear::kws::FixedMultiplier& m) {
  return std::floor(acc * m.m0 / std::ldexp(1.0, m.shift) + 0.5);
}

inline Grid qconv_relu_pool(const Grid& x, double in_zp, const edgewear::kws::QConv1d& c) {
  const std::size_t T = x[0].size();
  Grid z(c.out_ch, std::vector<double>(T));
  for (std::size_t o = 0; o < c.out_ch; ++o) {
    for (std::size_t t = 0; t < T; ++t) {
      double acc = c.bias[o];
      for (std::size_t j = 0; j < c.kernel; ++j) {
        const long src = static_cast<long>(t + j) - static_cast<long>(c.kernel / 2);
        if (src < 0 || src >= static_cast<long>(T)) continue;
        for (std::size_t i = 0; i < c.in_ch; ++i)
          acc += (x[i][static_cast<std::size_t>(src)] - in_zp) * c.weight[(o * c.kernel + j) * c.in_ch + i];
      }
      const double v = requant(acc, c.requant) + c.output.zero_point;
      z[o][t] = std::clamp(v, std::max(-128.0, double(c.output.zero_point)), 127.0);
    }
  }
  Grid p(c.out_ch, std::vector<double>(T / 2));
  for (std::size_t o = 0; o < c.out_ch; ++o)
    for (std::size_t t = 0; t < T / 2; ++t) p[o][t] = std::max(z[o][2 * t], z[o][2 * t + 1]);
  return p;
}

inline std::array<int, 4> int8_logits(const edgewear::kws::QuantizedKwsModel& m, const edgewear::dsp::FeatureMatrix& f) {
  Grid x(13, std::vector<double>(49));
  for (std::size_t c = 0; c < 13; ++c) {
    for (std::size_t t = 0; t < 49; ++t) {
      const double v = (f.at(t, c) - m.norm.mean[c]) * m.norm.inv_std[c];
      // round half away from zero, as lround does
      const double r = v / m.input.scale;
      const double q = (r < 0 ? -std::floor(-r + 0.5) : std::floor(r + 0.5)) + m.input.zero_point;
      x[c][t] = std::clamp(q, -128.0, 127.0);
    }
  }
  const Grid p1 = qconv_relu_pool(x, m.input.zero_point, m.conv1);
  const Grid p2 = qconv_relu_pool(p1, m.conv1.output.zero_point, m.conv2);
  std::array<int, 4> out{};
  for (std::size_t o = 0; o < 4; ++o) {
    double acc = m.dense.bias[o];
    for (std::size_t t = 0; t < 12; ++t)
      for (std::size_t c = 0; c < 16; ++c)
        acc += (p2[c][t] - m.conv2.output.zero_point) * m.dense.weight[o * 192 + t * 16 + c];
    out[o] = static_cast<int>(std::clamp(requant(acc, m.dense.requant) + m.dense.output.zero_point, -128.0, 127.0));
  }
  return out;
}

}  // namespace oracle
