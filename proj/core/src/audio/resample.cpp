#include "edgewear/audio/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "edgewear/error.hpp"

namespace edgewear::audio {
namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Blackman window on [-1, 1].
double blackman(double u) {
  if (u <= -1.0 || u >= 1.0) return 0.0;
  const double x = std::numbers::pi * (u + 1.0);  // 0..2pi
  return 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x);
}

}  // namespace

PcmBuffer resample(const PcmBuffer& pcm, int target_hz) {
  if (pcm.sample_rate_hz <= 0 || target_hz <= 0) {
    throw ConfigError("resample: rates must be positive (source " + std::to_string(pcm.sample_rate_hz) +
                      ", target " + std::to_string(target_hz) + ")");
  }
  if (pcm.channels != 1) throw InputError("resample: mono input required");
  if (pcm.sample_rate_hz == target_hz) return pcm;

  const double ratio = static_cast<double>(target_hz) / pcm.sample_rate_hz;
  const double cutoff = std::min(1.0, ratio);
  const double support = kResampleHalfTaps / cutoff;  // in input samples
  const auto n_in = static_cast<long>(pcm.samples.size());
  const auto n_out = static_cast<long>(std::llround(static_cast<double>(n_in) * ratio));

  PcmBuffer out;
  out.sample_rate_hz = target_hz;
  out.samples.resize(static_cast<std::size_t>(n_out));
  for (long n = 0; n < n_out; ++n) {
    const double t = static_cast<double>(n) / ratio;
    const long lo = static_cast<long>(std::ceil(t - support));
    const long hi = static_cast<long>(std::floor(t + support));
    double acc = 0.0;
    double norm = 0.0;
    for (long k = std::max(lo, 0L); k <= std::min(hi, n_in - 1); ++k) {
      const double d = t - static_cast<double>(k);
      const double w = cutoff * sinc(cutoff * d) * blackman(d / support);
      acc += w * pcm.samples[static_cast<std::size_t>(k)];
      norm += w;
    }
    out.samples[static_cast<std::size_t>(n)] = clamp_to_i16(norm > 1e-9 ? acc / norm : 0.0);
  }
  return out;
}

}  // namespace edgewear::audio
