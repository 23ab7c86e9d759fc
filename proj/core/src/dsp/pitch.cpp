#include "edgewear/dsp/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "edgewear/dsp/fft.hpp"

namespace edgewear::dsp {

double dominant_frequency_hz(const audio::PcmBuffer& pcm, double min_hz, double max_hz) {
  constexpr std::size_t kN = 4096;
  const auto& x = pcm.samples;
  if (x.empty()) return 0.0;
  std::vector<double> window(kN);
  for (std::size_t i = 0; i < kN; ++i) window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (kN - 1));

  std::vector<double> avg(kN / 2 + 1, 0.0);
  std::vector<double> frame(kN);
  for (std::size_t start = 0; start == 0 || start + kN <= x.size(); start += kN / 2) {
    for (std::size_t i = 0; i < kN; ++i) {
      frame[i] = start + i < x.size() ? x[start + i] / 32768.0 * window[i] : 0.0;
    }
    const auto p = power_spectrum(frame, kN);
    for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += p[k];
  }
  const double bin_hz = static_cast<double>(pcm.sample_rate_hz) / kN;
  const auto lo = static_cast<std::size_t>(std::max(1.0, std::ceil(min_hz / bin_hz)));
  const auto hi = std::min(avg.size() - 2, static_cast<std::size_t>(max_hz / bin_hz));
  std::size_t best = lo;
  for (std::size_t k = lo; k <= hi; ++k) {
    if (avg[k] > avg[best]) best = k;
  }
  if (avg[best] <= 0.0) return 0.0;
  const double a = std::log(avg[best - 1] + 1e-30), b = std::log(avg[best] + 1e-30), c = std::log(avg[best + 1] + 1e-30);
  const double denom = a - 2.0 * b + c;
  const double delta = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
  return (static_cast<double>(best) + delta) * bin_hz;
}

}  // namespace edgewear::dsp
