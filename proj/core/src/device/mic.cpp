#include "edgewear/device/mic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "edgewear/error.hpp"

namespace edgewear::device {

audio::PcmBuffer mic_source(const MicTimeline& timeline) {
  audio::PcmBuffer out;
  const double rate = audio::kCanonicalRateHz;
  for (std::size_t i = 0; i < timeline.entries.size(); ++i) {
    const auto& e = timeline.entries[i];
    const std::string where = "mic[" + std::to_string(i) + "]" + (e.name.empty() ? "" : " (" + e.name + ")");
    if (e.at_s) {
      if (*e.at_s < 0.0) throw ConfigError(where + ": negative start");
      const auto start = static_cast<std::size_t>(std::llround(*e.at_s * rate));
      if (start < out.samples.size()) throw ConfigError(where + ": overlaps the previous entry");
      out.samples.resize(start, 0);
    }
    if (e.kind == MicEntry::Kind::silence) {
      if (!(e.duration_s >= 0.0)) throw ConfigError(where + ": negative silence");
      out.samples.resize(out.samples.size() + static_cast<std::size_t>(std::llround(e.duration_s * rate)), 0);
      continue;
    }
    if (e.clip.sample_rate_hz != audio::kCanonicalRateHz || e.clip.channels != 1) {
      throw ConfigError(where + ": clip must be 16 kHz mono");
    }
    out.samples.insert(out.samples.end(), e.clip.samples.begin(), e.clip.samples.end());
  }
  if (timeline.noise_floor_dbfs && !out.samples.empty()) {
    std::mt19937_64 rng(timeline.seed);
    std::normal_distribution<double> gauss(0.0, std::pow(10.0, *timeline.noise_floor_dbfs / 20.0) * 32767.0);
    for (auto& s : out.samples) s = audio::clamp_to_i16(s + gauss(rng));
  }
  return out;
}

}  // namespace edgewear::device
