#include "edgewear/dataset/augment.hpp"

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "edgewear/error.hpp"

namespace edgewear::dataset {

namespace {

void check(const Range& r, const char* name) {
  if (r.lo > r.hi) throw ConfigError(std::string("augment: inverted range for ") + name);
}

double draw(std::mt19937_64& rng, const Range& r) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

Range range_from(const nlohmann::json& j, const char* key, Range fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2) throw ConfigError(std::string("augment spec: '") + key + "' must be [lo, hi]");
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

void AugmentSpec::validate() const {
  check(gain_db, "gain_db");
  if (noise_snr_db) check(*noise_snr_db, "noise_snr_db");
  check(time_shift_ms, "time_shift_ms");
  check(positive_duration_s, "positive_duration_s");
}

AugmentSpec parse_augment_spec(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("augment spec: ") + e.what());
  }
  AugmentSpec s;
  s.gain_db = range_from(j, "gain_db", s.gain_db);
  if (j.contains("noise_snr_db")) s.noise_snr_db = range_from(j, "noise_snr_db", {});
  s.time_shift_ms = range_from(j, "time_shift_ms", s.time_shift_ms);
  s.positive_duration_s = range_from(j, "positive_duration_s", s.positive_duration_s);
  s.validate();
  return s;
}

double rms(const audio::PcmBuffer& pcm) {
  if (pcm.samples.empty()) return 0.0;
  double acc = 0.0;
  for (int16_t s : pcm.samples) acc += static_cast<double>(s) * s;
  return std::sqrt(acc / static_cast<double>(pcm.samples.size()));
}

double measured_snr_db(const audio::PcmBuffer& clean, const audio::PcmBuffer& noisy) {
  const std::size_t n = std::min(clean.samples.size(), noisy.samples.size());
  double ps = 0.0, pn = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = clean.samples[i];
    const double d = static_cast<double>(noisy.samples[i]) - c;
    ps += c * c;
    pn += d * d;
  }
  if (pn == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ps / pn);
}

std::vector<LabeledClip> augment(const LabeledClip& clip, const AugmentSpec& spec, std::size_t n, uint64_t seed) {
  spec.validate();
  if (clip.duration_s() > spec.max_clip_s + 1e-9) {
    throw InputError("augment: clip longer than the " + std::to_string(spec.max_clip_s) + " s window");
  }
  std::vector<LabeledClip> out;
  out.reserve(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int rate = clip.pcm.sample_rate_hz;

  for (std::size_t v = 0; v < n; ++v) {
    const double shift_ms = draw(rng, spec.time_shift_ms);
    const double gain_db = draw(rng, spec.gain_db);
    const double snr_db = spec.noise_snr_db ? draw(rng, *spec.noise_snr_db) : 0.0;

    // Shift: positive delays the clip (zero-fill at the front), negative
    // advances it; length is preserved.
    const auto len = clip.pcm.samples.size();
    const long shift = std::lround(shift_ms * rate / 1000.0);
    std::vector<double> x(len, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
      const long src = static_cast<long>(i) - shift;
      if (src >= 0 && src < static_cast<long>(len)) x[i] = clip.pcm.samples[static_cast<std::size_t>(src)];
    }
    const double g = std::pow(10.0, gain_db / 20.0);
    for (auto& s : x) s *= g;

    if (clip.label == Label::heydotty) {
      const auto lo = static_cast<std::size_t>(std::lround(spec.positive_duration_s.lo * rate));
      const auto hi = static_cast<std::size_t>(std::lround(spec.positive_duration_s.hi * rate));
      if (x.size() < lo) x.resize(lo, 0.0);
      if (x.size() > hi) x.resize(hi);
    }

    if (spec.noise_snr_db) {
      std::vector<double> noise(x.size());
      double pn = 0.0, ps = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        noise[i] = gauss(rng);
        pn += noise[i] * noise[i];
        ps += x[i] * x[i];
      }
      if (pn > 0.0 && ps > 0.0) {
        const double scale = std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += scale * noise[i];
      }
    }

    LabeledClip variant;
    variant.label = clip.label;
    variant.source_path = clip.source_path + "#aug" + std::to_string(v);
    variant.pcm.sample_rate_hz = rate;
    variant.pcm.samples.reserve(x.size());
    for (double s : x) variant.pcm.samples.push_back(audio::clamp_to_i16(s));
    out.push_back(std::move(variant));
  }
  return out;
}

}  // namespace edgewear::dataset
