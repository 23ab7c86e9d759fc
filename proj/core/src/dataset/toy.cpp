#include "edgewear/dataset/toy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace edgewear::dataset {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRampS = 0.012;

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::vector<Syllable> pattern(const std::vector<double>& hz, const std::vector<double>& dur,
                              const std::vector<double>& gaps, double pitch, double rate) {
  std::vector<Syllable> out;
  for (std::size_t i = 0; i < hz.size(); ++i) {
    out.push_back({hz[i] * pitch, dur[i] * rate, i < gaps.size() ? gaps[i] * rate : 0.0});
  }
  return out;
}

audio::PcmBuffer from_real(const std::vector<double>& x, int rate) {
  audio::PcmBuffer pcm;
  pcm.sample_rate_hz = rate;
  pcm.samples.reserve(x.size());
  for (double v : x) pcm.samples.push_back(audio::clamp_to_i16(v * 32767.0));
  return pcm;
}

}  // namespace

audio::PcmBuffer render_syllables(const std::vector<Syllable>& syllables, double amplitude, int rate) {
  std::vector<double> x;
  for (const auto& s : syllables) {
    const auto n = static_cast<std::size_t>(std::lround(s.duration_s * rate));
    const double ramp = std::min(kRampS * rate, n / 2.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate;
      double env = 1.0;
      if (i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * i / ramp);
      if (n - i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * (n - i) / ramp);
      const double v = std::sin(kTwoPi * s.hz * t) + 0.5 * std::sin(kTwoPi * 2 * s.hz * t) +
                       0.25 * std::sin(kTwoPi * 3 * s.hz * t);
      x.push_back(amplitude * env * v / 1.75);
    }
    x.resize(x.size() + static_cast<std::size_t>(std::lround(s.gap_after_s * rate)), 0.0);
  }
  return from_real(x, rate);
}

audio::PcmBuffer synth_utterance(Label label, std::mt19937_64& rng) {
  const double amp = uniform(rng, 0.1, 0.5);
  switch (label) {
    case Label::heydotty:
    case Label::confuse: {
      const double pitch = uniform(rng, 0.92, 1.08);
      const double rate = uniform(rng, 0.85, 1.38);
      const std::vector<double> hz = label == Label::heydotty ? std::vector<double>{520, 880, 1320}
                                                              : std::vector<double>{520, 660, 990};
      return render_syllables(pattern(hz, {0.26, 0.18, 0.20}, {0.04, 0.03}, pitch, rate), amp);
    }
    case Label::unknown: {
      const int n = std::uniform_int_distribution<int>(1, 4)(rng);
      std::vector<Syllable> syl;
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        Syllable s{uniform(rng, 180.0, 2400.0), uniform(rng, 0.08, 0.3), uniform(rng, 0.0, 0.08)};
        if (total + s.duration_s + s.gap_after_s > 1.0) break;
        total += s.duration_s + s.gap_after_s;
        syl.push_back(s);
      }
      if (syl.empty()) syl.push_back({uniform(rng, 180.0, 2400.0), 0.2, 0.0});
      return render_syllables(syl, amp);
    }
    case Label::noise:
      break;
  }
  const bool brown = std::bernoulli_distribution(0.5)(rng);
  return synth_noise(1.0, uniform(rng, -50.0, -20.0), brown, rng);
}

audio::PcmBuffer synth_noise(double seconds, double level_dbfs, bool brown, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(std::lround(seconds * audio::kCanonicalRateHz));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(n);
  double state = 0.0;
  for (auto& v : x) {
    if (brown) {
      state = 0.98 * state + gauss(rng);
      v = state;
    } else {
      v = gauss(rng);
    }
  }
  double p = 0.0;
  for (double v : x) p += v * v;
  const double current = n ? std::sqrt(p / static_cast<double>(n)) : 1.0;
  const double target = std::pow(10.0, level_dbfs / 20.0);
  for (auto& v : x) v *= current > 0 ? target / current : 0.0;
  return from_real(x, audio::kCanonicalRateHz);
}

audio::PcmBuffer synth_sine(double hz, double seconds, double amplitude, int rate) {
  const auto n = static_cast<std::size_t>(std::lround(seconds * rate));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amplitude * std::sin(kTwoPi * hz * static_cast<double>(i) / rate);
  return from_real(x, rate);
}

audio::PcmBuffer synth_query(double hz, double seconds, double amplitude) {
  const int rate = audio::kCanonicalRateHz;
  const auto n = static_cast<std::size_t>(std::lround(seconds * rate));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double env = 0.75 + 0.25 * std::sin(kTwoPi * 4.0 * t);
    x[i] = amplitude * env *
           (std::sin(kTwoPi * hz * t) + 0.3 * std::sin(kTwoPi * 2 * hz * t) + 0.1 * std::sin(kTwoPi * 3 * hz * t)) /
           1.4;
  }
  return from_real(x, rate);
}

std::vector<LabeledClip> make_toy_corpus(const ToyCorpusConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<LabeledClip> clips;
  for (Label l : kws::kAllLabels) {
    for (std::size_t i = 0; i < cfg.per_class; ++i) {
      clips.push_back({synth_utterance(l, rng), l, "toy:" + std::string(kws::label_name(l)) + "/" + std::to_string(i)});
    }
  }
  return clips;
}

audio::PcmBuffer place_in_window(const audio::PcmBuffer& clip, long offset, const audio::PcmBuffer& background) {
  audio::PcmBuffer out = background;
  const auto n = static_cast<long>(out.samples.size());
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    const long dst = offset + static_cast<long>(i);
    if (dst < 0 || dst >= n) continue;
    const int v = out.samples[static_cast<std::size_t>(dst)] + clip.samples[i];
    out.samples[static_cast<std::size_t>(dst)] = static_cast<int16_t>(std::clamp(v, -32768, 32767));
  }
  return out;
}

kws::FeatureDataset windowed_feature_dataset(const std::vector<LabeledClip>& clips, const WindowingConfig& cfg,
                                             const dsp::FeatureConfig& features) {
  dsp::MfccExtractor mfcc(features);
  const auto window = static_cast<long>(features.window_samples());
  std::mt19937_64 rng(cfg.seed);
  kws::FeatureDataset out;
  for (const auto& clip : clips) {
    for (std::size_t v = 0; v < cfg.variants_per_clip; ++v) {
      const auto bg = synth_noise(features.window_len_ms / 1000.0,
                                  uniform(rng, cfg.background_lo_dbfs, cfg.background_hi_dbfs), false, rng);
      const auto len = static_cast<long>(clip.pcm.samples.size());
      long lo = 0, hi = std::max(0L, window - len);
      if (clip.label == Label::heydotty || clip.label == Label::confuse) {
        const auto cut = static_cast<long>(cfg.max_cut_fraction * static_cast<double>(len));
        lo = -cut;
        hi = window - len + cut;
      }
      const long offset = std::uniform_int_distribution<long>(lo, std::max(lo, hi))(rng);
      out.features.push_back(mfcc.compute(place_in_window(clip.pcm, offset, bg)));
      out.labels.push_back(clip.label);
    }
  }
  return out;
}

audio::PcmBuffer make_detection_stream(double seconds, const std::vector<double>& wake_starts_s, uint64_t seed,
                                       double background_dbfs) {
  std::mt19937_64 rng(seed);
  auto stream = synth_noise(seconds, background_dbfs, false, rng);
  for (double t : wake_starts_s) {
    const auto clip = synth_utterance(Label::heydotty, rng);
    stream = place_in_window(clip, std::lround(t * audio::kCanonicalRateHz), stream);
  }
  return stream;
}

audio::PcmBuffer make_speech_proxy_recording(double seconds, uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto out = synth_noise(seconds, -55.0, true, rng);
  const auto total = static_cast<long>(out.samples.size());
  long at = std::lround(uniform(rng, 0.1, 0.5) * audio::kCanonicalRateHz);
  while (at < total) {
    audio::PcmBuffer piece;
    const int kind = std::uniform_int_distribution<int>(0, 3)(rng);
    if (kind == 0) {
      piece = synth_query(uniform(rng, 250.0, 1200.0), uniform(rng, 0.8, 2.5), uniform(rng, 0.1, 0.4));
    } else {
      piece = synth_utterance(kind == 1 ? Label::heydotty : Label::unknown, rng);
    }
    out = place_in_window(piece, at, out);
    at += static_cast<long>(piece.samples.size()) + std::lround(uniform(rng, 0.1, 0.8) * audio::kCanonicalRateHz);
  }
  return out;
}

}  // namespace edgewear::dataset
