#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgewear/dataset/corpus.hpp"

namespace edgewear::dataset {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct AugmentSpec {
  Range gain_db{0.0, 0.0};
  /// White-noise mix at an SNR drawn from this range; unset means no noise.
  std::optional<Range> noise_snr_db;
  Range time_shift_ms{0.0, 0.0};
  /// Positives are padded/trimmed into this duration window.
  Range positive_duration_s{0.6, 1.0};
  double max_clip_s = 1.0;

  /// Throws ConfigError on inverted ranges.
  void validate() const;
};

AugmentSpec parse_augment_spec(const std::string& json_text);

/// Produces `n` variants (shift, then gain, then noise). Deterministic in
/// `seed`; every variant keeps the clip's label and sample rate.
std::vector<LabeledClip> augment(const LabeledClip& clip, const AugmentSpec& spec, std::size_t n, uint64_t seed);

double rms(const audio::PcmBuffer& pcm);
/// 10*log10(P(clean) / P(noisy - clean)).
double measured_snr_db(const audio::PcmBuffer& clean, const audio::PcmBuffer& noisy);

}  // namespace edgewear::dataset
