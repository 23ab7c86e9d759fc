#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "edgewear/dataset/corpus.hpp"
#include "edgewear/dsp/mfcc.hpp"
#include "edgewear/kws/train.hpp"

namespace edgewear::dataset {

// Synthetic stand-ins for recorded speech. A "syllable" is a harmonic tone
// (fundamental plus two overtones) under a raised-cosine envelope. The wake
// word is three syllables; the confuser shares the first one only.

struct Syllable {
  double hz = 0.0;
  double duration_s = 0.0;
  double gap_after_s = 0.0;
};

audio::PcmBuffer render_syllables(const std::vector<Syllable>& syllables, double amplitude, int rate = 16000);

/// One utterance of the given class. heydotty / confuse last 0.6-1.0 s.
audio::PcmBuffer synth_utterance(Label label, std::mt19937_64& rng);

/// White (or, with `brown`, integrated) noise at an RMS level in dBFS.
audio::PcmBuffer synth_noise(double seconds, double level_dbfs, bool brown, std::mt19937_64& rng);

/// Pure sine, useful for codec and frontend tests.
audio::PcmBuffer synth_sine(double hz, double seconds, double amplitude, int rate = 16000);

/// Steady "speech proxy" for query audio: harmonic tone at `hz` with a slow
/// syllabic amplitude modulation that never drops to silence.
audio::PcmBuffer synth_query(double hz, double seconds, double amplitude = 0.3);

struct ToyCorpusConfig {
  std::size_t per_class = 60;
  uint64_t seed = 1;
};

/// Balanced 4-class corpus of raw utterances (noise clips are 1 s).
std::vector<LabeledClip> make_toy_corpus(const ToyCorpusConfig& cfg = {});

struct WindowingConfig {
  std::size_t variants_per_clip = 2;
  /// Largest fraction of a wake word / confuser that may fall outside the
  /// window, mirroring what a 500 ms stride sees.
  double max_cut_fraction = 0.3;
  double background_lo_dbfs = -70.0;
  double background_hi_dbfs = -50.0;
  uint64_t seed = 11;
};

/// Places `clip` at `offset` samples inside a window of `window` samples
/// (negative offsets cut the head) over `background`.
audio::PcmBuffer place_in_window(const audio::PcmBuffer& clip, long offset, const audio::PcmBuffer& background);

/// Turns utterances into 1 s training windows and their MFCCs.
kws::FeatureDataset windowed_feature_dataset(const std::vector<LabeledClip>& clips, const WindowingConfig& cfg = {},
                                             const dsp::FeatureConfig& features = {});

/// A continuous recording: background noise with wake words at the given
/// start times. Used for detector fixtures.
audio::PcmBuffer make_detection_stream(double seconds, const std::vector<double>& wake_starts_s, uint64_t seed,
                                       double background_dbfs = -60.0);

/// Mixed speech-proxy recording (utterances, queries and pauses).
audio::PcmBuffer make_speech_proxy_recording(double seconds, uint64_t seed);

}  // namespace edgewear::dataset
