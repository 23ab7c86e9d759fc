#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "edgewear/audio/pcm.hpp"

namespace edgewear::dsp {

/// MFCC frontend parameters. Defaults produce the 49x13 wake-word grid.
struct FeatureConfig {
  int n_mfcc = 13;
  double frame_len_ms = 25.0;
  double frame_stride_ms = 20.0;
  int n_mel_filters = 32;
  double pre_emphasis = 0.98;
  double window_len_ms = 1000.0;
  int sample_rate_hz = 16000;
  double log_floor = 1e-10;
  std::size_t n_fft = 512;
  double low_hz = 0.0;
  double high_hz = 0.0;  // 0 means Nyquist

  std::size_t frame_len_samples() const;
  std::size_t stride_samples() const;
  std::size_t window_samples() const;
  /// floor((window - frame_len) / stride) + 1
  std::size_t frames_per_window() const;
  double upper_hz() const { return high_hz > 0.0 ? high_hz : sample_rate_hz / 2.0; }

  /// Throws ConfigError when the invariants do not hold.
  void validate() const;
};

/// Row-major [frames x coefficients] feature grid.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const float> row(std::size_t r) const { return std::span<const float>(values).subspan(r * cols, cols); }
  std::size_t size() const { return values.size(); }
};

/// y[0] = x[0], y[n] = x[n] - alpha * x[n-1]. alpha must lie in [0, 1).
std::vector<double> pre_emphasize(std::span<const double> x, double alpha);
std::vector<double> pre_emphasize(const audio::PcmBuffer& x, double alpha);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular mel filters over the one-sided power spectrum bins.
struct MelFilterbank {
  std::size_t n_filters = 0;
  std::size_t n_bins = 0;
  std::vector<double> weights;  // row-major [n_filters x n_bins]
  std::vector<double> center_hz;

  double weight(std::size_t filter, std::size_t bin) const { return weights[filter * n_bins + bin]; }
};

MelFilterbank mel_filterbank(const FeatureConfig& cfg);

/// Stateless MFCC extractor holding the precomputed window/filterbank/DCT.
class MfccExtractor {
 public:
  explicit MfccExtractor(FeatureConfig cfg = {});

  /// One window of audio -> frames x n_mfcc features. Shorter input is
  /// zero-padded to the window length, longer input is truncated.
  /// Throws InputError on sample-rate or channel mismatch.
  FeatureMatrix compute(const audio::PcmBuffer& pcm) const;
  FeatureMatrix compute(std::span<const int16_t> samples) const;

  const FeatureConfig& config() const { return cfg_; }
  const MelFilterbank& filterbank() const { return bank_; }

 private:
  FeatureConfig cfg_;
  MelFilterbank bank_;
  std::vector<double> window_;
  std::vector<double> dct_;  // [n_mfcc x n_mel]
};

FeatureMatrix mfcc_window(const audio::PcmBuffer& pcm, const FeatureConfig& cfg = {});

/// Golden-dump format: row-major CSV, 6 decimal digits.
void write_feature_csv(const FeatureMatrix& features, std::ostream& out);

}  // namespace edgewear::dsp
