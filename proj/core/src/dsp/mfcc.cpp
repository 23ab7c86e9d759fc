#include "edgewear/dsp/mfcc.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "edgewear/dsp/fft.hpp"
#include "edgewear/error.hpp"

namespace edgewear::dsp {

std::size_t FeatureConfig::frame_len_samples() const {
  return static_cast<std::size_t>(std::lround(frame_len_ms * sample_rate_hz / 1000.0));
}
std::size_t FeatureConfig::stride_samples() const {
  return static_cast<std::size_t>(std::lround(frame_stride_ms * sample_rate_hz / 1000.0));
}
std::size_t FeatureConfig::window_samples() const {
  return static_cast<std::size_t>(std::lround(window_len_ms * sample_rate_hz / 1000.0));
}
std::size_t FeatureConfig::frames_per_window() const {
  const auto win = window_samples();
  const auto len = frame_len_samples();
  if (win < len) return 0;
  return (win - len) / stride_samples() + 1;
}

void FeatureConfig::validate() const {
  if (sample_rate_hz <= 0) throw ConfigError("feature config: sample rate must be positive");
  if (n_mfcc <= 0 || n_mel_filters <= 0) throw ConfigError("feature config: coefficient counts must be positive");
  if (n_mel_filters < n_mfcc) {
    throw ConfigError("feature config: n_mel_filters (" + std::to_string(n_mel_filters) + ") < n_mfcc (" +
                      std::to_string(n_mfcc) + ")");
  }
  if (stride_samples() == 0 || frame_len_samples() < stride_samples()) {
    throw ConfigError("feature config: need frame_len >= stride > 0");
  }
  if (frame_len_samples() > n_fft) throw ConfigError("feature config: frame longer than FFT size");
  if (!(pre_emphasis >= 0.0 && pre_emphasis < 1.0)) throw ConfigError("feature config: pre_emphasis must be in [0, 1)");
  if (!(log_floor > 0.0)) throw ConfigError("feature config: log_floor must be positive");
  if (upper_hz() > sample_rate_hz / 2.0 || low_hz < 0.0 || low_hz >= upper_hz()) {
    throw ConfigError("feature config: mel band edges out of range");
  }
}

std::vector<double> pre_emphasize(std::span<const double> x, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("pre_emphasize: alpha must be in [0, 1)");
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0];
  for (std::size_t n = 1; n < x.size(); ++n) y[n] = x[n] - alpha * x[n - 1];
  return y;
}

std::vector<double> pre_emphasize(const audio::PcmBuffer& x, double alpha) {
  std::vector<double> v(x.samples.begin(), x.samples.end());
  return pre_emphasize(v, alpha);
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank mel_filterbank(const FeatureConfig& cfg) {
  cfg.validate();
  MelFilterbank bank;
  bank.n_filters = static_cast<std::size_t>(cfg.n_mel_filters);
  bank.n_bins = cfg.n_fft / 2 + 1;
  bank.weights.assign(bank.n_filters * bank.n_bins, 0.0);

  const double mel_lo = hz_to_mel(cfg.low_hz);
  const double mel_hi = hz_to_mel(cfg.upper_hz());
  std::vector<double> edges(bank.n_filters + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(bank.n_filters + 1));
  }
  const double bin_hz = static_cast<double>(cfg.sample_rate_hz) / static_cast<double>(cfg.n_fft);
  for (std::size_t m = 0; m < bank.n_filters; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    bank.center_hz.push_back(center);
    for (std::size_t k = 0; k < bank.n_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      bank.weights[m * bank.n_bins + k] = w;
    }
  }
  return bank;
}

MfccExtractor::MfccExtractor(FeatureConfig cfg) : cfg_(cfg), bank_(mel_filterbank(cfg_)) {
  const std::size_t len = cfg_.frame_len_samples();
  window_.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    window_[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len - 1));
  }
  const auto n_mel = static_cast<std::size_t>(cfg_.n_mel_filters);
  const auto n_mfcc = static_cast<std::size_t>(cfg_.n_mfcc);
  dct_.resize(n_mfcc * n_mel);
  for (std::size_t k = 0; k < n_mfcc; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n_mel));
    for (std::size_t m = 0; m < n_mel; ++m) {
      dct_[k * n_mel + m] =
          scale * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(m) + 1.0) /
                           (2.0 * static_cast<double>(n_mel)));
    }
  }
}

FeatureMatrix MfccExtractor::compute(const audio::PcmBuffer& pcm) const {
  if (pcm.sample_rate_hz != cfg_.sample_rate_hz) {
    throw InputError("mfcc: expected " + std::to_string(cfg_.sample_rate_hz) + " Hz input, got " +
                     std::to_string(pcm.sample_rate_hz));
  }
  if (pcm.channels != 1) throw InputError("mfcc: mono input required");
  return compute(std::span<const int16_t>(pcm.samples));
}

FeatureMatrix MfccExtractor::compute(std::span<const int16_t> samples) const {
  const std::size_t win = cfg_.window_samples();
  std::vector<double> x(win, 0.0);
  for (std::size_t i = 0; i < std::min(win, samples.size()); ++i) x[i] = samples[i] / 32768.0;
  const auto y = pre_emphasize(x, cfg_.pre_emphasis);

  const std::size_t len = cfg_.frame_len_samples();
  const std::size_t stride = cfg_.stride_samples();
  const auto n_mel = static_cast<std::size_t>(cfg_.n_mel_filters);
  const auto n_mfcc = static_cast<std::size_t>(cfg_.n_mfcc);

  FeatureMatrix out;
  out.rows = cfg_.frames_per_window();
  out.cols = n_mfcc;
  out.values.resize(out.rows * out.cols);

  std::vector<double> frame(len);
  std::vector<double> log_mel(n_mel);
  for (std::size_t r = 0; r < out.rows; ++r) {
    for (std::size_t i = 0; i < len; ++i) frame[i] = y[r * stride + i] * window_[i];
    const auto power = power_spectrum(frame, cfg_.n_fft);
    for (std::size_t m = 0; m < n_mel; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < bank_.n_bins; ++k) e += bank_.weights[m * bank_.n_bins + k] * power[k];
      log_mel[m] = std::log(e + cfg_.log_floor);
    }
    for (std::size_t k = 0; k < n_mfcc; ++k) {
      double c = 0.0;
      for (std::size_t m = 0; m < n_mel; ++m) c += dct_[k * n_mel + m] * log_mel[m];
      out.values[r * n_mfcc + k] = static_cast<float>(c);
    }
  }
  return out;
}

FeatureMatrix mfcc_window(const audio::PcmBuffer& pcm, const FeatureConfig& cfg) { return MfccExtractor(cfg).compute(pcm); }

void write_feature_csv(const FeatureMatrix& features, std::ostream& out) {
  char buf[32];
  for (std::size_t r = 0; r < features.rows; ++r) {
    for (std::size_t c = 0; c < features.cols; ++c) {
      std::snprintf(buf, sizeof buf, "%.6f", static_cast<double>(features.at(r, c)));
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace edgewear::dsp
