#include "edgewear/kws/detector.hpp"

#include <cmath>

#include "edgewear/error.hpp"

namespace edgewear::kws {

void DetectorConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("detector: threshold must be in (0, 1)");
  if (!(smoothing > 0.0 && smoothing <= 1.0)) throw ConfigError("detector: smoothing must be in (0, 1]");
  if (!(window_s > 0.0 && stride_s > 0.0)) throw ConfigError("detector: window and stride must be positive");
  if (suppression_s < stride_s) throw ConfigError("detector: suppression must be >= stride");
}

StreamingDetector::StreamingDetector(Scorer scorer, DetectorConfig cfg, dsp::FeatureConfig features)
    : scorer_(std::move(scorer)), cfg_(cfg), mfcc_(features) {
  cfg_.validate();
  const double rate = features.sample_rate_hz;
  window_samples_ = static_cast<std::size_t>(std::lround(cfg_.window_s * rate));
  stride_samples_ = static_cast<std::size_t>(std::lround(cfg_.stride_s * rate));
}

StreamingDetector::StreamingDetector(const QuantizedKwsModel& model, DetectorConfig cfg, dsp::FeatureConfig features)
    : StreamingDetector([&model](const dsp::FeatureMatrix& f) { return forward_int8(model, f); }, cfg, features) {}

double StreamingDetector::time_s() const {
  return static_cast<double>(consumed_) / mfcc_.config().sample_rate_hz;
}

void StreamingDetector::reset(double t_s) {
  const auto at = static_cast<uint64_t>(std::llround(t_s * mfcc_.config().sample_rate_hz));
  buffer_.clear();
  buffer_start_ = at;
  next_window_ = at;
  consumed_ = at;
  smoothed_ = 0.0;
  armed_ = true;
}

std::vector<DetectionEvent> StreamingDetector::push(std::span<const int16_t> samples) {
  std::vector<DetectionEvent> events;
  buffer_.insert(buffer_.end(), samples.begin(), samples.end());
  consumed_ += samples.size();
  const double rate = mfcc_.config().sample_rate_hz;

  while (next_window_ + window_samples_ <= consumed_) {
    const std::size_t offset = static_cast<std::size_t>(next_window_ - buffer_start_);
    const auto window = std::span<const int16_t>(buffer_).subspan(offset, window_samples_);
    const auto posterior = scorer_(mfcc_.compute(window));
    const double p = posterior[index_of(Label::heydotty)];
    smoothed_ = cfg_.smoothing * p + (1.0 - cfg_.smoothing) * smoothed_;
    const double t = static_cast<double>(next_window_) / rate;
    trace_.push_back({t, p, smoothed_});

    const bool suppressed = has_last_ && (t - last_event_t_) < cfg_.suppression_s - 1e-9;
    if (smoothed_ >= cfg_.threshold) {
      if (armed_ && !suppressed) {
        events.push_back({t, t + cfg_.window_s, Label::heydotty, smoothed_});
        last_event_t_ = t;
        has_last_ = true;
        armed_ = false;
      }
    } else if (!suppressed) {
      armed_ = true;
    }
    next_window_ += stride_samples_;
  }

  // Keep only what the next window still needs.
  if (next_window_ > buffer_start_) {
    const auto drop = static_cast<std::size_t>(std::min<uint64_t>(next_window_ - buffer_start_, buffer_.size()));
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(drop));
    buffer_start_ += drop;
  }
  return events;
}

std::vector<DetectionEvent> detect_stream(const audio::PcmBuffer& audio, const DetectorConfig& cfg,
                                          const QuantizedKwsModel& model) {
  if (audio.channels != 1 || audio.sample_rate_hz != audio::kCanonicalRateHz) {
    throw InputError("detect_stream: 16 kHz mono audio required");
  }
  StreamingDetector det(model, cfg);
  return det.push(audio.samples);
}

}  // namespace edgewear::kws
