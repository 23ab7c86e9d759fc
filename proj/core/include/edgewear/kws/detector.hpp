#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "edgewear/audio/pcm.hpp"
#include "edgewear/dsp/mfcc.hpp"
#include "edgewear/kws/model.hpp"
#include "edgewear/kws/quantize.hpp"

namespace edgewear::kws {

struct DetectorConfig {
  double window_s = 1.0;
  double stride_s = 0.5;
  double threshold = 0.43;
  /// EMA weight of the newest window posterior: s = a*p + (1-a)*s.
  double smoothing = 0.5;
  double suppression_s = 1.0;

  /// Throws ConfigError unless 0 < threshold < 1, 0 < smoothing <= 1 and
  /// suppression >= stride > 0.
  void validate() const;
};

struct DetectionEvent {
  double t_start = 0.0;
  double t_end = 0.0;
  Label label = Label::heydotty;
  double score = 0.0;
};

/// Per-window trace entry, useful for plotting and debugging thresholds.
struct WindowScore {
  double t_start = 0.0;
  double posterior = 0.0;
  double smoothed = 0.0;
};

/// Sliding-window wake-word detector with EMA smoothing, refractory
/// suppression and edge-triggered re-arming. One instance per stream.
class StreamingDetector {
 public:
  using Scorer = std::function<Posterior(const dsp::FeatureMatrix&)>;

  StreamingDetector(Scorer scorer, DetectorConfig cfg = {}, dsp::FeatureConfig features = {});
  /// Scores windows with the integer pipeline. The model must outlive the detector.
  StreamingDetector(const QuantizedKwsModel& model, DetectorConfig cfg = {}, dsp::FeatureConfig features = {});

  /// Feeds 16 kHz mono samples; returns any events completed by them.
  std::vector<DetectionEvent> push(std::span<const int16_t> samples);

  /// Drops buffered audio and smoothing state; the stream clock continues
  /// from `t_s`. Used to re-arm after a query.
  void reset(double t_s);

  double time_s() const;
  const std::vector<WindowScore>& trace() const { return trace_; }
  const DetectorConfig& config() const { return cfg_; }

 private:
  Scorer scorer_;
  DetectorConfig cfg_;
  dsp::MfccExtractor mfcc_;
  std::size_t window_samples_;
  std::size_t stride_samples_;

  std::vector<int16_t> buffer_;  // samples from buffer_start_ onwards
  uint64_t buffer_start_ = 0;    // absolute sample index of buffer_[0]
  uint64_t next_window_ = 0;     // absolute index of the next window start
  uint64_t consumed_ = 0;        // absolute samples seen
  double smoothed_ = 0.0;
  bool armed_ = true;
  bool has_last_ = false;
  double last_event_t_ = 0.0;
  std::vector<WindowScore> trace_;
};

std::vector<DetectionEvent> detect_stream(const audio::PcmBuffer& audio, const DetectorConfig& cfg,
                                          const QuantizedKwsModel& model);

}  // namespace edgewear::kws
