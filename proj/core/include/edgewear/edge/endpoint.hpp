#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "edgewear/audio/pcm.hpp"

namespace edgewear::edge {

struct EndpointConfig {
  /// Hop energy below this (dBFS RMS) counts as silence.
  double threshold_dbfs = -40.0;
  double hangover_ms = 700.0;
  double hop_ms = 20.0;
  int sample_rate_hz = 16000;

  void validate() const;
};

struct EndpointEvent {
  /// Boundary time relative to the first pushed sample.
  double t_ms = 0.0;
  /// No hop ever exceeded the threshold.
  bool empty = true;
  double speech_start_ms = 0.0;
  double speech_end_ms = 0.0;
};

/// Trailing-silence endpointer. Fires once per utterance, when silence has
/// lasted `hangover_ms` (counted from the start of the stream if no speech
/// was seen). Call reset() before the next utterance.
class EndpointDetector {
 public:
  explicit EndpointDetector(EndpointConfig cfg = {});

  std::optional<EndpointEvent> push(std::span<const int16_t> samples);
  void reset();
  bool fired() const { return fired_; }
  double elapsed_ms() const;
  /// [first, last) speech hop span so far, in ms.
  std::optional<std::pair<double, double>> speech_span_ms() const;
  const EndpointConfig& config() const { return cfg_; }

 private:
  EndpointConfig cfg_;
  std::size_t hop_samples_;
  std::vector<int16_t> partial_;
  uint64_t hops_ = 0;
  std::optional<uint64_t> first_speech_hop_;
  std::optional<uint64_t> last_speech_hop_;
  bool fired_ = false;
};

/// Runs the detector over a whole buffer.
std::optional<EndpointEvent> endpoint_detect(const audio::PcmBuffer& pcm, const EndpointConfig& cfg = {});

}  // namespace edgewear::edge
