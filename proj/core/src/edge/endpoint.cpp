#include "edgewear/edge/endpoint.hpp"

#include <cmath>
#include <vector>

#include "edgewear/error.hpp"

namespace edgewear::edge {

void EndpointConfig::validate() const {
  if (!(hop_ms > 0.0)) throw ConfigError("endpoint.hop_ms: must be > 0");
  if (!(hangover_ms >= hop_ms)) throw ConfigError("endpoint.hangover_ms: must be >= hop_ms");
  if (sample_rate_hz <= 0) throw ConfigError("endpoint.sample_rate_hz: must be > 0");
  if (!(threshold_dbfs <= 0.0)) throw ConfigError("endpoint.threshold_dbfs: must be <= 0");
}

EndpointDetector::EndpointDetector(EndpointConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  hop_samples_ = static_cast<std::size_t>(std::llround(cfg_.hop_ms * cfg_.sample_rate_hz / 1000.0));
}

void EndpointDetector::reset() {
  partial_.clear();
  hops_ = 0;
  first_speech_hop_.reset();
  last_speech_hop_.reset();
  fired_ = false;
}

std::optional<std::pair<double, double>> EndpointDetector::speech_span_ms() const {
  if (!first_speech_hop_) return std::nullopt;
  return std::pair{static_cast<double>(*first_speech_hop_) * cfg_.hop_ms,
                   static_cast<double>(*last_speech_hop_ + 1) * cfg_.hop_ms};
}

double EndpointDetector::elapsed_ms() const { return static_cast<double>(hops_) * cfg_.hop_ms; }

std::optional<EndpointEvent> EndpointDetector::push(std::span<const int16_t> samples) {
  std::optional<EndpointEvent> out;
  const double threshold = std::pow(10.0, cfg_.threshold_dbfs / 20.0);
  const auto hangover_hops = static_cast<uint64_t>(std::llround(cfg_.hangover_ms / cfg_.hop_ms));
  for (int16_t s : samples) {
    if (fired_) break;
    partial_.push_back(s);
    if (partial_.size() < hop_samples_) continue;
    double p = 0.0;
    for (int16_t v : partial_) p += (v / 32768.0) * (v / 32768.0);
    partial_.clear();
    const bool speech = std::sqrt(p / static_cast<double>(hop_samples_)) >= threshold;
    if (speech) {
      if (!first_speech_hop_) first_speech_hop_ = hops_;
      last_speech_hop_ = hops_;
    }
    ++hops_;
    const uint64_t silent_since = last_speech_hop_ ? *last_speech_hop_ + 1 : 0;
    if (hops_ - silent_since >= hangover_hops) {
      fired_ = true;
      EndpointEvent e;
      e.t_ms = elapsed_ms();
      e.empty = !first_speech_hop_;
      if (first_speech_hop_) {
        e.speech_start_ms = static_cast<double>(*first_speech_hop_) * cfg_.hop_ms;
        e.speech_end_ms = static_cast<double>(*last_speech_hop_ + 1) * cfg_.hop_ms;
      }
      out = e;
    }
  }
  return out;
}

std::optional<EndpointEvent> endpoint_detect(const audio::PcmBuffer& pcm, const EndpointConfig& cfg) {
  EndpointConfig c = cfg;
  c.sample_rate_hz = pcm.sample_rate_hz;
  EndpointDetector det(c);
  return det.push(pcm.samples);
}

}  // namespace edgewear::edge
