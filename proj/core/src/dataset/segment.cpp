#include "edgewear/dataset/segment.hpp"

#include <algorithm>
#include <cmath>

#include "edgewear/error.hpp"

namespace edgewear::dataset {

namespace {
constexpr double kSilenceDb = -120.0;
}

std::vector<double> hop_energy_db(const audio::PcmBuffer& pcm, std::size_t hop_samples) {
  std::vector<double> out;
  if (hop_samples == 0) throw ConfigError("segment: hop must be positive");
  for (std::size_t at = 0; at < pcm.samples.size(); at += hop_samples) {
    const std::size_t end = std::min(pcm.samples.size(), at + hop_samples);
    double e = 0.0;
    for (std::size_t i = at; i < end; ++i) {
      const double v = pcm.samples[i] / 32768.0;
      e += v * v;
    }
    e /= static_cast<double>(end - at);
    out.push_back(e > 0.0 ? std::max(kSilenceDb, 10.0 * std::log10(e)) : kSilenceDb);
  }
  return out;
}

std::vector<Segment> segment(const audio::PcmBuffer& pcm, const SegmentConfig& cfg) {
  if (pcm.channels != 1) throw InputError("segment: mono input required");
  const double rate = pcm.sample_rate_hz;
  const auto hop = static_cast<std::size_t>(std::lround(cfg.hop_ms * rate / 1000.0));
  const auto energy = hop_energy_db(pcm, hop);
  if (energy.empty()) return {};

  double threshold;
  if (cfg.energy_threshold_db) {
    threshold = *cfg.energy_threshold_db;
  } else {
    auto sorted = energy;
    const auto k = static_cast<std::size_t>(std::floor(cfg.percentile * static_cast<double>(sorted.size() - 1)));
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
    threshold = sorted[k] + cfg.relative_db;
  }

  const double duration = pcm.duration_s();
  const double hop_s = static_cast<double>(hop) / rate;
  const double pad = cfg.pad_ms / 1000.0;
  std::vector<Segment> raw;
  for (std::size_t i = 0; i < energy.size();) {
    if (energy[i] <= threshold) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < energy.size() && energy[j] > threshold) ++j;
    raw.push_back({std::max(0.0, static_cast<double>(i) * hop_s - pad),
                   std::min(duration, static_cast<double>(j) * hop_s + pad)});
    i = j;
  }

  std::vector<Segment> merged;
  const double min_gap = cfg.min_gap_ms / 1000.0;
  for (const auto& s : raw) {
    if (!merged.empty() && s.t_start - merged.back().t_end < min_gap) {
      merged.back().t_end = std::max(merged.back().t_end, s.t_end);
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

audio::PcmBuffer slice(const audio::PcmBuffer& pcm, const Segment& seg) {
  audio::PcmBuffer out;
  out.sample_rate_hz = pcm.sample_rate_hz;
  const auto n = pcm.samples.size();
  const auto a = std::min(n, static_cast<std::size_t>(std::lround(std::max(0.0, seg.t_start) * pcm.sample_rate_hz)));
  const auto b = std::min(n, static_cast<std::size_t>(std::lround(std::max(0.0, seg.t_end) * pcm.sample_rate_hz)));
  if (b > a) out.samples.assign(pcm.samples.begin() + static_cast<std::ptrdiff_t>(a),
                                pcm.samples.begin() + static_cast<std::ptrdiff_t>(b));
  return out;
}

}  // namespace edgewear::dataset
