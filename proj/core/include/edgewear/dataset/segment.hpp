#pragma once

#include <optional>
#include <vector>

#include "edgewear/audio/pcm.hpp"

namespace edgewear::dataset {

struct Segment {
  double t_start = 0.0;
  double t_end = 0.0;

  bool operator==(const Segment&) const = default;
};

struct SegmentConfig {
  double hop_ms = 20.0;
  double pad_ms = 100.0;
  double min_gap_ms = 200.0;
  /// Absolute short-time energy threshold in dBFS. When unset, the
  /// threshold is `relative_db` above the recording's 10th-percentile hop
  /// energy.
  std::optional<double> energy_threshold_db;
  double relative_db = 6.0;
  double percentile = 0.10;
};

/// Short-time energy in dBFS over non-overlapping hops.
std::vector<double> hop_energy_db(const audio::PcmBuffer& pcm, std::size_t hop_samples);

/// Finds energy spikes in a continuous recording: maximal above-threshold
/// runs, padded on both sides, merged when closer than min_gap. Output is
/// sorted, disjoint and clipped to [0, duration].
std::vector<Segment> segment(const audio::PcmBuffer& pcm, const SegmentConfig& cfg = {});

/// Copies [t_start, t_end) out of `pcm`.
audio::PcmBuffer slice(const audio::PcmBuffer& pcm, const Segment& seg);

}  // namespace edgewear::dataset
