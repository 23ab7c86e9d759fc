#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgewear/audio/pcm.hpp"

namespace edgewear::device {

struct MicEntry {
  enum class Kind : uint8_t { silence, clip };
  Kind kind = Kind::silence;
  double duration_s = 0.0;  // silence only
  audio::PcmBuffer clip;    // clip only
  /// Absolute start; omitted entries follow the previous one.
  std::optional<double> at_s;
  std::string name;
};

struct MicTimeline {
  std::vector<MicEntry> entries;
  /// Optional white-noise floor mixed under the whole stream.
  std::optional<double> noise_floor_dbfs;
  uint64_t seed = 1;
};

/// Concatenates the timeline into one 16 kHz mono stream. Gaps left by
/// absolute starts are zero-filled. Throws ConfigError when an entry starts
/// before the previous one ends or a clip is not 16 kHz mono.
audio::PcmBuffer mic_source(const MicTimeline& timeline);

}  // namespace edgewear::device
