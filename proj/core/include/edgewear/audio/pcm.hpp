#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace edgewear::audio {

inline constexpr int kCanonicalRateHz = 16000;
inline constexpr std::size_t kChunkSamples = 320;  // 20 ms at 16 kHz

/// Interleaved signed 16-bit PCM. Pipeline-internal buffers are always mono.
struct PcmBuffer {
  std::vector<int16_t> samples;
  int sample_rate_hz = kCanonicalRateHz;
  int channels = 1;

  std::size_t frames() const { return channels > 0 ? samples.size() / static_cast<std::size_t>(channels) : 0; }
  double duration_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(frames()) / sample_rate_hz : 0.0;
  }
  bool empty() const { return samples.empty(); }

  bool operator==(const PcmBuffer&) const = default;
};

/// Saturating conversion from a real-valued sample.
inline int16_t clamp_to_i16(double v) {
  if (v >= 32767.0) return 32767;
  if (v <= -32768.0) return -32768;
  return static_cast<int16_t>(v < 0 ? v - 0.5 : v + 0.5);
}

}  // namespace edgewear::audio
