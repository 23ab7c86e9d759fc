#pragma once

#include "edgewear/audio/pcm.hpp"

namespace edgewear::audio {

/// Zero crossings of the sinc kernel on each side, measured at the lower of
/// the two rates (16 taps total).
inline constexpr int kResampleHalfTaps = 8;

/// Windowed-sinc (Blackman) rate conversion of mono PCM.
///
/// Output length is round(n * target / source); equal rates return the input
/// unchanged. Throws ConfigError for non-positive rates, InputError for
/// non-mono input.
PcmBuffer resample(const PcmBuffer& pcm, int target_hz);

}  // namespace edgewear::audio
