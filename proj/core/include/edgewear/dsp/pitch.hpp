#pragma once

#include "edgewear/audio/pcm.hpp"

namespace edgewear::dsp {

/// Frequency of the strongest spectral peak in [min_hz, max_hz], from the
/// average power spectrum of 4096-point Hann frames with parabolic peak
/// interpolation. Returns 0 for silent or empty input.
double dominant_frequency_hz(const audio::PcmBuffer& pcm, double min_hz = 80.0, double max_hz = 4000.0);

}  // namespace edgewear::dsp
