#pragma once

#include <complex>
#include <span>
#include <vector>

namespace edgewear::dsp {

/// In-place iterative radix-2 FFT. `data.size()` must be a power of two.
void fft_inplace(std::span<std::complex<double>> data);

/// |X[k]|^2 for k in [0, n/2] of a real frame zero-padded to `n_fft`.
std::vector<double> power_spectrum(std::span<const double> frame, std::size_t n_fft);

}  // namespace edgewear::dsp
