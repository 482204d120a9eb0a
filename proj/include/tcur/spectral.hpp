#pragma once

#include <complex>
#include <span>
#include <vector>

#include "tcur/grid.hpp"

namespace tcur::spectral {

using Spectrum = std::vector<std::complex<double>>;

/// Real-to-complex transform of one spatial slice (FFTW r2c layout: the last
/// axis keeps n/2 + 1 modes). Unnormalized.
Spectrum forward(const PeriodicGrid& grid, std::span<const double> slice);
/// Inverse of `forward`, including the 1/n^d normalization.
void inverse(const PeriodicGrid& grid, const Spectrum& spectrum, std::span<double> out);

std::size_t spectrum_size(const PeriodicGrid& grid);
/// Signed integer wavevector of a spectrum entry.
std::array<int, kMaxDim> wavevector(const PeriodicGrid& grid, std::size_t c);
/// True when any component sits on the Nyquist frequency n/2.
bool is_nyquist(const PeriodicGrid& grid, std::size_t c);

}  // namespace tcur::spectral
