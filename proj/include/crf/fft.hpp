#pragma once

#include <complex>
#include <span>
#include <vector>

namespace crf {

/// DFT of arbitrary length (radix-2 in place when the size is a power of
/// two, Bluestein's chirp-z otherwise). Forward transform uses the
/// engineering sign convention e^{-i 2 pi k n / N}.
std::vector<std::complex<double>> dft(std::span<const std::complex<double>> x,
                                      bool inverse = false);

std::vector<std::complex<double>> dft_real(std::span<const double> x);

/// One-sided power spectral density of a real segment (rectangular window).
/// Bin k sits at k * fs / N Hz; psd[k] integrates so that
/// sum_k psd[k] * (fs / N) equals the mean squared value of the segment.
std::vector<double> power_spectral_density(std::span<const double> x,
                                           double sample_rate);

}  // namespace crf
