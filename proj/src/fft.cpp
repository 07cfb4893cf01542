#include "crf/fft.hpp"

#include <cmath>
#include <numbers>

#include "crf/error.hpp"

namespace crf {

namespace {

bool is_pow2(std::size_t n) { return n && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2 * std::numbers::pi / static_cast<double>(len) *
                       (inverse ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
}

// Bluestein: exact DFT of arbitrary length via convolution with a chirp.
std::vector<std::complex<double>> bluestein(
    std::span<const std::complex<double>> x, bool inverse) {
  const std::size_t n = x.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<std::complex<double>> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the phase argument small
    const std::size_t k2 = (k * k) % (2 * n);
    const double ang = sign * std::numbers::pi * static_cast<double>(k2) /
                       static_cast<double>(n);
    chirp[k] = {std::cos(ang), std::sin(ang)};
  }
  const std::size_t m = next_pow2(2 * n - 1);
  std::vector<std::complex<double>> a(m), b(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  for (std::size_t k = 0; k < n; ++k) {
    b[k] = std::conj(chirp[k]);
    if (k) b[m - k] = std::conj(chirp[k]);
  }
  fft_pow2(a, false);
  fft_pow2(b, false);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  fft_pow2(a, true);
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
  if (inverse) {
    for (auto& v : out) v /= static_cast<double>(n);
  }
  return out;
}

}  // namespace

std::vector<std::complex<double>> dft(std::span<const std::complex<double>> x,
                                      bool inverse) {
  if (x.empty()) fail(ErrorKind::DegenerateWindow, "empty input to dft");
  if (is_pow2(x.size())) {
    std::vector<std::complex<double>> a(x.begin(), x.end());
    fft_pow2(a, inverse);
    return a;
  }
  return bluestein(x, inverse);
}

std::vector<std::complex<double>> dft_real(std::span<const double> x) {
  std::vector<std::complex<double>> cx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) cx[i] = {x[i], 0.0};
  return dft(cx);
}

std::vector<double> power_spectral_density(std::span<const double> x,
                                           double sample_rate) {
  if (x.empty()) fail(ErrorKind::DegenerateWindow, "empty segment");
  if (sample_rate <= 0) fail(ErrorKind::InvalidConfig, "sample_rate must be positive");
  for (double v : x) {
    if (!std::isfinite(v)) fail(ErrorKind::DataError, "non-finite sample");
  }
  const std::size_t n = x.size();
  const auto spec = dft_real(x);
  const std::size_t half = n / 2;
  std::vector<double> psd(half + 1, 0.0);
  const double scale = 1.0 / (static_cast<double>(n) * sample_rate);
  for (std::size_t k = 0; k <= half; ++k) {
    double p = std::norm(spec[k]) * scale;
    const bool is_dc = (k == 0);
    const bool is_nyquist = (n % 2 == 0 && k == half);
    if (!is_dc && !is_nyquist) p *= 2.0;
    psd[k] = p;
  }
  return psd;
}

}  // namespace crf
