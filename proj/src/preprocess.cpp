#include "crf/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "crf/error.hpp"
#include "crf/fft.hpp"

namespace crf {

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;
};

Biquad design_lowpass(double sample_rate, double cutoff_hz) {
  if (!(sample_rate > 0)) fail(ErrorKind::InvalidConfig, "sample_rate must be positive");
  if (!(cutoff_hz > 0) || cutoff_hz >= sample_rate / 2.0)
    fail(ErrorKind::InvalidConfig, "cutoff must lie in (0, Nyquist)");
  const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate);
  const double sqrt2 = std::numbers::sqrt2;
  const double norm = 1.0 / (1.0 + sqrt2 * k + k * k);
  Biquad q;
  q.b0 = k * k * norm;
  q.b1 = 2.0 * q.b0;
  q.b2 = q.b0;
  q.a1 = 2.0 * (k * k - 1.0) * norm;
  q.a2 = (1.0 - sqrt2 * k + k * k) * norm;
  return q;
}

std::vector<double> apply_causal(const Biquad& q, std::span<const double> x) {
  std::vector<double> y(x.size());
  double z1 = 0.0, z2 = 0.0;  // transposed direct form II, zero initial state
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double xn = x[n];
    if (!std::isfinite(xn)) fail(ErrorKind::DataError, "non-finite sample");
    const double yn = q.b0 * xn + z1;
    z1 = q.b1 * xn - q.a1 * yn + z2;
    z2 = q.b2 * xn - q.a2 * yn;
    y[n] = yn;
  }
  return y;
}

}  // namespace

std::vector<double> butterworth_lowpass(std::span<const double> samples,
                                        double sample_rate, double cutoff_hz) {
  if (samples.empty()) fail(ErrorKind::DataError, "empty sample sequence");
  return apply_causal(design_lowpass(sample_rate, cutoff_hz), samples);
}

std::vector<double> butterworth_lowpass_zero_phase(std::span<const double> samples,
                                                   double sample_rate,
                                                   double cutoff_hz) {
  if (samples.empty()) fail(ErrorKind::DataError, "empty sample sequence");
  const auto q = design_lowpass(sample_rate, cutoff_hz);
  auto fwd = apply_causal(q, samples);
  std::reverse(fwd.begin(), fwd.end());
  auto back = apply_causal(q, fwd);
  std::reverse(back.begin(), back.end());
  return back;
}

double band_power(std::span<const double> samples, double sample_rate,
                  const BandHz& band, std::size_t start, std::size_t end) {
  if (start >= end || end > samples.size())
    fail(ErrorKind::DegenerateWindow, "window out of bounds or empty");
  if (!(band.lo < band.hi) || band.hi >= sample_rate / 2.0)
    fail(ErrorKind::InvalidConfig, "band must satisfy lo < hi < Nyquist");

  const std::size_t n = end - start;
  const auto psd = power_spectral_density(samples.subspan(start, n), sample_rate);
  const double df = sample_rate / static_cast<double>(n);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < psd.size(); ++k) {
    const double f = df * static_cast<double>(k);
    if (f >= band.lo && f <= band.hi) {
      total += psd[k];
      ++count;
    }
  }
  if (count == 0)
    fail(ErrorKind::DegenerateWindow, "band contains no FFT bin for this window");
  return total / static_cast<double>(count);
}

double snr_response(std::span<const Trial> trials_at_contrast,
                    double sample_rate, const BandHz& band, RelWindow stimulus,
                    RelWindow baseline) {
  if (trials_at_contrast.empty()) fail(ErrorKind::DataError, "no trials");
  double stim_sum = 0.0, base_sum = 0.0;
  for (const auto& trial : trials_at_contrast) {
    const auto resolve = [&](const RelWindow& w) -> std::pair<std::size_t, std::size_t> {
      const auto onset = static_cast<std::ptrdiff_t>(trial.onset_index);
      const std::ptrdiff_t lo = onset + w.begin;
      const std::ptrdiff_t hi = onset + w.end;
      if (lo < 0 || hi <= lo ||
          hi > static_cast<std::ptrdiff_t>(trial.samples.size()))
        fail(ErrorKind::DegenerateWindow, "window outside trial bounds");
      return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
    };
    const auto [slo, shi] = resolve(stimulus);
    const auto [blo, bhi] = resolve(baseline);
    stim_sum += band_power(trial.samples, sample_rate, band, slo, shi);
    base_sum += band_power(trial.samples, sample_rate, band, blo, bhi);
  }
  const double n = static_cast<double>(trials_at_contrast.size());
  const double base_mean = base_sum / n;
  if (base_mean == 0.0)
    fail(ErrorKind::DegenerateBaseline, "baseline band power is zero");
  return (stim_sum / n) / base_mean;
}

TuningCurve build_tuning_curve(const RawRecording& rec,
                               const PreprocessConfig& config) {
  if (!(rec.sample_rate > 2.0 * config.band.hi))
    fail(ErrorKind::InvalidConfig, "sample_rate must exceed twice the band top");
  if (config.contrast_grid.size() != 8)
    fail(ErrorKind::InvalidConfig, "contrast grid must hold 8 levels");

  const double fs = rec.sample_rate;
  const auto ms_to_samples = [&](double ms) {
    return static_cast<std::ptrdiff_t>(std::llround(ms * fs / 1000.0));
  };
  const RelWindow stim{ms_to_samples(config.stimulus_start_ms),
                       ms_to_samples(config.stimulus_start_ms + config.stimulus_len_ms)};
  const RelWindow base{-ms_to_samples(config.baseline_len_ms), 0};

  TuningCurve curve;
  curve.site_id = rec.site_id;
  for (const double contrast : config.contrast_grid) {
    std::vector<Trial> filtered;
    for (const auto& trial : rec.trials) {
      if (std::fabs(trial.contrast - contrast) > 1e-9) continue;
      Trial ft = trial;
      ft.samples = config.zero_phase
                       ? butterworth_lowpass_zero_phase(trial.samples, fs,
                                                        config.cutoff_hz)
                       : butterworth_lowpass(trial.samples, fs, config.cutoff_hz);
      filtered.push_back(std::move(ft));
    }
    if (filtered.empty())
      fail(ErrorKind::IncompleteRecording,
           rec.site_id + ": no trials at contrast " + std::to_string(contrast));
    CurvePoint pt;
    pt.contrast = contrast;
    pt.response = snr_response(filtered, fs, config.band, stim, base);
    pt.n_trials = static_cast<int>(filtered.size());
    curve.points.push_back(pt);
  }
  return curve;
}

StationarityReport stationarity_flag(std::span<const double> samples,
                                     int n_segments) {
  if (n_segments < 2) fail(ErrorKind::InvalidConfig, "need at least 2 segments");
  StationarityReport rep;
  rep.n_segments = n_segments;
  const std::size_t seg_len = samples.size() / static_cast<std::size_t>(n_segments);
  if (seg_len < 2) return rep;  // too short to judge; advisory pass

  std::vector<double> means(n_segments), vars(n_segments);
  for (int i = 0; i < n_segments; ++i) {
    const auto seg = samples.subspan(static_cast<std::size_t>(i) * seg_len, seg_len);
    double m = 0.0;
    for (double v : seg) m += v;
    m /= static_cast<double>(seg_len);
    double var = 0.0;
    for (double v : seg) var += (v - m) * (v - m);
    var /= static_cast<double>(seg_len - 1);
    means[i] = m;
    vars[i] = var;
  }
  double grand = 0.0, pooled_var = 0.0;
  for (int i = 0; i < n_segments; ++i) {
    grand += means[i];
    pooled_var += vars[i];
  }
  grand /= n_segments;
  pooled_var /= n_segments;
  const double se = std::sqrt(pooled_var / static_cast<double>(seg_len));

  double max_z = 0.0;
  for (int i = 0; i < n_segments; ++i) {
    const double z = se > 0 ? std::fabs(means[i] - grand) / se : 0.0;
    max_z = std::max(max_z, z);
  }
  double vmax = *std::max_element(vars.begin(), vars.end());
  double vmin = *std::min_element(vars.begin(), vars.end());
  rep.max_mean_z = max_z;
  rep.var_ratio = vmax == 0.0 ? 1.0 : (vmin == 0.0 ? std::numeric_limits<double>::infinity()
                                                   : vmax / vmin);
  rep.stationary = max_z <= 3.0 && rep.var_ratio <= 4.0;
  return rep;
}

SiteStationarity site_stationarity(const RawRecording& rec, int n_segments) {
  SiteStationarity s;
  for (const auto& trial : rec.trials) {
    s.n_trials += 1;
    if (!stationarity_flag(trial.samples, n_segments).stationary) s.n_flagged += 1;
  }
  return s;
}

}  // namespace crf
