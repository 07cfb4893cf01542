#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crf/types.hpp"

namespace crf {

struct BandHz {
  double lo = 30.0;
  double hi = 90.0;
};

struct PreprocessConfig {
  std::vector<double> contrast_grid = {0.0, 0.02, 0.04, 0.09,
                                       0.19, 0.38, 0.57, 0.76};
  double cutoff_hz = 100.0;
  bool zero_phase = false;  // causal single pass by default
  BandHz band;
  double stimulus_start_ms = 0.0;   // relative to onset
  double stimulus_len_ms = 2000.0;
  double baseline_len_ms = 200.0;   // window is [-baseline_len, 0) before onset
  int stationarity_segments = 4;
};

/// Second-order Butterworth low-pass (bilinear transform with frequency
/// prewarping), applied causally from zero initial state.
std::vector<double> butterworth_lowpass(std::span<const double> samples,
                                        double sample_rate, double cutoff_hz);

/// Forward-backward variant (zero phase, squared magnitude response).
std::vector<double> butterworth_lowpass_zero_phase(std::span<const double> samples,
                                                   double sample_rate,
                                                   double cutoff_hz);

/// Mean one-sided PSD over the DFT bins of samples[start, end) whose center
/// frequency f satisfies band.lo <= f <= band.hi (inclusive both ends).
double band_power(std::span<const double> samples, double sample_rate,
                  const BandHz& band, std::size_t start, std::size_t end);

/// Sample window relative to a trial's stimulus onset.
struct RelWindow {
  std::ptrdiff_t begin = 0;  // offset from onset_index, may be negative
  std::ptrdiff_t end = 0;    // exclusive
};

/// SNR response: (mean over trials of stimulus-window band power) /
/// (mean over trials of baseline-window band power).
double snr_response(std::span<const Trial> trials_at_contrast,
                    double sample_rate, const BandHz& band, RelWindow stimulus,
                    RelWindow baseline);

TuningCurve build_tuning_curve(const RawRecording& rec,
                               const PreprocessConfig& config);

struct StationarityReport {
  bool stationary = true;
  double max_mean_z = 0.0;    // worst segment-mean deviation in pooled SEs
  double var_ratio = 1.0;     // max/min segment variance
  int n_segments = 0;
};

/// Heuristic weak-stationarity check. Advisory only.
StationarityReport stationarity_flag(std::span<const double> samples,
                                     int n_segments);

/// Fraction of a recording's trials flagged nonstationary.
struct SiteStationarity {
  int n_trials = 0;
  int n_flagged = 0;
};

SiteStationarity site_stationarity(const RawRecording& rec, int n_segments);

}  // namespace crf
