#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crf/optim.hpp"
#include "crf/types.hpp"

namespace crf {

/// 1 - SSE/SST. Requires >= 2 points and nonzero target variance.
double r_squared(std::span<const double> y, std::span<const double> yhat);

/// mean((y - yhat)^2) / (mean(y) * mean(yhat)). Scale-invariant, not
/// affine-invariant (unlike R^2).
double nmse(std::span<const double> y, std::span<const double> yhat);

enum class MonotonicityClass { Supersaturating, MonotoneOrSaturating };

struct MonotonicityReport {
  double mi = 0.0;
  MonotonicityClass cls = MonotonicityClass::MonotoneOrSaturating;
};

/// MI = 1 - (R_m - R_100) / (R_m - R_0); supersaturating iff MI < 1 - 1e-9.
MonotonicityReport monotonicity_index(const TuningCurve& curve);

struct FoldRecord {
  int held_out = -1;
  double prediction = 0.0;
  double target = 0.0;
  bool failed = false;
};

struct FitResult {
  KernelModel model;  // refit on all points
  double r2 = 0.0;
  double nmse_value = 0.0;
  std::vector<FoldRecord> per_fold;
  std::optional<double> c50_estimate;  // contrast units
  int failed_folds = 0;
  std::vector<std::string> warnings;
};

struct EvalConfig {
  KindConfig kind_config;
  double r2_threshold = 0.6;
  int threads = 1;
};

/// Eight-fold leave-one-out with fold-to-fold warm starts; the reported
/// model is refit on all eight points.
FitResult loocv(const TuningCurve& curve, ModelKind kind, const EvalConfig& cfg);

/// Half-maximum contrast of a fitted model. Parameter C50 for the
/// Naka-Rushton family, first half-max crossing on a dense grid otherwise.
std::optional<double> c50_estimate(const KernelModel& model);

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

/// Disjoint 156/34/34 split of a pooled 224-point set, stratified by
/// contrast level.
SplitIndices split_dataset(std::span<const DataPoint> points, std::uint64_t seed);

struct SweepPoint {
  int value = 0;  // neuron count or epoch count
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct HyperSearchRun {
  std::uint64_t seed = 0;
  std::vector<SweepPoint> neuron_sweep;
  std::vector<SweepPoint> epoch_sweep;
  int optimal_neurons = 0;
  int optimal_epochs = 0;
  bool neurons_fallback = false;
  bool epochs_fallback = false;
};

struct HyperSearchResult {
  std::vector<HyperSearchRun> runs;
  double neurons_mean = 0.0, neurons_std = 0.0;
  double epochs_mean = 0.0, epochs_std = 0.0;
  int fallback_count = 0;
};

struct HyperSearchConfig {
  std::vector<int> candidate_neurons = {1, 2, 3, 4, 5};
  std::vector<int> candidate_epochs = {1, 2, 3, 5, 8, 12, 20, 40};
  int fixed_epochs = 40;  // epochs used during the neuron sweep
  int n_runs = 50;
  TrainConfig train;
};

HyperSearchResult select_hyperparameters(std::span<const DataPoint> pool,
                                         const HyperSearchConfig& cfg);

struct ComparisonRow {
  ModelKind kind = ModelKind::Linear;
  double mean_r2 = 0.0;        // over curves with r2 >= threshold
  double mean_nmse = 0.0;      // same filter
  int n_tuned = 0;             // count of curves with r2 >= threshold
  double mean_r2_all = 0.0;    // unfiltered means over successful fits
  double mean_nmse_all = 0.0;
  int failed_curves = 0;
  std::vector<double> per_curve_r2;
};

struct ComparisonTable {
  std::vector<std::string> site_ids;
  std::vector<ComparisonRow> rows;
  double r2_threshold = 0.6;
};

/// Deterministic per-curve seed derivation shared by the comparison and
/// report paths (and stable across thread counts).
std::uint64_t derive_curve_seed(std::uint64_t base, std::size_t curve_index);

/// Per-kind LOOCV across curves. Row order follows `kinds`; per-curve
/// parallelism is bounded by cfg.threads and reduced deterministically.
/// When `details` is given it receives one entry per (kind, curve), empty
/// where the fit failed.
ComparisonTable compare_models(
    std::span<const TuningCurve> curves, std::span<const ModelKind> kinds,
    const EvalConfig& cfg,
    std::vector<std::vector<std::optional<FitResult>>>* details = nullptr);

}  // namespace crf
