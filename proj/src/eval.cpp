#include "crf/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "crf/error.hpp"

namespace crf {

namespace {

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// splitmix-style hash for deriving independent per-task seeds
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double r_squared(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) fail(ErrorKind::DataError, "length mismatch");
  if (y.size() < 2) fail(ErrorKind::DataError, "need at least 2 points");
  const double ybar = mean(y);
  double sse_v = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sse_v += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    sst += (y[i] - ybar) * (y[i] - ybar);
  }
  if (sst == 0.0) fail(ErrorKind::DegenerateVariance, "targets are constant");
  return 1.0 - sse_v / sst;
}

double nmse(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) fail(ErrorKind::DataError, "length mismatch");
  if (y.empty()) fail(ErrorKind::DataError, "empty input");
  const double ybar = mean(y);
  const double yhbar = mean(yhat);
  const double denom = ybar * yhbar;
  if (denom == 0.0) fail(ErrorKind::DegenerateMean, "zero mean product");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    s += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  return s / static_cast<double>(y.size()) / denom;
}

void validate(const TuningCurve& curve) {
  if (curve.points.size() != 8)
    fail(ErrorKind::DataError,
         "tuning curve must hold exactly 8 points, got " +
             std::to_string(curve.points.size()));
  for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
    if (!(curve.points[i].contrast < curve.points[i + 1].contrast))
      fail(ErrorKind::DataError, "contrasts must be strictly increasing");
  }
  if (curve.points.front().contrast != 0.0)
    fail(ErrorKind::DataError, "first contrast must be 0");
  for (const auto& p : curve.points) {
    if (!(p.response > 0.0) || !std::isfinite(p.response))
      fail(ErrorKind::DataError, "responses must be positive and finite");
  }
}

MonotonicityReport monotonicity_index(const TuningCurve& curve) {
  validate(curve);
  double rm = -std::numeric_limits<double>::infinity();
  for (const auto& p : curve.points) rm = std::max(rm, p.response);
  const double r0 = curve.points.front().response;
  const double r100 = curve.points.back().response;
  if (rm == r0)
    fail(ErrorKind::FlatCurve, "maximum equals the zero-contrast response");
  MonotonicityReport rep;
  rep.mi = 1.0 - (rm - r100) / (rm - r0);
  rep.cls = rep.mi < 1.0 - 1e-9 ? MonotonicityClass::Supersaturating
                                : MonotonicityClass::MonotoneOrSaturating;
  return rep;
}

std::optional<double> c50_estimate(const KernelModel& model) {
  const auto& range = model.input_range;
  if (model.kind == ModelKind::NakaRushton ||
      model.kind == ModelKind::ModifiedNakaRushton)
    return denormalize_input(model.params[1], range.lo, range.hi);

  constexpr int kGrid = 512;
  std::vector<double> vals(kGrid + 1);
  double vmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    vals[i] = eval(model, static_cast<double>(i) / kGrid);
    vmax = std::max(vmax, vals[i]);
  }
  const double level = 0.5 * vmax;
  if (vals[0] >= level) return denormalize_input(0.0, range.lo, range.hi);
  for (int i = 1; i <= kGrid; ++i) {
    if (vals[i - 1] < level && vals[i] >= level) {
      double lo = static_cast<double>(i - 1) / kGrid;
      double hi = static_cast<double>(i) / kGrid;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (eval(model, mid) < level ? lo : hi) = mid;
      }
      return denormalize_input(0.5 * (lo + hi), range.lo, range.hi);
    }
  }
  return std::nullopt;
}

namespace {

bool kind_uses_warm_start(ModelKind kind) {
  switch (kind) {
    case ModelKind::NakaRushton:
    case ModelKind::ModifiedNakaRushton:
    case ModelKind::Mlp:
    case ModelKind::Anfis:
      return true;
    default:
      return false;  // closed-form / structural estimators
  }
}

}  // namespace

FitResult loocv(const TuningCurve& curve, ModelKind kind, const EvalConfig& cfg) {
  validate(curve);
  const double lo = curve.points.front().contrast;
  const double hi = curve.points.back().contrast;

  std::vector<DataPoint> all(8);
  for (std::size_t i = 0; i < 8; ++i) {
    all[i].phi = normalize_input(curve.points[i].contrast, lo, hi);
    all[i].y = curve.points[i].response;
  }

  FitResult result;
  result.per_fold.resize(8);
  std::optional<std::vector<double>> warm;
  const std::span<const DataPoint> no_val;

  for (int fold = 0; fold < 8; ++fold) {
    std::vector<DataPoint> train;
    train.reserve(7);
    for (int j = 0; j < 8; ++j) {
      if (j != fold) train.push_back(all[j]);
    }
    FoldRecord& rec = result.per_fold[fold];
    rec.held_out = fold;
    rec.target = all[fold].y;
    try {
      const std::vector<double>* ws =
          (warm && kind_uses_warm_start(kind)) ? &*warm : nullptr;
      auto fitted = fit_any(train, no_val, kind, cfg.kind_config, ws);
      rec.prediction = eval(fitted.model, all[fold].phi);
      if (!std::isfinite(rec.prediction))
        fail(ErrorKind::Divergence, "non-finite held-out prediction");
      warm = fitted.model.params;
    } catch (const Error& e) {
      rec.failed = true;
      result.failed_folds += 1;
      result.warnings.push_back("fold " + std::to_string(fold) + " failed: " +
                                e.what());
    }
  }

  std::vector<double> y, pred;
  for (const auto& rec : result.per_fold) {
    if (rec.failed) continue;
    y.push_back(rec.target);
    pred.push_back(rec.prediction);
  }
  if (y.size() < 2)
    fail(ErrorKind::StepFailure, "too many failed folds for " +
                                     std::string(to_string(kind)) + " on " +
                                     curve.site_id);
  result.r2 = r_squared(y, pred);
  result.nmse_value = nmse(y, pred);

  const std::vector<double>* ws =
      (warm && kind_uses_warm_start(kind)) ? &*warm : nullptr;
  auto final_fit = fit_any(all, no_val, kind, cfg.kind_config, ws);
  result.model = final_fit.model;
  result.model.input_range = {lo, hi};
  result.c50_estimate = c50_estimate(result.model);
  return result;
}

SplitIndices split_dataset(std::span<const DataPoint> points, std::uint64_t seed) {
  if (points.size() != 224)
    fail(ErrorKind::InvalidConfig,
         "pooled split expects exactly 224 points, got " +
             std::to_string(points.size()));

  // group indices by contrast level
  std::vector<double> levels;
  for (const auto& p : points) {
    if (std::find(levels.begin(), levels.end(), p.phi) == levels.end())
      levels.push_back(p.phi);
  }
  std::sort(levels.begin(), levels.end());

  std::vector<std::vector<std::size_t>> groups(levels.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto it = std::find(levels.begin(), levels.end(), points[i].phi);
    groups[static_cast<std::size_t>(it - levels.begin())].push_back(i);
  }

  const double total = static_cast<double>(points.size());
  SplitIndices out;
  std::mt19937_64 rng(seed);
  std::size_t cum = 0;
  std::size_t train_cum = 0, val_cum = 0;
  for (auto& g : groups) {
    std::shuffle(g.begin(), g.end(), rng);
    cum += g.size();
    // cumulative-rounding quotas keep the partition sizes exact
    const auto train_target = static_cast<std::size_t>(
        std::llround(156.0 * static_cast<double>(cum) / total));
    const auto val_target = static_cast<std::size_t>(
        std::llround(34.0 * static_cast<double>(cum) / total));
    const std::size_t tq = train_target - train_cum;
    const std::size_t vq = val_target - val_cum;
    train_cum = train_target;
    val_cum = val_target;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (i < tq)
        out.train.push_back(g[i]);
      else if (i < tq + vq)
        out.val.push_back(g[i]);
      else
        out.test.push_back(g[i]);
    }
  }
  return out;
}

namespace {

struct SweepPick {
  int value;
  bool fallback;
};

// smallest candidate where validation MSE rises while training MSE falls;
// fallback is the validation argmin
SweepPick pick_optimal(const std::vector<SweepPoint>& sweep) {
  for (std::size_t k = 1; k < sweep.size(); ++k) {
    if (sweep[k].val_mse > sweep[k - 1].val_mse &&
        sweep[k].train_mse < sweep[k - 1].train_mse)
      return {sweep[k].value, false};
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < sweep.size(); ++k) {
    if (sweep[k].val_mse < sweep[best].val_mse) best = k;
  }
  return {sweep[best].value, true};
}

double sample_std(const std::vector<int>& v, double m) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (int x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

HyperSearchResult select_hyperparameters(std::span<const DataPoint> pool,
                                         const HyperSearchConfig& cfg) {
  if (cfg.candidate_neurons.empty() || cfg.candidate_epochs.empty())
    fail(ErrorKind::InvalidConfig, "empty candidate range");
  if (cfg.n_runs < 1) fail(ErrorKind::InvalidConfig, "n_runs must be >= 1");

  HyperSearchResult result;
  std::vector<int> picked_neurons, picked_epochs;

  for (int run = 0; run < cfg.n_runs; ++run) {
    const std::uint64_t run_seed = cfg.train.seed + static_cast<std::uint64_t>(run);
    const auto split = split_dataset(pool, run_seed);
    std::vector<DataPoint> train, val;
    for (auto i : split.train) train.push_back(pool[i]);
    for (auto i : split.val) val.push_back(pool[i]);

    HyperSearchRun rec;
    rec.seed = run_seed;

    auto sweep_once = [&](int n_neurons, int epochs, std::uint64_t salt) {
      TrainConfig tc = cfg.train;
      tc.max_epochs = epochs;
      tc.seed = mix_seed(run_seed, salt);
      auto fitted = train_mlp(train, val, n_neurons, tc);
      SweepPoint pt;
      double tm = 0.0, vm = 0.0;
      tm = sse(fitted.model, train) / static_cast<double>(train.size());
      vm = sse(fitted.model, val) / static_cast<double>(val.size());
      pt.train_mse = tm;
      pt.val_mse = vm;
      return pt;
    };

    for (std::size_t i = 0; i < cfg.candidate_neurons.size(); ++i) {
      auto pt = sweep_once(cfg.candidate_neurons[i], cfg.fixed_epochs, i);
      pt.value = cfg.candidate_neurons[i];
      rec.neuron_sweep.push_back(pt);
    }
    const auto npick = pick_optimal(rec.neuron_sweep);
    rec.optimal_neurons = npick.value;
    rec.neurons_fallback = npick.fallback;

    for (std::size_t i = 0; i < cfg.candidate_epochs.size(); ++i) {
      auto pt = sweep_once(rec.optimal_neurons, cfg.candidate_epochs[i], 1000 + i);
      pt.value = cfg.candidate_epochs[i];
      rec.epoch_sweep.push_back(pt);
    }
    const auto epick = pick_optimal(rec.epoch_sweep);
    rec.optimal_epochs = epick.value;
    rec.epochs_fallback = epick.fallback;

    if (rec.neurons_fallback || rec.epochs_fallback) result.fallback_count += 1;
    picked_neurons.push_back(rec.optimal_neurons);
    picked_epochs.push_back(rec.optimal_epochs);
    result.runs.push_back(std::move(rec));
  }

  double nm = 0.0, em = 0.0;
  for (std::size_t i = 0; i < picked_neurons.size(); ++i) {
    nm += picked_neurons[i];
    em += picked_epochs[i];
  }
  nm /= static_cast<double>(picked_neurons.size());
  em /= static_cast<double>(picked_epochs.size());
  result.neurons_mean = nm;
  result.epochs_mean = em;
  result.neurons_std = sample_std(picked_neurons, nm);
  result.epochs_std = sample_std(picked_epochs, em);
  return result;
}

std::uint64_t derive_curve_seed(std::uint64_t base, std::size_t curve_index) {
  return mix_seed(base, 7777 + curve_index);
}

ComparisonTable compare_models(
    std::span<const TuningCurve> curves, std::span<const ModelKind> kinds,
    const EvalConfig& cfg,
    std::vector<std::vector<std::optional<FitResult>>>* details) {
  if (curves.empty()) fail(ErrorKind::DataError, "no curves to compare");

  ComparisonTable table;
  table.r2_threshold = cfg.r2_threshold;
  for (const auto& c : curves) table.site_ids.push_back(c.site_id);
  if (details) details->clear();

  for (const auto kind : kinds) {
    std::vector<std::optional<FitResult>> cells(curves.size());
    const int threads = std::max(1, cfg.threads);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= curves.size()) return;
        EvalConfig sub = cfg;
        sub.kind_config.train.seed =
            derive_curve_seed(cfg.kind_config.train.seed, i);
        try {
          cells[i] = loocv(curves[i], kind, sub);
        } catch (const Error&) {
          cells[i] = std::nullopt;  // failed fit counts below threshold
        }
      }
    };
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }

    ComparisonRow row;
    row.kind = kind;
    double r2_sum = 0.0, nm_sum = 0.0;
    double r2_all = 0.0, nm_all = 0.0;
    int n_all = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!cells[i]) {
        row.per_curve_r2.push_back(-std::numeric_limits<double>::infinity());
        row.failed_curves += 1;
        continue;
      }
      const double r2 = cells[i]->r2;
      const double nm = cells[i]->nmse_value;
      row.per_curve_r2.push_back(r2);
      r2_all += r2;
      nm_all += nm;
      n_all += 1;
      if (r2 >= cfg.r2_threshold) {
        row.n_tuned += 1;
        r2_sum += r2;
        nm_sum += nm;
      }
    }
    row.mean_r2 = row.n_tuned ? r2_sum / row.n_tuned : 0.0;
    row.mean_nmse = row.n_tuned ? nm_sum / row.n_tuned : 0.0;
    row.mean_r2_all = n_all ? r2_all / n_all : 0.0;
    row.mean_nmse_all = n_all ? nm_all / n_all : 0.0;
    table.rows.push_back(std::move(row));
    if (details) details->push_back(std::move(cells));
  }
  return table;
}

}  // namespace crf
