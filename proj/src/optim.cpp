#include "crf/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "crf/error.hpp"

namespace crf {

namespace {

constexpr double kMuFloor = 1e-14;
constexpr double kGradTiny = 1e-14;

double mse_of(const KernelModel& m, std::span<const DataPoint> data) {
  if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
  return sse(m, data) / static_cast<double>(data.size());
}

KernelModel with_theta(const KernelModel& shape, std::vector<double> theta) {
  KernelModel m = shape;
  m.params = std::move(theta);
  return m;
}

// MLP output is linear in the amplitudes, so a target scale factor folds
// back into them exactly.
void rescale_mlp_amplitudes(std::vector<double>& theta, int n_neurons,
                            double scale) {
  for (int i = 0; i < n_neurons; ++i) theta[3 * i + 2] *= scale;
  theta[3 * n_neurons] *= scale;
}

}  // namespace

LMState make_lm_state(const KernelModel& shape, std::span<const DataPoint> data,
                      std::vector<double> theta, double mu0) {
  if (mu0 <= 0) fail(ErrorKind::InvalidConfig, "mu must be positive");
  LMState st;
  st.theta = std::move(theta);
  st.mu = mu0;
  st.iteration = 0;
  const double j0 = residual_jacobian(with_theta(shape, st.theta), data).cost;
  if (!std::isfinite(j0)) fail(ErrorKind::Divergence, "non-finite initial cost");
  st.cost_history.push_back(j0);
  return st;
}

LMStepResult lm_step(const KernelModel& shape, std::span<const DataPoint> data,
                     LMState state, const LMOptions& options) {
  const std::size_t p = state.theta.size();
  const auto rj = residual_jacobian(with_theta(shape, state.theta), data);
  const double j0 = rj.cost;
  if (!std::isfinite(j0)) fail(ErrorKind::Divergence, "non-finite cost");
  if (state.cost_history.empty()) state.cost_history.push_back(j0);

  // grad J = -J^T e
  auto grad = mat_tvec(rj.jacobian, rj.residuals);
  double gmax = 0.0;
  for (auto& g : grad) {
    g = -g;
    gmax = std::max(gmax, std::fabs(g));
  }
  if (gmax < kGradTiny) {
    // fixed point: residual gradient vanished, theta unchanged
    return {std::move(state), false, true};
  }

  const Mat a = gram(rj.jacobian);
  int inflations = 0;
  bool last_singular = false;
  while (inflations <= options.max_inflations) {
    Mat damped = a;
    for (std::size_t i = 0; i < p; ++i) damped(i, i) += state.mu;
    auto delta = try_solve(damped, grad);
    if (!delta) {
      last_singular = true;
      state.mu *= 10.0;
      ++inflations;
      continue;
    }
    last_singular = false;
    std::vector<double> candidate(p);
    for (std::size_t i = 0; i < p; ++i) candidate[i] = state.theta[i] - (*delta)[i];
    if (options.project) options.project(candidate);
    const double jc = sse(with_theta(shape, candidate), data) * 0.5;
    if (!std::isfinite(jc)) fail(ErrorKind::Divergence, "non-finite candidate cost");
    if (jc < j0) {
      state.theta = std::move(candidate);
      state.mu = std::max(state.mu / 10.0, kMuFloor);
      state.iteration += 1;
      state.cost_history.push_back(jc);
      return {std::move(state), true, false};
    }
    state.mu *= 10.0;
    ++inflations;
  }
  if (last_singular)
    fail(ErrorKind::StepFailure,
         "damped normal matrix stayed singular after max inflations");
  // no strictly lower cost reachable: numerically converged
  return {std::move(state), false, true};
}

FittedModel train_mlp(std::span<const DataPoint> train,
                      std::span<const DataPoint> val, int n_neurons,
                      const TrainConfig& config,
                      const std::vector<double>* warm_start) {
  if (n_neurons < 1) fail(ErrorKind::InvalidConfig, "n_neurons must be >= 1");
  if (config.max_epochs < 1) fail(ErrorKind::InvalidConfig, "max_epochs must be >= 1");
  if (train.empty()) fail(ErrorKind::DataError, "empty training set");
  if (!(config.init_weight_lo < config.init_weight_hi))
    fail(ErrorKind::InvalidConfig, "empty init weight range");

  KernelModel shape;
  shape.kind = ModelKind::Mlp;
  shape.hyper.n_neurons = n_neurons;

  // condition the targets to unit scale; amplitudes are rescaled afterwards
  double scale = 0.0;
  for (const auto& d : train) scale = std::max(scale, std::fabs(d.y));
  if (scale <= 0.0) scale = 1.0;
  std::vector<DataPoint> strain(train.begin(), train.end());
  for (auto& d : strain) d.y /= scale;
  std::vector<DataPoint> sval(val.begin(), val.end());
  for (auto& d : sval) d.y /= scale;

  const std::size_t np = param_count(shape.kind, shape.hyper);
  std::vector<double> theta;
  if (warm_start) {
    if (warm_start->size() != np)
      fail(ErrorKind::InvalidConfig, "warm start length mismatch");
    theta = *warm_start;
    rescale_mlp_amplitudes(theta, n_neurons, 1.0 / scale);
  } else {
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> u(config.init_weight_lo,
                                             config.init_weight_hi);
    theta.resize(np);
    for (auto& t : theta) t = u(rng);
  }

  FittedModel out;
  LMState st = make_lm_state(shape, strain, std::move(theta), config.init_step);
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double before = st.cost_history.back();
    auto step = lm_step(shape, strain, std::move(st));
    st = std::move(step.state);
    const auto cur = with_theta(shape, st.theta);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = mse_of(cur, strain) * scale * scale;
    rec.val_mse = sval.empty() ? std::numeric_limits<double>::quiet_NaN()
                               : mse_of(cur, sval) * scale * scale;
    out.trace.push_back(rec);
    if (step.converged) {
      out.converged = true;
      break;
    }
    const double after = st.cost_history.back();
    if (before - after < config.tolerance * std::max(before, 1.0)) {
      out.converged = true;
      break;
    }
  }

  rescale_mlp_amplitudes(st.theta, n_neurons, scale);
  out.model = with_theta(shape, st.theta);
  out.train_cost = 0.5 * sse(out.model, train);
  return out;
}

FittedModel fit_rbf_ols(std::span<const DataPoint> train, int n_centers,
                        double width) {
  if (train.empty()) fail(ErrorKind::DataError, "empty training set");
  if (n_centers < 1) fail(ErrorKind::InvalidConfig, "n_centers must be >= 1");
  if (width <= 0) fail(ErrorKind::InvalidConfig, "width must be positive");

  std::set<double> distinct;
  for (const auto& d : train) distinct.insert(d.phi);
  std::vector<double> candidates(distinct.begin(), distinct.end());
  if (static_cast<std::size_t>(n_centers) > candidates.size())
    fail(ErrorKind::InvalidConfig,
         "n_centers exceeds distinct inputs (" +
             std::to_string(candidates.size()) + ")");

  const std::size_t n = train.size();
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = train[k].y;

  auto gauss_col = [&](double c) {
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double d = train[k].phi - c;
      col[k] = std::exp(-(d * d) / (2.0 * width * width));
    }
    return col;
  };

  // Gram-Schmidt basis, bias column pre-selected so the error-reduction
  // ranking is taken on the residual space after the mean.
  std::vector<std::vector<double>> basis;
  {
    std::vector<double> ones(n, 1.0);
    double nrm = std::sqrt(static_cast<double>(n));
    for (auto& v : ones) v /= nrm;
    basis.push_back(std::move(ones));
  }
  auto orthonormalize = [&](std::vector<double> col) -> std::optional<std::vector<double>> {
    for (const auto& q : basis) {
      double dot = 0.0;
      for (std::size_t k = 0; k < n; ++k) dot += col[k] * q[k];
      for (std::size_t k = 0; k < n; ++k) col[k] -= dot * q[k];
    }
    double nrm = 0.0;
    for (double v : col) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (nrm < 1e-9) return std::nullopt;
    for (auto& v : col) v /= nrm;
    return col;
  };

  FittedModel out;
  std::vector<std::size_t> selected;
  std::vector<bool> used(candidates.size(), false);
  for (int pick = 0; pick < n_centers; ++pick) {
    double best_red = -1.0;
    std::size_t best_j = 0;
    std::optional<std::vector<double>> best_q;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (used[j]) continue;
      auto q = orthonormalize(gauss_col(candidates[j]));
      if (!q) continue;
      double dot = 0.0;
      for (std::size_t k = 0; k < n; ++k) dot += y[k] * (*q)[k];
      const double reduction = dot * dot;
      if (reduction > best_red) {
        best_red = reduction;
        best_j = j;
        best_q = std::move(q);
      }
    }
    if (!best_q) break;  // dictionary exhausted by rank deficiency
    used[best_j] = true;
    selected.push_back(best_j);
    basis.push_back(std::move(*best_q));
  }
  if (static_cast<int>(selected.size()) < n_centers)
    out.warnings.push_back("rank-deficient basis: selected " +
                           std::to_string(selected.size()) + " of " +
                           std::to_string(n_centers) + " centers");

  // final amplitudes + bias by linear least squares on the selected set
  Mat design(n, selected.size() + 1);
  for (std::size_t k = 0; k < n; ++k) design(k, 0) = 1.0;
  for (std::size_t s = 0; s < selected.size(); ++s) {
    auto col = gauss_col(candidates[selected[s]]);
    for (std::size_t k = 0; k < n; ++k) design(k, s + 1) = col[k];
  }
  bool rank_warn = false;
  auto coef = lstsq(design, y, &rank_warn);
  if (rank_warn) out.warnings.push_back("rank warning in final least squares");

  KernelModel model;
  model.kind = ModelKind::Rbf;
  model.hyper.n_neurons = static_cast<int>(selected.size());
  model.hyper.rbf_width = width;
  model.params.resize(2 * selected.size() + 1);
  for (std::size_t s = 0; s < selected.size(); ++s) {
    model.params[2 * s] = candidates[selected[s]];
    model.params[2 * s + 1] = coef[s + 1];
  }
  model.params[2 * selected.size()] = coef[0];

  out.model = std::move(model);
  out.selected_centers = static_cast<int>(selected.size());
  out.train_cost = 0.5 * sse(out.model, train);
  out.converged = true;
  return out;
}

void grid_premise(int n_rules, std::vector<double>& centers,
                  std::vector<double>& sigmas) {
  centers.resize(n_rules);
  sigmas.resize(n_rules);
  if (n_rules == 1) {
    centers[0] = 0.5;
    sigmas[0] = 0.5;
    return;
  }
  const double spacing = 1.0 / (n_rules - 1);
  for (int i = 0; i < n_rules; ++i) {
    centers[i] = i * spacing;
    sigmas[i] = 0.5 * spacing;
  }
}

namespace {

// Consequents (a_i, b_i) by least squares on the normalized membership
// design matrix, premises held fixed.
FittedModel solve_tsk_consequents(std::span<const DataPoint> train,
                                  ModelKind kind,
                                  const std::vector<double>& centers,
                                  const std::vector<double>& sigmas) {
  const std::size_t n = train.size();
  const std::size_t m = centers.size();
  Mat design(n, 2 * m);
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto h = tsk_memberships(centers, sigmas, train[k].phi);
    for (std::size_t i = 0; i < m; ++i) {
      design(k, 2 * i) = h[i] * train[k].phi;
      design(k, 2 * i + 1) = h[i];
    }
    y[k] = train[k].y;
  }
  FittedModel out;
  bool rank_warn = false;
  const auto coef = lstsq(design, y, &rank_warn);
  if (rank_warn)
    out.warnings.push_back("rank warning: rules exceed data support");

  KernelModel model;
  model.kind = kind;
  model.hyper.n_rules = static_cast<int>(m);
  model.params.resize(4 * m);
  for (std::size_t i = 0; i < m; ++i) {
    model.params[4 * i] = coef[2 * i];
    model.params[4 * i + 1] = coef[2 * i + 1];
    model.params[4 * i + 2] = centers[i];
    model.params[4 * i + 3] = sigmas[i];
  }
  out.model = std::move(model);
  out.train_cost = 0.5 * sse(out.model, train);
  out.converged = true;
  return out;
}

}  // namespace

FittedModel fit_fuzzy_grid(std::span<const DataPoint> train, int n_rules) {
  if (train.empty()) fail(ErrorKind::DataError, "empty training set");
  if (n_rules < 1) fail(ErrorKind::InvalidConfig, "n_rules must be >= 1");
  std::vector<double> centers, sigmas;
  grid_premise(n_rules, centers, sigmas);
  return solve_tsk_consequents(train, ModelKind::TskFuzzy, centers, sigmas);
}

FittedModel train_anfis(std::span<const DataPoint> train,
                        std::span<const DataPoint> val, int n_rules, int epochs,
                        double step, const std::vector<double>* warm_start) {
  if (train.empty()) fail(ErrorKind::DataError, "empty training set");
  if (n_rules < 1) fail(ErrorKind::InvalidConfig, "n_rules must be >= 1");
  if (epochs < 1) fail(ErrorKind::InvalidConfig, "epochs must be >= 1");
  constexpr double kSigmaFloor = 1e-3;

  std::vector<double> centers, sigmas;
  grid_premise(n_rules, centers, sigmas);
  if (warm_start) {
    if (warm_start->size() != static_cast<std::size_t>(4 * n_rules))
      fail(ErrorKind::InvalidConfig, "warm start length mismatch");
    for (int i = 0; i < n_rules; ++i) {
      centers[i] = (*warm_start)[4 * i + 2];
      sigmas[i] = std::max((*warm_start)[4 * i + 3], kSigmaFloor);
    }
  }

  FittedModel out;
  bool clamped = false;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    auto fitted = solve_tsk_consequents(train, ModelKind::Anfis, centers, sigmas);
    for (auto& w : fitted.warnings) out.warnings.push_back(std::move(w));
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = mse_of(fitted.model, train);
    rec.val_mse = val.empty() ? std::numeric_limits<double>::quiet_NaN()
                              : mse_of(fitted.model, val);
    out.trace.push_back(rec);

    // premise gradient descent on J = 0.5 sum e^2
    std::vector<double> gc(n_rules, 0.0), gs(n_rules, 0.0);
    for (const auto& d : train) {
      const double e = d.y - eval(fitted.model, d.phi);
      const auto g = gradient(fitted.model, d.phi);
      for (int i = 0; i < n_rules; ++i) {
        gc[i] += -e * g[4 * i + 2];
        gs[i] += -e * g[4 * i + 3];
      }
    }
    for (int i = 0; i < n_rules; ++i) {
      centers[i] -= step * gc[i];
      const double s = sigmas[i] - step * gs[i];
      if (s < kSigmaFloor) {
        sigmas[i] = kSigmaFloor;
        clamped = true;
      } else {
        sigmas[i] = s;
      }
    }
  }
  if (clamped) out.warnings.push_back("sigma clamped at floor 1e-3");

  auto fitted = solve_tsk_consequents(train, ModelKind::Anfis, centers, sigmas);
  fitted.trace = std::move(out.trace);
  fitted.warnings.insert(fitted.warnings.end(), out.warnings.begin(),
                         out.warnings.end());
  EpochRecord final_rec;
  final_rec.epoch = epochs + 1;
  final_rec.train_mse = mse_of(fitted.model, train);
  final_rec.val_mse = val.empty() ? std::numeric_limits<double>::quiet_NaN()
                                  : mse_of(fitted.model, val);
  fitted.trace.push_back(final_rec);
  return fitted;
}

FittedModel fit_lolimot(std::span<const DataPoint> train, int nl_max) {
  if (train.empty()) fail(ErrorKind::DataError, "empty training set");
  if (nl_max < 1) fail(ErrorKind::InvalidConfig, "nl_max must be >= 1");

  struct Interval {
    double lo, hi;
  };
  const std::size_t n = train.size();

  auto validity = [&](const std::vector<Interval>& ivs, std::vector<double>& c,
                      std::vector<double>& s) {
    c.resize(ivs.size());
    s.resize(ivs.size());
    for (std::size_t i = 0; i < ivs.size(); ++i) {
      c[i] = 0.5 * (ivs[i].lo + ivs[i].hi);
      s[i] = (ivs[i].hi - ivs[i].lo) / 3.0;
    }
  };

  auto memberships = [&](const std::vector<double>& c,
                         const std::vector<double>& s) {
    Mat h(n, c.size());
    for (std::size_t k = 0; k < n; ++k) {
      const auto w = tsk_memberships(c, s, train[k].phi);
      for (std::size_t i = 0; i < c.size(); ++i) h(k, i) = w[i];
    }
    return h;
  };

  auto local_line = [&](const Mat& h, std::size_t i) {
    Mat design(n, 2);
    std::vector<double> y(n), w(n);
    for (std::size_t k = 0; k < n; ++k) {
      design(k, 0) = train[k].phi;
      design(k, 1) = 1.0;
      y[k] = train[k].y;
      w[k] = h(k, i);
    }
    const auto coef = weighted_lstsq(design, y, w);
    return std::pair<double, double>{coef[0], coef[1]};
  };

  auto global_sse = [&](const Mat& h, const std::vector<std::pair<double, double>>& lines) {
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double pred = 0.0;
      for (std::size_t i = 0; i < lines.size(); ++i)
        pred += h(k, i) * (lines[i].first * train[k].phi + lines[i].second);
      const double e = train[k].y - pred;
      total += e * e;
    }
    return total;
  };

  std::vector<Interval> intervals{{0.0, 1.0}};
  std::vector<double> c, s;
  validity(intervals, c, s);
  Mat h = memberships(c, s);
  std::vector<std::pair<double, double>> lines{local_line(h, 0)};
  double best_sse = global_sse(h, lines);

  while (intervals.size() < static_cast<std::size_t>(nl_max)) {
    // local weighted SSE ranks the worst local model
    std::vector<double> local_sse(intervals.size(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      double pred = 0.0;
      for (std::size_t i = 0; i < lines.size(); ++i)
        pred += h(k, i) * (lines[i].first * train[k].phi + lines[i].second);
      const double e2 = (train[k].y - pred) * (train[k].y - pred);
      for (std::size_t i = 0; i < intervals.size(); ++i)
        local_sse[i] += h(k, i) * e2;
    }
    std::vector<std::size_t> order(intervals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (local_sse[a] != local_sse[b]) return local_sse[a] > local_sse[b];
      return a < b;
    });

    bool accepted = false;
    for (std::size_t worst : order) {
      const double lo = intervals[worst].lo;
      const double hi = intervals[worst].hi;
      const double mid = 0.5 * (lo + hi);
      std::size_t left_count = 0, right_count = 0;
      for (const auto& d : train) {
        if (d.phi >= lo && d.phi < mid) ++left_count;
        if (d.phi >= mid && d.phi <= hi) ++right_count;
      }
      if (left_count == 0 || right_count == 0) continue;  // empty cell

      std::vector<Interval> cand = intervals;
      cand[worst] = {lo, mid};
      cand.insert(cand.begin() + static_cast<std::ptrdiff_t>(worst) + 1, {mid, hi});
      std::vector<double> cc, cs;
      validity(cand, cc, cs);
      Mat ch = memberships(cc, cs);
      auto cand_lines = lines;
      cand_lines.insert(cand_lines.begin() + static_cast<std::ptrdiff_t>(worst) + 1,
                        {0.0, 0.0});
      cand_lines[worst] = local_line(ch, worst);
      cand_lines[worst + 1] = local_line(ch, worst + 1);
      const double cand_sse = global_sse(ch, cand_lines);
      if (cand_sse < best_sse) {
        intervals = std::move(cand);
        lines = std::move(cand_lines);
        h = std::move(ch);
        best_sse = cand_sse;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  validity(intervals, c, s);
  FittedModel out;
  KernelModel model;
  model.kind = ModelKind::Lolimot;
  model.hyper.n_locals = static_cast<int>(intervals.size());
  model.params.resize(4 * intervals.size());
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    model.params[4 * i] = lines[i].first;
    model.params[4 * i + 1] = lines[i].second;
    model.params[4 * i + 2] = c[i];
    model.params[4 * i + 3] = s[i];
  }
  out.model = std::move(model);
  out.train_cost = 0.5 * best_sse;
  out.converged = true;
  return out;
}

namespace {

std::vector<double> classic_heuristic_init(std::span<const DataPoint> train,
                                           ModelKind kind) {
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();
  double phimin = std::numeric_limits<double>::infinity();
  for (const auto& d : train) {
    ymin = std::min(ymin, d.y);
    ymax = std::max(ymax, d.y);
    phimin = std::min(phimin, d.phi);
  }
  // B starts at the mean response at the lowest contrast present
  double bsum = 0.0;
  int bcount = 0;
  for (const auto& d : train) {
    if (d.phi == phimin) {
      bsum += d.y;
      ++bcount;
    }
  }
  const double b0 = bcount ? bsum / bcount : ymin;
  const double rm0 = std::max(ymax - ymin, 1e-6);
  if (kind == ModelKind::NakaRushton) return {rm0, 0.3, 2.0, b0};
  return {rm0, 0.3, 2.0, b0, 1.0};
}

void project_classic(std::vector<double>& theta) {
  constexpr double kFloor = 1e-4;
  theta[1] = std::max(theta[1], kFloor);  // C50
  theta[2] = std::max(theta[2], kFloor);  // n
  if (theta.size() > 4) theta[4] = std::max(theta[4], kFloor);  // s
}

FittedModel run_classic_lm(std::span<const DataPoint> train, ModelKind kind,
                           const TrainConfig& config, std::vector<double> theta) {
  KernelModel shape;
  shape.kind = kind;
  project_classic(theta);
  LMOptions opts;
  opts.project = project_classic;

  FittedModel out;
  LMState st = make_lm_state(shape, train, std::move(theta), config.init_step);
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double before = st.cost_history.back();
    auto step = lm_step(shape, train, std::move(st), opts);
    st = std::move(step.state);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = 2.0 * st.cost_history.back() / static_cast<double>(train.size());
    rec.val_mse = std::numeric_limits<double>::quiet_NaN();
    out.trace.push_back(rec);
    if (step.converged) {
      out.converged = true;
      break;
    }
    const double after = st.cost_history.back();
    if (before - after < config.tolerance * std::max(before, 1.0)) {
      out.converged = true;
      break;
    }
  }
  out.model = with_theta(shape, st.theta);
  out.train_cost = st.cost_history.back();
  return out;
}

}  // namespace

FittedModel fit_classic(std::span<const DataPoint> train, ModelKind kind,
                        const TrainConfig& config,
                        const std::vector<double>* warm_start) {
  if (train.empty()) fail(ErrorKind::DataError, "empty training set");

  if (kind == ModelKind::Linear) {
    Mat design(train.size(), 2);
    std::vector<double> y(train.size());
    for (std::size_t k = 0; k < train.size(); ++k) {
      design(k, 0) = train[k].phi;
      design(k, 1) = 1.0;
      y[k] = train[k].y;
    }
    FittedModel out;
    out.model.kind = ModelKind::Linear;
    out.model.params = lstsq(design, y);
    out.train_cost = 0.5 * sse(out.model, train);
    out.converged = true;
    return out;
  }
  if (kind != ModelKind::NakaRushton && kind != ModelKind::ModifiedNakaRushton)
    fail(ErrorKind::InvalidConfig, "fit_classic handles the linear and Naka-Rushton families only");

  std::vector<double> init =
      warm_start ? *warm_start : classic_heuristic_init(train, kind);
  if (init.size() != param_count(kind, HyperParams{}))
    fail(ErrorKind::InvalidConfig, "warm start length mismatch");

  try {
    return run_classic_lm(train, kind, config, init);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Divergence && e.kind() != ErrorKind::StepFailure)
      throw;
  }
  // divergence: retry from perturbed initializations
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int restart = 0; restart < 5; ++restart) {
    std::vector<double> theta = init;
    for (auto& t : theta) t *= std::exp(u(rng));
    try {
      auto out = run_classic_lm(train, kind, config, std::move(theta));
      out.warnings.push_back("recovered after restart " + std::to_string(restart + 1));
      return out;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Divergence && e.kind() != ErrorKind::StepFailure)
        throw;
    }
  }
  fail(ErrorKind::Divergence, "LM diverged in all restarts");
}

FittedModel fit_any(std::span<const DataPoint> train,
                    std::span<const DataPoint> val, ModelKind kind,
                    const KindConfig& config,
                    const std::vector<double>* warm_start) {
  switch (kind) {
    case ModelKind::Linear:
    case ModelKind::NakaRushton:
    case ModelKind::ModifiedNakaRushton:
      return fit_classic(train, kind, config.train,
                         kind == ModelKind::Linear ? nullptr : warm_start);
    case ModelKind::Mlp: {
      TrainConfig tc = config.train;
      tc.max_epochs = config.mlp_epochs;
      return train_mlp(train, val, config.hyper.n_neurons, tc, warm_start);
    }
    case ModelKind::Rbf:
      return fit_rbf_ols(train, config.hyper.n_neurons, config.hyper.rbf_width);
    case ModelKind::TskFuzzy:
      return fit_fuzzy_grid(train, config.hyper.n_rules);
    case ModelKind::Anfis:
      return train_anfis(train, val, config.hyper.n_rules, config.anfis_epochs,
                         config.anfis_step, warm_start);
    case ModelKind::Lolimot:
      return fit_lolimot(train, config.hyper.n_locals);
  }
  fail(ErrorKind::InvalidConfig, "unreachable kind");
}

}  // namespace crf
