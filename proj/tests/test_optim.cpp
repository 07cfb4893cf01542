#include <cmath>
#include <random>

#include "doctest.h"

#include "crf/error.hpp"
#include "crf/optim.hpp"

using crf::DataPoint;
using crf::KernelModel;
using crf::ModelKind;

namespace {

std::vector<DataPoint> from_model(const KernelModel& m,
                                  const std::vector<double>& phis,
                                  double noise_sd = 0.0,
                                  std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, noise_sd > 0 ? noise_sd : 1.0);
  std::vector<DataPoint> out;
  for (double phi : phis) {
    double y = crf::eval(m, phi);
    if (noise_sd > 0) y += g(rng);
    out.push_back({phi, y});
  }
  return out;
}

std::vector<double> grid_phis(int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = static_cast<double>(i) / (n - 1);
  return out;
}

KernelModel linear_model(double a, double b) {
  KernelModel m;
  m.kind = ModelKind::Linear;
  m.params = {a, b};
  return m;
}

// closed-form least squares oracle for the linear model
std::vector<double> normal_equations_line(const std::vector<DataPoint>& d) {
  double sxx = 0, sx = 0, sxy = 0, sy = 0, n = 0;
  for (const auto& p : d) {
    sxx += p.phi * p.phi;
    sx += p.phi;
    sxy += p.phi * p.y;
    sy += p.y;
    n += 1;
  }
  const double det = sxx * n - sx * sx;
  return {(sxy * n - sx * sy) / det, (sxx * sy - sx * sxy) / det};
}

}  // namespace

TEST_CASE("lm_step on a linear problem reaches the closed-form solution") {
  const auto truth = linear_model(2.5, -0.7);
  auto data = from_model(truth, grid_phis(12), 0.3, 4);
  const auto oracle = normal_equations_line(data);

  KernelModel shape = linear_model(0, 0);
  auto st = crf::make_lm_state(shape, data, {0.0, 0.0}, 1e-9);
  const auto step = crf::lm_step(shape, data, std::move(st));
  CHECK(step.accepted);
  CHECK(std::fabs(step.state.theta[0] - oracle[0]) < 1e-6);
  CHECK(std::fabs(step.state.theta[1] - oracle[1]) < 1e-6);
}

TEST_CASE("lm_step at a zero-residual point leaves theta unchanged") {
  const auto truth = linear_model(1.0, 1.0);
  auto data = from_model(truth, grid_phis(8));
  auto st = crf::make_lm_state(truth, data, truth.params, 0.01);
  const auto step = crf::lm_step(truth, data, std::move(st));
  CHECK_FALSE(step.accepted);
  CHECK(step.converged);
  CHECK(step.state.theta == truth.params);
}

TEST_CASE("huge damping shrinks the update toward zero") {
  const auto truth = linear_model(2.0, 0.5);
  auto data = from_model(truth, grid_phis(10), 0.2, 1);
  KernelModel shape = linear_model(0, 0);
  auto st = crf::make_lm_state(shape, data, {0.1, 0.1}, 1e12);
  crf::LMOptions opts;
  opts.max_inflations = 0;
  const auto step = crf::lm_step(shape, data, std::move(st), opts);
  if (step.accepted) {
    double norm = 0.0;
    norm += (step.state.theta[0] - 0.1) * (step.state.theta[0] - 0.1);
    norm += (step.state.theta[1] - 0.1) * (step.state.theta[1] - 0.1);
    CHECK(std::sqrt(norm) < 1e-9);
  }
}

TEST_CASE("accepted steps strictly decrease the cost along a full trace") {
  KernelModel truth;
  truth.kind = ModelKind::ModifiedNakaRushton;
  truth.params = {4.0, 0.4, 2.0, 1.0, 1.6};
  auto data = from_model(truth, grid_phis(8), 0.15, 11);

  crf::TrainConfig cfg;
  const auto fitted = crf::fit_classic(data, ModelKind::ModifiedNakaRushton, cfg);
  REQUIRE(fitted.trace.size() > 1);
  for (std::size_t i = 1; i < fitted.trace.size(); ++i)
    CHECK(fitted.trace[i].train_mse < fitted.trace[i - 1].train_mse + 1e-15);
}

TEST_CASE("train_mlp recovers a 2-neuron target to tiny training error") {
  KernelModel truth;
  truth.kind = ModelKind::Mlp;
  truth.hyper.n_neurons = 2;
  truth.params = {4.0, -1.2, 2.2, -6.0, 2.5, 1.6, 0.8};
  auto data = from_model(truth, grid_phis(24));

  crf::TrainConfig cfg;
  cfg.max_epochs = 600;
  cfg.seed = 3;
  const auto fitted = crf::train_mlp(data, {}, 2, cfg);
  const double mse = 2.0 * fitted.train_cost / static_cast<double>(data.size());
  CHECK(mse < 1e-6);
}

TEST_CASE("train_mlp rejects a zero-epoch budget") {
  auto data = from_model(linear_model(1, 1), grid_phis(8));
  crf::TrainConfig cfg;
  cfg.max_epochs = 0;
  CHECK_THROWS_AS(crf::train_mlp(data, {}, 2, cfg), crf::Error);
}

TEST_CASE("train_mlp is deterministic in the seed") {
  auto data = from_model(linear_model(2, 1), grid_phis(16), 0.3, 6);
  crf::TrainConfig cfg;
  cfg.max_epochs = 10;
  cfg.seed = 42;
  const auto a = crf::train_mlp(data, {}, 3, cfg);
  const auto b = crf::train_mlp(data, {}, 3, cfg);
  CHECK(a.model.params == b.model.params);
}

TEST_CASE("fit_rbf_ols") {
  SUBCASE("recovers a single-center target") {
    KernelModel truth;
    truth.kind = ModelKind::Rbf;
    truth.hyper.n_neurons = 1;
    truth.hyper.rbf_width = 0.3;
    truth.params = {0.5, 2.0, 0.4};
    auto data = from_model(truth, grid_phis(21));
    const auto fitted = crf::fit_rbf_ols(data, 1, 0.3);
    CHECK(fitted.selected_centers == 1);
    CHECK(std::fabs(fitted.model.params[0] - 0.5) < 0.051);  // grid spacing
    CHECK(2.0 * fitted.train_cost / data.size() < 1e-8);
  }
  SUBCASE("full dictionary interpolates") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    auto phis = grid_phis(9);
    std::vector<DataPoint> data;
    for (double p : phis) data.push_back({p, g(rng)});
    const auto fitted = crf::fit_rbf_ols(data, 9, 0.5);
    CHECK(std::sqrt(2.0 * fitted.train_cost) < 1e-6);
  }
  SUBCASE("first selection matches an exhaustive single-center search") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 0.3);
    KernelModel bump;
    bump.kind = ModelKind::Rbf;
    bump.hyper.n_neurons = 1;
    bump.hyper.rbf_width = 0.25;
    bump.params = {0.65, 1.8, 0.2};
    auto data = from_model(bump, grid_phis(15));
    for (auto& d : data) d.y += g(rng);

    const auto fitted = crf::fit_rbf_ols(data, 1, 0.25);
    // brute force: best single center by SSE of a bias+gaussian LS fit
    double best_sse = 1e300;
    double best_center = -1;
    for (const auto& cand : data) {
      crf::Mat design(data.size(), 2);
      std::vector<double> y;
      for (std::size_t k = 0; k < data.size(); ++k) {
        const double d = data[k].phi - cand.phi;
        design(k, 0) = 1.0;
        design(k, 1) = std::exp(-(d * d) / (2 * 0.25 * 0.25));
        y.push_back(data[k].y);
      }
      const auto coef = crf::lstsq(design, y);
      double sse = 0.0;
      for (std::size_t k = 0; k < data.size(); ++k) {
        const double pred = coef[0] + coef[1] * design(k, 1);
        sse += (y[k] - pred) * (y[k] - pred);
      }
      if (sse < best_sse) {
        best_sse = sse;
        best_center = cand.phi;
      }
    }
    CHECK(fitted.model.params[0] == doctest::Approx(best_center));
  }
  SUBCASE("training error is non-increasing in the center budget") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 0.5);
    std::vector<DataPoint> data;
    for (double p : grid_phis(17)) data.push_back({p, std::sin(6 * p) + g(rng)});
    double prev = 1e300;
    for (int n = 1; n <= 6; ++n) {
      const auto fitted = crf::fit_rbf_ols(data, n, 0.3);
      CHECK(fitted.train_cost <= prev + 1e-9);
      prev = fitted.train_cost;
    }
  }
  SUBCASE("center budget above the distinct-input count is rejected") {
    auto data = from_model(linear_model(1, 0), grid_phis(5));
    CHECK_THROWS_AS(crf::fit_rbf_ols(data, 6, 0.5), crf::Error);
  }
}

TEST_CASE("fit_fuzzy_grid") {
  SUBCASE("one rule on linear data reduces to ordinary least squares") {
    auto data = from_model(linear_model(1.7, 0.4), grid_phis(12));
    const auto fitted = crf::fit_fuzzy_grid(data, 1);
    CHECK(fitted.model.params[0] == doctest::Approx(1.7).epsilon(1e-10));
    CHECK(fitted.model.params[1] == doctest::Approx(0.4).epsilon(1e-10));
    CHECK(std::sqrt(2.0 * fitted.train_cost) < 1e-10);
  }
  SUBCASE("rule counts beyond the data support surface a rank warning") {
    auto data = from_model(linear_model(1.0, 0.5), grid_phis(8), 0.1, 3);
    const auto fitted = crf::fit_fuzzy_grid(data, 40);
    bool warned = false;
    for (const auto& w : fitted.warnings)
      if (w.find("rank") != std::string::npos) warned = true;
    CHECK(warned);
  }
  SUBCASE("normalized memberships sum to one at every training point") {
    std::vector<double> centers, sigmas;
    crf::grid_premise(4, centers, sigmas);
    for (double phi : grid_phis(31)) {
      const auto h = crf::tsk_memberships(centers, sigmas, phi);
      double sum = 0.0;
      for (double v : h) sum += v;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("train_anfis") {
  SUBCASE("zero gradient step and one epoch reproduce the grid fuzzy fit") {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> g(0.0, 0.3);
    std::vector<DataPoint> data;
    for (double p : grid_phis(16)) data.push_back({p, 1 + 2 * p - p * p + g(rng)});
    const auto fuzzy = crf::fit_fuzzy_grid(data, 2);
    const auto anfis = crf::train_anfis(data, {}, 2, 1, 0.0);
    REQUIRE(anfis.model.params.size() == fuzzy.model.params.size());
    for (std::size_t i = 0; i < fuzzy.model.params.size(); ++i)
      CHECK(anfis.model.params[i] == doctest::Approx(fuzzy.model.params[i]).epsilon(1e-12));
  }
  SUBCASE("premise gradient of the cost matches finite differences") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g(0.0, 0.2);
    std::vector<DataPoint> data;
    for (double p : grid_phis(10)) data.push_back({p, std::sin(3 * p) + g(rng)});

    KernelModel m;
    m.kind = ModelKind::Anfis;
    m.hyper.n_rules = 2;
    m.params = {1.2, 0.1, 0.15, 0.45, -0.8, 1.9, 0.85, 0.55};
    const auto cost = [&](const KernelModel& km) {
      return 0.5 * crf::sse(km, data);
    };
    // analytic dJ/dtheta = -sum e * dyhat/dtheta
    std::vector<double> grad(m.params.size(), 0.0);
    for (const auto& d : data) {
      const double e = d.y - crf::eval(m, d.phi);
      const auto gy = crf::gradient(m, d.phi);
      for (std::size_t j = 0; j < grad.size(); ++j) grad[j] -= e * gy[j];
    }
    const double h = 1e-6;
    for (int i = 0; i < 2; ++i) {
      for (int off : {2, 3}) {  // premise entries c_i, sigma_i
        auto mp = m;
        auto mm = m;
        mp.params[4 * i + off] += h;
        mm.params[4 * i + off] -= h;
        const double fd = (cost(mp) - cost(mm)) / (2 * h);
        const std::size_t j = 4 * i + off;
        CHECK(std::fabs(grad[j] - fd) <
              1e-5 * std::max({1.0, std::fabs(fd), std::fabs(grad[j])}));
      }
    }
  }
  SUBCASE("sigma floor clamps and warns") {
    // sharpening the blend lowers the cost on a V target, so big descent
    // steps drive sigma into the floor
    std::vector<DataPoint> data;
    for (double p : grid_phis(21)) data.push_back({p, std::fabs(p - 0.5)});
    const auto fitted = crf::train_anfis(data, {}, 2, 200, 2.0);
    bool has_warning = false;
    for (const auto& w : fitted.warnings)
      if (w.find("clamped") != std::string::npos) has_warning = true;
    for (int i = 0; i < 2; ++i) CHECK(fitted.model.params[4 * i + 3] >= 1e-3);
    CHECK(has_warning);
  }
}

TEST_CASE("fit_lolimot") {
  SUBCASE("one local model is the ordinary least-squares line") {
    auto data = from_model(linear_model(3.0, -1.0), grid_phis(15), 0.2, 5);
    const auto oracle = normal_equations_line(data);
    const auto fitted = crf::fit_lolimot(data, 1);
    CHECK(fitted.model.params[0] == doctest::Approx(oracle[0]).epsilon(1e-9));
    CHECK(fitted.model.params[1] == doctest::Approx(oracle[1]).epsilon(1e-9));
  }
  SUBCASE("V-shaped target splits at the midpoint and collapses the SSE") {
    std::vector<DataPoint> data;
    for (double p : grid_phis(21)) data.push_back({p, std::fabs(p - 0.5)});
    const auto one = crf::fit_lolimot(data, 1);
    const auto two = crf::fit_lolimot(data, 2);
    REQUIRE(two.model.hyper.n_locals == 2);
    // validity centers at 0.25 and 0.75 mean the split landed at 0.5
    CHECK(two.model.params[2] == doctest::Approx(0.25));
    CHECK(two.model.params[6] == doctest::Approx(0.75));
    CHECK(two.train_cost < 0.01 * one.train_cost);
  }
  SUBCASE("splits producing an empty data cell are rejected") {
    // all data in [0, 0.5): the first midpoint split would leave the right
    // cell empty, so the tree cannot grow past one local model
    std::vector<DataPoint> data;
    for (int i = 0; i < 12; ++i) {
      const double p = 0.45 * i / 11.0;
      data.push_back({p, 2.0 * p + 0.1});
    }
    const auto fitted = crf::fit_lolimot(data, 5);
    CHECK(fitted.model.hyper.n_locals == 1);
  }
  SUBCASE("global SSE is non-increasing in the local-model budget") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 0.2);
    std::vector<DataPoint> data;
    for (double p : grid_phis(33)) data.push_back({p, std::sin(7 * p) + g(rng)});
    double prev = 1e300;
    for (int nl = 1; nl <= 6; ++nl) {
      const auto fitted = crf::fit_lolimot(data, nl);
      CHECK(fitted.train_cost <= prev + 1e-12);
      prev = fitted.train_cost;
    }
  }
}

TEST_CASE("fit_classic") {
  SUBCASE("linear equals the closed form exactly") {
    auto data = from_model(linear_model(2.2, 0.9), grid_phis(10), 0.4, 14);
    const auto oracle = normal_equations_line(data);
    const auto fitted = crf::fit_classic(data, ModelKind::Linear, {});
    CHECK(fitted.model.params[0] == doctest::Approx(oracle[0]).epsilon(1e-12));
    CHECK(fitted.model.params[1] == doctest::Approx(oracle[1]).epsilon(1e-12));
  }
  SUBCASE("noise-free Naka-Rushton parameters are recovered") {
    KernelModel truth;
    truth.kind = ModelKind::NakaRushton;
    truth.params = {4.0, 0.35, 2.0, 1.0};
    auto data = from_model(truth, grid_phis(8));
    const auto fitted = crf::fit_classic(data, ModelKind::NakaRushton, {});
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(std::fabs(fitted.model.params[i] - truth.params[i]) <
            1e-3 * std::fabs(truth.params[i]));
  }
  SUBCASE("modified fit on monotone Naka-Rushton data finds s near 1") {
    KernelModel truth;
    truth.kind = ModelKind::NakaRushton;
    truth.params = {3.0, 0.45, 1.8, 0.9};
    auto data = from_model(truth, grid_phis(8));
    const auto fitted =
        crf::fit_classic(data, ModelKind::ModifiedNakaRushton, {});
    CHECK(std::fabs(fitted.model.params[4] - 1.0) < 0.05);
  }
  SUBCASE("warm starts never end above their initial cost") {
    KernelModel truth;
    truth.kind = ModelKind::ModifiedNakaRushton;
    truth.params = {4.5, 0.5, 2.4, 1.1, 1.8};
    auto data = from_model(truth, grid_phis(8), 0.2, 21);
    const std::vector<double> warm = {3.0, 0.4, 2.0, 1.0, 1.2};
    KernelModel init;
    init.kind = ModelKind::ModifiedNakaRushton;
    init.params = warm;
    const double init_cost = 0.5 * crf::sse(init, data);
    const auto fitted =
        crf::fit_classic(data, ModelKind::ModifiedNakaRushton, {}, &warm);
    CHECK(fitted.train_cost <= init_cost + 1e-12);
  }
}
