#include <cmath>
#include <random>

#include "doctest.h"

#include "crf/error.hpp"
#include "crf/models.hpp"

using crf::KernelModel;
using crf::ModelKind;

namespace {

KernelModel make(ModelKind kind, std::vector<double> params, int n_units = 3,
                 double width = 0.5) {
  KernelModel m;
  m.kind = kind;
  m.params = std::move(params);
  if (kind == ModelKind::Mlp || kind == ModelKind::Rbf)
    m.hyper.n_neurons = n_units;
  if (kind == ModelKind::TskFuzzy || kind == ModelKind::Anfis)
    m.hyper.n_rules = n_units;
  if (kind == ModelKind::Lolimot) m.hyper.n_locals = n_units;
  m.hyper.rbf_width = width;
  return m;
}

// random valid parameter draw per family, kept away from non-smooth corners
KernelModel random_model(ModelKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.3, 2.5);
  switch (kind) {
    case ModelKind::Linear:
      return make(kind, {3.0 * u(rng), 2.0 * u(rng)});
    case ModelKind::NakaRushton:
      return make(kind, {2.0 + pos(rng), 0.1 + 0.4 * pos(rng), pos(rng),
                         1.0 + u(rng) * 0.5});
    case ModelKind::ModifiedNakaRushton:
      return make(kind, {2.0 + pos(rng), 0.1 + 0.4 * pos(rng), pos(rng),
                         1.0 + u(rng) * 0.5, 0.5 + pos(rng)});
    case ModelKind::Mlp: {
      std::vector<double> p;
      for (int i = 0; i < 3; ++i) {
        p.push_back(4.0 * u(rng));
        p.push_back(2.0 * u(rng));
        p.push_back(2.0 * u(rng));
      }
      p.push_back(u(rng));
      return make(kind, std::move(p));
    }
    case ModelKind::Rbf: {
      std::vector<double> p;
      for (int i = 0; i < 3; ++i) {
        p.push_back(0.1 + 0.8 * std::abs(u(rng)));
        p.push_back(2.0 * u(rng));
      }
      p.push_back(u(rng));
      return make(kind, std::move(p), 3, 0.2 + 0.4 * std::abs(u(rng)));
    }
    case ModelKind::TskFuzzy:
    case ModelKind::Anfis:
    case ModelKind::Lolimot: {
      std::vector<double> p;
      for (int i = 0; i < 2; ++i) {
        p.push_back(3.0 * u(rng));
        p.push_back(2.0 * u(rng));
        p.push_back(0.1 + 0.8 * std::abs(u(rng)));
        p.push_back(0.15 + 0.5 * std::abs(u(rng)));
      }
      return make(kind, std::move(p), 2);
    }
  }
  return {};
}

constexpr ModelKind kAllKinds[] = {
    ModelKind::Linear,       ModelKind::NakaRushton,
    ModelKind::ModifiedNakaRushton, ModelKind::Mlp,
    ModelKind::Rbf,          ModelKind::TskFuzzy,
    ModelKind::Anfis,        ModelKind::Lolimot};

}  // namespace

TEST_CASE("normalize_input maps the range onto [0,1]") {
  CHECK(crf::normalize_input(0.0, 0.0, 0.76) == 0.0);
  CHECK(crf::normalize_input(0.76, 0.0, 0.76) == 1.0);
  CHECK(crf::normalize_input(0.38, 0.0, 0.76) == doctest::Approx(0.5));
  CHECK_THROWS_AS(crf::normalize_input(0.1, 0.5, 0.5), crf::Error);
}

TEST_CASE("Naka-Rushton halfway point is R_m/2 + B for any exponent") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.5, 4.0);
  for (int i = 0; i < 20; ++i) {
    const double rm = u(rng), c50 = 0.1 + 0.2 * u(rng), n = u(rng), b = u(rng);
    const auto m = make(ModelKind::NakaRushton, {rm, c50, n, b});
    CHECK(crf::eval(m, c50) == doctest::Approx(rm / 2 + b).epsilon(1e-12));
  }
}

TEST_CASE("modified Naka-Rushton with s = 1 reduces to Naka-Rushton") {
  const auto nr = make(ModelKind::NakaRushton, {3.5, 0.3, 2.2, 1.1});
  const auto mnr = make(ModelKind::ModifiedNakaRushton, {3.5, 0.3, 2.2, 1.1, 1.0});
  for (int i = 0; i < 100; ++i) {
    const double phi = static_cast<double>(i) / 99.0;
    CHECK(crf::eval(mnr, phi) == doctest::Approx(crf::eval(nr, phi)).epsilon(1e-12));
  }
}

TEST_CASE("MLP with zero weights outputs sum(alpha)/2 + alpha0") {
  const auto m = make(ModelKind::Mlp,
                      {0, 0, 1.2, 0, 0, -0.4, 0, 0, 2.0, 0.7});
  const double expect = (1.2 - 0.4 + 2.0) / 2 + 0.7;
  CHECK(crf::eval(m, 0.3) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(crf::eval(m, 0.9) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("RBF response at a well-separated center is dominated by its term") {
  const auto m = make(ModelKind::Rbf, {0.1, 2.0, 0.5, -1.0, 0.9, 3.0, 0.25},
                      3, 0.05);
  const double at_c2 = crf::eval(m, 0.5);
  // exp(-(0.4/0.05)^2/2) is negligible
  CHECK(at_c2 == doctest::Approx(-1.0 + 0.25).epsilon(1e-10));
}

TEST_CASE("single-rule TSK is exactly its local line") {
  const auto m = make(ModelKind::TskFuzzy, {2.5, -0.3, 0.5, 0.5}, 1);
  for (double phi : {0.0, 0.2, 0.77, 1.0})
    CHECK(crf::eval(m, phi) == doctest::Approx(2.5 * phi - 0.3).epsilon(1e-14));
}

TEST_CASE("the three TSK-family tags share one evaluator bitwise") {
  const std::vector<double> params = {2.0, 0.3, 0.0, 0.5, -1.5, 4.0, 1.0, 0.5};
  const auto a = make(ModelKind::TskFuzzy, params, 2);
  const auto b = make(ModelKind::Anfis, params, 2);
  const auto c = make(ModelKind::Lolimot, params, 2);
  for (int i = 0; i <= 50; ++i) {
    const double phi = static_cast<double>(i) / 50.0;
    const double va = crf::eval(a, phi);
    CHECK(crf::eval(b, phi) == va);
    CHECK(crf::eval(c, phi) == va);
  }
}

TEST_CASE("TSK membership underflow raises degenerate-membership") {
  auto m = make(ModelKind::TskFuzzy, {1.0, 0.0, 0.0, 1e-300, 1.0, 0.0, 0.1, 1e-300}, 2);
  CHECK_THROWS_AS(crf::eval(m, 0.9), crf::Error);
}

TEST_CASE("analytic gradients match central finite differences for all families") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> uphi(0.02, 1.0);
  const double h = 1e-6;
  for (const auto kind : kAllKinds) {
    for (int draw = 0; draw < 100; ++draw) {
      auto m = random_model(kind, rng);
      const double phi = uphi(rng);
      const auto g = crf::gradient(m, phi);
      for (std::size_t j = 0; j < m.params.size(); ++j) {
        auto mp = m;
        auto mm = m;
        mp.params[j] += h;
        mm.params[j] -= h;
        const double fd = (crf::eval(mp, phi) - crf::eval(mm, phi)) / (2 * h);
        const double tol = 1e-5 * std::max({1.0, std::fabs(fd), std::fabs(g[j])});
        CHECK(std::fabs(g[j] - fd) < tol);
      }
    }
  }
}

TEST_CASE("gradient fixed entries: linear and MLP bias") {
  const auto lin = make(ModelKind::Linear, {1.5, 0.3});
  const auto g = crf::gradient(lin, 0.4);
  CHECK(g[0] == 0.4);
  CHECK(g[1] == 1.0);
  std::mt19937_64 rng(5);
  const auto mlp = random_model(ModelKind::Mlp, rng);
  CHECK(crf::gradient(mlp, 0.77).back() == 1.0);
}

TEST_CASE("residual_jacobian basics") {
  std::vector<crf::DataPoint> data;
  const auto lin = make(ModelKind::Linear, {2.0, -1.0});
  for (double phi : {0.1, 0.5, 0.9})
    data.push_back({phi, crf::eval(lin, phi)});

  SUBCASE("perfect model gives zero residuals") {
    const auto rj = crf::residual_jacobian(lin, data);
    for (double e : rj.residuals) CHECK(std::fabs(e) < 1e-14);
    CHECK(rj.cost < 1e-25);
  }
  SUBCASE("linear Jacobian rows are [phi, 1]") {
    const auto rj = crf::residual_jacobian(lin, data);
    for (std::size_t k = 0; k < data.size(); ++k) {
      CHECK(rj.jacobian(k, 0) == data[k].phi);
      CHECK(rj.jacobian(k, 1) == 1.0);
    }
  }
  SUBCASE("cost equals an independent half-sum of squares") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    auto noisy = data;
    for (auto& d : noisy) d.y += g(rng);
    const auto rj = crf::residual_jacobian(lin, noisy);
    double direct = 0.0;
    for (std::size_t k = 0; k < noisy.size(); ++k) {
      const double e = noisy[k].y - crf::eval(lin, noisy[k].phi);
      direct += e * e;
    }
    direct *= 0.5;
    CHECK(rj.cost == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("Naka-Rushton is monotone nondecreasing for R_m >= 0") {
  std::mt19937_64 rng(77);
  for (int draw = 0; draw < 50; ++draw) {
    const auto m = random_model(ModelKind::NakaRushton, rng);
    double prev = crf::eval(m, 0.0);
    for (int i = 1; i <= 200; ++i) {
      const double cur = crf::eval(m, static_cast<double>(i) / 200.0);
      CHECK(cur >= prev - 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("eval is total and finite on valid inputs") {
  std::mt19937_64 rng(31);
  for (const auto kind : kAllKinds) {
    const auto m = random_model(kind, rng);
    for (int i = 0; i <= 20; ++i)
      CHECK(std::isfinite(crf::eval(m, static_cast<double>(i) / 20.0)));
  }
}
