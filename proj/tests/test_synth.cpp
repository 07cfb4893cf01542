#include <cmath>
#include <numeric>

#include "doctest.h"

#include "crf/error.hpp"
#include "crf/eval.hpp"
#include "crf/synth.hpp"

using crf::SynthKind;
using crf::SynthSpec;

namespace {

SynthSpec supersat_spec(double noise = 0.0, int n = 1, std::uint64_t seed = 0) {
  SynthSpec s;
  s.kind = SynthKind::Supersaturating;
  s.true_params = {4.0, 0.45, 2.2, 1.0, 1.8};
  s.noise_sd = noise;
  s.n_curves = n;
  s.seed = seed;
  return s;
}

double rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j)
        if (v[j] < v[i]) r[i] += 1.0;
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

}  // namespace

TEST_CASE("gen_curves with zero noise reproduces the generator exactly") {
  const auto curves = crf::gen_curves(supersat_spec(), crf::kDefaultContrastGrid);
  REQUIRE(curves.size() == 1);
  const auto model = crf::generator_model(supersat_spec(), crf::kDefaultContrastGrid);
  for (const auto& p : curves[0].curve.points) {
    const double phi = crf::normalize_input(p.contrast, 0.0, 0.76);
    CHECK(p.response == doctest::Approx(crf::eval(model, phi)).epsilon(1e-14));
  }
  CHECK(crf::monotonicity_index(curves[0].curve).mi < 1.0 - 1e-9);
}

TEST_CASE("gen_curves noise level matches its nominal sd") {
  auto spec = supersat_spec(0.1, 1000, 5);
  const auto curves = crf::gen_curves(spec, crf::kDefaultContrastGrid);
  const auto model = crf::generator_model(spec, crf::kDefaultContrastGrid);
  double ss = 0.0;
  std::size_t n = 0;
  for (const auto& lc : curves) {
    for (const auto& p : lc.curve.points) {
      const double phi = crf::normalize_input(p.contrast, 0.0, 0.76);
      const double e = p.response - crf::eval(model, phi);
      ss += e * e;
      ++n;
    }
  }
  const double sd = std::sqrt(ss / static_cast<double>(n));
  CHECK(std::fabs(sd - 0.1) < 0.01);
}

TEST_CASE("gen_curves is deterministic per seed and distinct across seeds") {
  const auto a = crf::gen_curves(supersat_spec(0.2, 2, 9), crf::kDefaultContrastGrid);
  const auto b = crf::gen_curves(supersat_spec(0.2, 2, 9), crf::kDefaultContrastGrid);
  const auto c = crf::gen_curves(supersat_spec(0.2, 2, 10), crf::kDefaultContrastGrid);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(a[k].curve.points[i].response == b[k].curve.points[i].response);
    }
  bool any_diff = false;
  for (std::size_t i = 0; i < 8; ++i)
    if (a[0].curve.points[i].response != c[0].curve.points[i].response)
      any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("overwhelming noise is rejected as a spec error") {
  auto spec = supersat_spec(100.0, 20, 3);
  CHECK_THROWS_AS(crf::gen_curves(spec, crf::kDefaultContrastGrid), crf::Error);
}

TEST_CASE("supersaturating specs must peak inside the grid") {
  SynthSpec s;
  s.kind = SynthKind::Supersaturating;
  s.true_params = {4.0, 0.45, 2.2, 1.0, 0.9};  // s <= 1
  CHECK_THROWS_AS(crf::gen_curves(s, crf::kDefaultContrastGrid), crf::Error);
}

TEST_CASE("default corpus composition and classification") {
  const auto corpus = crf::default_corpus(crf::kDefaultCorpusSeed,
                                          crf::kDefaultCorpusNoiseSd);
  REQUIRE(corpus.size() == 66);
  int labeled_super = 0;
  for (const auto& lc : corpus)
    if (lc.kind == SynthKind::Supersaturating) ++labeled_super;
  CHECK(labeled_super == 28);

  // MI classification at the shipped seed reproduces the 28/38 split
  int classified_super = 0;
  for (const auto& lc : corpus) {
    if (crf::monotonicity_index(lc.curve).cls ==
        crf::MonotonicityClass::Supersaturating)
      ++classified_super;
  }
  CHECK(classified_super == 28);
}

TEST_CASE("gen_raw pipeline oracle") {
  crf::PreprocessConfig cfg;
  cfg.stimulus_len_ms = 2000.0;
  cfg.baseline_len_ms = 200.0;

  SUBCASE("the injected curve is recovered within 10% per point at 20 trials") {
    auto spec = supersat_spec();
    spec.seed = 2024;
    crf::TrialLayout layout;  // 20 trials, 2000 ms stimulus
    const auto rec = crf::gen_raw(spec, 60.0, 5000.0, layout,
                                  crf::kDefaultContrastGrid, cfg.band);
    const auto curve = crf::build_tuning_curve(rec, cfg);
    const auto model = crf::generator_model(spec, crf::kDefaultContrastGrid);
    std::vector<double> truth, got;
    for (const auto& p : curve.points) {
      const double phi = crf::normalize_input(p.contrast, 0.0, 0.76);
      const double t = crf::eval(model, phi);
      truth.push_back(t);
      got.push_back(p.response);
      CHECK(std::fabs(p.response - t) / t < 0.10);
    }
    CHECK(rank_correlation(truth, got) >= 0.95);
  }
  SUBCASE("doubling the trial count reduces recovery error") {
    // small layout keeps the Monte Carlo cheap
    crf::PreprocessConfig small_cfg;
    small_cfg.stimulus_len_ms = 500.0;
    small_cfg.baseline_len_ms = 200.0;
    crf::TrialLayout lay20;
    lay20.stimulus_ms = 500.0;
    lay20.n_trials = 10;
    crf::TrialLayout lay40 = lay20;
    lay40.n_trials = 20;

    double rmse20 = 0.0, rmse40 = 0.0;
    const int n_seeds = 30;
    for (int s = 0; s < n_seeds; ++s) {
      auto spec = supersat_spec();
      spec.seed = 100 + static_cast<std::uint64_t>(s);
      const auto model = crf::generator_model(spec, crf::kDefaultContrastGrid);
      for (const auto* lay : {&lay20, &lay40}) {
        const auto rec = crf::gen_raw(spec, 60.0, 1000.0, *lay,
                                      crf::kDefaultContrastGrid, small_cfg.band);
        const auto curve = crf::build_tuning_curve(rec, small_cfg);
        double ss = 0.0;
        for (const auto& p : curve.points) {
          const double phi = crf::normalize_input(p.contrast, 0.0, 0.76);
          const double e = p.response - crf::eval(model, phi);
          ss += e * e;
        }
        (lay == &lay20 ? rmse20 : rmse40) += std::sqrt(ss / 8.0);
      }
    }
    CHECK(rmse40 < rmse20);
  }
  SUBCASE("carrier outside the band is rejected") {
    auto spec = supersat_spec();
    crf::TrialLayout layout;
    CHECK_THROWS_AS(crf::gen_raw(spec, 120.0, 5000.0, layout,
                                 crf::kDefaultContrastGrid, cfg.band),
                    crf::Error);
  }
  SUBCASE("a short baseline layout is rejected") {
    auto spec = supersat_spec();
    crf::TrialLayout layout;
    layout.baseline_ms = 100.0;
    CHECK_THROWS_AS(crf::gen_raw(spec, 60.0, 5000.0, layout,
                                 crf::kDefaultContrastGrid, cfg.band),
                    crf::Error);
  }
}
