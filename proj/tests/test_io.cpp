#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"

#include "crf/error.hpp"
#include "crf/io.hpp"

namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "crf_io_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("curves CSV round-trips at full precision") {
  const auto corpus = crf::default_corpus(3, 0.2);
  std::vector<crf::TuningCurve> curves;
  for (const auto& lc : corpus) curves.push_back(lc.curve);

  const auto path = temp_dir() / "curves.csv";
  crf::write_curves_csv(path, curves);
  const auto back = crf::read_curves_csv(path);
  REQUIRE(back.size() == curves.size());
  for (std::size_t i = 0; i < curves.size(); ++i) {
    CHECK(back[i].site_id == curves[i].site_id);
    for (std::size_t k = 0; k < 8; ++k) {
      CHECK(back[i].points[k].contrast == curves[i].points[k].contrast);
      CHECK(back[i].points[k].response == curves[i].points[k].response);
    }
  }
}

TEST_CASE("model JSON round-trips bitwise") {
  crf::KernelModel m;
  m.kind = crf::ModelKind::Mlp;
  m.hyper.n_neurons = 3;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  m.params.resize(10);
  for (auto& p : m.params) p = u(rng);
  m.input_range = {0.0, 0.76};

  const auto j = crf::model_to_json(m);
  const auto back = crf::model_from_json(crf::json::parse(j.dump()));
  CHECK(back.kind == m.kind);
  CHECK(back.params == m.params);  // exact, not approximate
  CHECK(back.input_range.lo == m.input_range.lo);
  CHECK(back.input_range.hi == m.input_range.hi);
}

TEST_CASE("raw recording files round-trip through the manifest") {
  crf::SynthSpec spec;
  spec.kind = crf::SynthKind::Saturating;
  spec.true_params = {4.0, 0.4, 2.0, 1.0};
  spec.site_prefix = "rawrt";
  crf::TrialLayout layout;
  layout.n_trials = 2;
  layout.stimulus_ms = 300.0;
  const auto rec = crf::gen_raw(spec, 60.0, 1000.0, layout,
                                crf::kDefaultContrastGrid, {});

  const auto dir = temp_dir() / "raw";
  fs::remove_all(dir);
  crf::write_raw_recording(dir, rec);
  const auto back = crf::read_raw_input(dir);
  REQUIRE(back.size() == 1);
  CHECK(back[0].site_id == rec.site_id);
  CHECK(back[0].sample_rate == rec.sample_rate);
  REQUIRE(back[0].trials.size() == rec.trials.size());
  CHECK(back[0].trials[0].samples == rec.trials[0].samples);
  CHECK(back[0].trials[0].onset_index == rec.trials[0].onset_index);
}

TEST_CASE("pipeline config rejects unknown keys") {
  CHECK_THROWS_AS(crf::parse_pipeline_config(
                      crf::json::parse(R"({"trian": {"seed": 1}})")),
                  crf::Error);
  CHECK_THROWS_AS(crf::parse_pipeline_config(
                      crf::json::parse(R"({"train": {"sed": 1}})")),
                  crf::Error);
  const auto cfg = crf::parse_pipeline_config(
      crf::json::parse(R"({"train": {"seed": 7}, "models": {"kinds": ["mlp"]}})"));
  CHECK(cfg.train.seed == 7);
  REQUIRE(cfg.kinds.size() == 1);
  CHECK(cfg.kinds[0] == crf::ModelKind::Mlp);
}

TEST_CASE("malformed CSV rows are reported with their line number") {
  const auto path = temp_dir() / "bad.csv";
  {
    std::ofstream out(path);
    out << "site_id,contrast,response,n_trials\n";
    out << "a,0.0,1.0,3\n";
    out << "a,0.02,garbage,3\n";
  }
  try {
    crf::read_curves_csv(path);
    FAIL("expected an io error");
  } catch (const crf::Error& e) {
    CHECK(e.kind() == crf::ErrorKind::IoError);
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
}
