// crf: contrast response function tuning pipeline
//
// Subcommands: preprocess, classify, fit, hypersearch, synth.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "crf/error.hpp"
#include "crf/eval.hpp"
#include "crf/io.hpp"
#include "crf/preprocess.hpp"
#include "crf/synth.hpp"

namespace fs = std::filesystem;
using crf::json;

namespace {

crf::PipelineConfig load_config(const std::string& path) {
  crf::PipelineConfig cfg;
  if (!path.empty()) cfg = crf::load_pipeline_config(path);
  if (const char* s = std::getenv("CRF_SEED")) {
    cfg.train.seed = std::strtoull(s, nullptr, 10);
    cfg.synth_seed = cfg.train.seed;
    cfg.hyper_search.train.seed = cfg.train.seed;
  }
  if (const char* t = std::getenv("CRF_THREADS")) {
    cfg.threads = std::max(1, std::atoi(t));
  }
  return cfg;
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) crf::fail(crf::ErrorKind::IoError, "cannot write " + path.string());
  out << body;
}

// ---------------------------------------------------------------- preprocess

int cmd_preprocess(const std::string& input, const std::string& config_path,
                   const std::string& out_path) {
  const auto cfg = load_config(config_path);
  const auto recordings = crf::read_raw_input(input);
  std::vector<crf::TuningCurve> curves;
  for (const auto& rec : recordings) {
    curves.push_back(crf::build_tuning_curve(rec, cfg.preprocess));
    const auto st = crf::site_stationarity(rec, cfg.preprocess.stationarity_segments);
    std::cout << rec.site_id << ": " << st.n_flagged << "/" << st.n_trials
              << " trials flagged nonstationary\n";
  }
  crf::write_curves_csv(out_path, curves);
  std::cout << "wrote " << curves.size() << " curves to " << out_path << "\n";
  return 0;
}

// ------------------------------------------------------------------ classify

int cmd_classify(const std::string& curves_path, const std::string& out_path) {
  const auto curves = crf::read_curves_csv(curves_path);
  if (curves.empty())
    std::cerr << "warning: no curves in " << curves_path << "\n";
  std::vector<crf::ClassRow> rows;
  int n_super = 0, n_mono = 0, n_skipped = 0;
  for (const auto& c : curves) {
    crf::ClassRow row;
    row.site_id = c.site_id;
    try {
      const auto rep = crf::monotonicity_index(c);
      row.mi = rep.mi;
      if (rep.cls == crf::MonotonicityClass::Supersaturating) {
        row.label = "supersaturating";
        ++n_super;
      } else {
        row.label = "monotone";
        ++n_mono;
      }
    } catch (const crf::Error& e) {
      if (e.kind() != crf::ErrorKind::FlatCurve) throw;
      row.label = "skipped";
      ++n_skipped;
    }
    rows.push_back(std::move(row));
  }
  crf::write_classes_csv(out_path, rows);
  std::cout << "supersaturating: " << n_super << ", monotone: " << n_mono;
  if (n_skipped) std::cout << ", skipped (flat): " << n_skipped;
  std::cout << "\n";
  return 0;
}

// ----------------------------------------------------------------------- fit

json run_pooled_workflow(const std::vector<crf::TuningCurve>& curves,
                         const crf::PipelineConfig& cfg,
                         std::vector<crf::EpochRecord>* mlp_trace) {
  // pool the supersaturated curves' points (MI classification)
  std::vector<crf::DataPoint> pool;
  int n_super = 0;
  for (const auto& c : curves) {
    try {
      if (crf::monotonicity_index(c).cls !=
          crf::MonotonicityClass::Supersaturating)
        continue;
    } catch (const crf::Error&) {
      continue;
    }
    ++n_super;
    const double lo = c.points.front().contrast;
    const double hi = c.points.back().contrast;
    for (const auto& p : c.points)
      pool.push_back({crf::normalize_input(p.contrast, lo, hi), p.response});
  }
  json out;
  out["n_supersaturating_curves"] = n_super;
  out["n_points"] = pool.size();
  if (pool.size() != 224) {
    out["status"] = "skipped: pooled workflow expects 224 points";
    return out;
  }

  const auto split = crf::split_dataset(pool, cfg.train.seed);
  std::vector<crf::DataPoint> train, val, test;
  for (auto i : split.train) train.push_back(pool[i]);
  for (auto i : split.val) val.push_back(pool[i]);
  for (auto i : split.test) test.push_back(pool[i]);
  out["split"] = {{"train", train.size()}, {"val", val.size()},
                  {"test", test.size()}};

  crf::KindConfig kc = cfg.kind_config();
  kc.mlp_epochs = cfg.pooled_mlp_epochs;

  json models = json::object();
  json test_nmse = json::object();
  for (const auto kind : cfg.kinds) {
    try {
      const auto fitted = crf::fit_any(train, val, kind, kc);
      std::vector<double> y, pred;
      for (const auto& d : test) {
        y.push_back(d.y);
        pred.push_back(crf::eval(fitted.model, d.phi));
      }
      test_nmse[crf::to_string(kind)] = crf::nmse(y, pred);
      models[crf::to_string(kind)] = crf::model_to_json(fitted.model);
      if (kind == crf::ModelKind::Mlp && mlp_trace) *mlp_trace = fitted.trace;
    } catch (const crf::Error& e) {
      test_nmse[crf::to_string(kind)] = nullptr;
      models[crf::to_string(kind)] = std::string("failed: ") + e.what();
    }
  }
  out["status"] = "ok";
  out["test_nmse"] = test_nmse;
  out["models"] = models;
  return out;
}

void write_fig_data(const fs::path& dir,
                    const std::vector<crf::TuningCurve>& curves,
                    const std::map<std::string, std::map<std::string, crf::FitResult>>&
                        per_kind_fits,
                    const crf::ComparisonTable& table) {
  fs::create_directories(dir);
  {
    std::ostringstream s;
    s << "site_id,contrast,response,kind,fitted\n";
    for (const auto& [kind_name, fits] : per_kind_fits) {
      for (const auto& c : curves) {
        const auto it = fits.find(c.site_id);
        if (it == fits.end()) continue;
        for (const auto& p : c.points) {
          const double phi = crf::normalize_input(
              p.contrast, c.points.front().contrast, c.points.back().contrast);
          s << c.site_id << ',' << crf::format_double(p.contrast) << ','
            << crf::format_double(p.response) << ',' << kind_name << ','
            << crf::format_double(crf::eval(it->second.model, phi)) << '\n';
        }
      }
    }
    write_text(dir / "fig1_curve_overlays.csv", s.str());
  }
  {
    std::ostringstream s;
    s << "kind,site_id,r2\n";
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.per_curve_r2.size(); ++i) {
        s << crf::to_string(row.kind) << ',' << table.site_ids[i] << ','
          << crf::format_double(row.per_curve_r2[i]) << '\n';
      }
    }
    write_text(dir / "fig3_r2_distribution.csv", s.str());
  }
}

std::string render_overlay_svg(const std::vector<crf::TuningCurve>& curves,
                               const std::map<std::string, crf::FitResult>& fits) {
  // minimal multi-panel polyline rendering, one panel per curve
  const int w = 220, h = 160, cols = 6;
  const int rows = static_cast<int>((curves.size() + cols - 1) / cols);
  std::ostringstream s;
  s << "<svg xmlns='http://www.w3.org/2000/svg' width='" << cols * w
    << "' height='" << rows * h << "'>\n";
  int idx = 0;
  for (const auto& c : curves) {
    const int ox = (idx % cols) * w + 20;
    const int oy = (idx / cols) * h + 20;
    double ymax = 0;
    for (const auto& p : c.points) ymax = std::max(ymax, p.response);
    const auto it = fits.find(c.site_id);
    auto X = [&](double contrast) {
      return ox + contrast / c.points.back().contrast * (w - 40);
    };
    auto Y = [&](double y) { return oy + (h - 40) * (1.0 - y / (1.2 * ymax)); };
    s << "<g font-size='9'><text x='" << ox << "' y='" << oy - 6 << "'>"
      << c.site_id << "</text>\n";
    for (const auto& p : c.points)
      s << "<circle cx='" << X(p.contrast) << "' cy='" << Y(p.response)
        << "' r='2' fill='black'/>\n";
    if (it != fits.end()) {
      s << "<polyline fill='none' stroke='purple' points='";
      for (int i = 0; i <= 64; ++i) {
        const double phi = static_cast<double>(i) / 64;
        const double contrast =
            c.points.front().contrast +
            phi * (c.points.back().contrast - c.points.front().contrast);
        s << X(contrast) << ',' << Y(crf::eval(it->second.model, phi)) << ' ';
      }
      s << "'/>\n";
    }
    s << "</g>\n";
    ++idx;
  }
  s << "</svg>\n";
  return s.str();
}

int cmd_fit(const std::string& curves_path, const std::string& config_path,
            const std::string& out_dir, bool emit_svg) {
  const auto cfg = load_config(config_path);
  const auto curves = crf::read_curves_csv(curves_path);
  if (curves.empty()) crf::fail(crf::ErrorKind::DataError, "no curves to fit");
  fs::create_directories(out_dir);

  const auto ecfg = cfg.eval_config();
  std::vector<std::vector<std::optional<crf::FitResult>>> details;
  const auto table = crf::compare_models(curves, cfg.kinds, ecfg, &details);

  std::map<std::string, std::map<std::string, crf::FitResult>> per_kind_fits;
  json per_curve = json::object();
  for (std::size_t k = 0; k < cfg.kinds.size(); ++k) {
    json kind_block = json::object();
    for (std::size_t i = 0; i < curves.size(); ++i) {
      if (details[k][i]) {
        kind_block[curves[i].site_id] = crf::fit_result_to_json(*details[k][i]);
        per_kind_fits[crf::to_string(cfg.kinds[k])][curves[i].site_id] =
            std::move(*details[k][i]);
      } else {
        kind_block[curves[i].site_id] = "failed";
      }
    }
    per_curve[crf::to_string(cfg.kinds[k])] = std::move(kind_block);
  }

  json report;
  report["comparison"] = crf::comparison_to_json(table);
  report["per_curve"] = per_curve;
  std::vector<crf::EpochRecord> mlp_trace;
  report["pooled"] = run_pooled_workflow(curves, cfg, &mlp_trace);
  report["seed"] = cfg.train.seed;

  write_text(fs::path(out_dir) / "report.json", report.dump(2) + "\n");
  if (!mlp_trace.empty()) {
    std::ostringstream s;
    s << "epoch,train_mse,val_mse\n";
    for (const auto& rec : mlp_trace)
      s << rec.epoch << ',' << crf::format_double(rec.train_mse) << ','
        << crf::format_double(rec.val_mse) << '\n';
    write_text(fs::path(out_dir) / "trace.csv", s.str());
  }
  crf::write_table1_csv(fs::path(out_dir) / "table1.csv", table);
  write_fig_data(fs::path(out_dir) / "fig_data", curves, per_kind_fits, table);
  if (emit_svg) {
    const auto it = per_kind_fits.find("mlp");
    if (it != per_kind_fits.end())
      write_text(fs::path(out_dir) / "fig_data" / "overlays_mlp.svg",
                 render_overlay_svg(curves, it->second));
  }
  std::cout << "wrote report to " << out_dir << "\n";
  for (const auto& row : table.rows) {
    std::cout << crf::to_string(row.kind) << ": mean R2 "
              << crf::format_double(row.mean_r2) << ", mean NMSE "
              << crf::format_double(row.mean_nmse) << ", N " << row.n_tuned
              << "\n";
  }
  return 0;
}

// ----------------------------------------------------------------- hypersearch

int cmd_hypersearch(const std::string& curves_path, const std::string& config_path,
                    const std::string& out_path) {
  const auto cfg = load_config(config_path);
  const auto curves = crf::read_curves_csv(curves_path);
  std::vector<crf::DataPoint> pool;
  for (const auto& c : curves) {
    try {
      if (crf::monotonicity_index(c).cls !=
          crf::MonotonicityClass::Supersaturating)
        continue;
    } catch (const crf::Error&) {
      continue;
    }
    const double lo = c.points.front().contrast;
    const double hi = c.points.back().contrast;
    for (const auto& p : c.points)
      pool.push_back({crf::normalize_input(p.contrast, lo, hi), p.response});
  }
  if (pool.empty())
    crf::fail(crf::ErrorKind::DataError, "no supersaturated pool present");

  crf::HyperSearchConfig hcfg = cfg.hyper_search;
  hcfg.train = cfg.train;
  const auto result = crf::select_hyperparameters(pool, hcfg);
  write_text(out_path, crf::hyper_result_to_json(result).dump(2) + "\n");
  std::cout << "optimal neurons: " << crf::format_double(result.neurons_mean)
            << " +/- " << crf::format_double(result.neurons_std)
            << ", optimal epochs: " << crf::format_double(result.epochs_mean)
            << " +/- " << crf::format_double(result.epochs_std) << "\n";
  return 0;
}

// --------------------------------------------------------------------- synth

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
  std::ifstream in(spec_path);
  if (!in) crf::fail(crf::ErrorKind::IoError, "cannot read " + spec_path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    crf::fail(crf::ErrorKind::IoError, spec_path + std::string(": ") + e.what());
  }

  std::uint64_t seed_override = 0;
  bool have_seed_override = false;
  if (const char* s = std::getenv("CRF_SEED")) {
    seed_override = std::strtoull(s, nullptr, 10);
    have_seed_override = true;
  }

  fs::create_directories(out_dir);
  std::vector<crf::LabeledCurve> labeled;
  json raw_block;

  if (j.is_object() && j.value("default_corpus", false)) {
    std::uint64_t seed = j.value("seed", crf::kDefaultCorpusSeed);
    const double noise = j.value("noise_sd", crf::kDefaultCorpusNoiseSd);
    if (have_seed_override) seed = seed_override;
    labeled = crf::default_corpus(seed, noise);
    if (j.contains("raw")) raw_block = j.at("raw");
  } else {
    json spec_list = json::array();
    if (j.is_array())
      spec_list = j;
    else if (j.contains("specs"))
      spec_list = j.at("specs");
    else
      spec_list.push_back(j);
    if (j.is_object() && j.contains("raw")) raw_block = j.at("raw");
    for (const auto& js : spec_list) {
      auto spec = crf::synth_spec_from_json(js);
      if (have_seed_override) spec.seed = seed_override;
      auto curves = crf::gen_curves(spec, crf::kDefaultContrastGrid);
      for (auto& c : curves) labeled.push_back(std::move(c));
    }
  }

  std::vector<crf::TuningCurve> curves;
  for (const auto& lc : labeled) curves.push_back(lc.curve);
  crf::write_curves_csv(fs::path(out_dir) / "curves.csv", curves);
  write_text(fs::path(out_dir) / "truth.json",
             crf::labeled_curves_to_json(labeled).dump(2) + "\n");

  if (!raw_block.is_null() && !raw_block.empty()) {
    // raw traces for the specs listed by site prefix (kept small on purpose)
    crf::TrialLayout layout;
    layout.n_trials = raw_block.value("n_trials", 8);
    layout.stimulus_ms = raw_block.value("stimulus_ms", 1000.0);
    const double fs_hz = raw_block.value("sample_rate", 1000.0);
    const double carrier = raw_block.value("carrier_hz", 60.0);
    auto sites = raw_block.value("sites", std::vector<std::string>{});
    crf::BandHz band;
    int written = 0;
    for (const auto& spec_json : j.value("specs", json::array())) {
      auto spec = crf::synth_spec_from_json(spec_json);
      if (have_seed_override) spec.seed = seed_override;
      if (!sites.empty() &&
          std::find(sites.begin(), sites.end(), spec.site_prefix) == sites.end())
        continue;
      const auto rec = crf::gen_raw(spec, carrier, fs_hz, layout,
                                    crf::kDefaultContrastGrid, band);
      crf::write_raw_recording(fs::path(out_dir) / "raw", rec);
      ++written;
    }
    std::cout << "wrote raw traces for " << written << " sites\n";
  }

  std::cout << "wrote " << curves.size() << " curves to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contrast response function tuning pipeline"};
  app.require_subcommand(1);

  std::string input, config_path, out_path, out_dir, curves_path, spec_path;
  bool emit_svg = false;

  auto* pre = app.add_subcommand("preprocess",
                                 "raw LFP traces to gamma-band tuning curves");
  pre->add_option("--input", input, "trial CSV file or directory")->required();
  pre->add_option("--config", config_path, "pipeline config JSON");
  pre->add_option("--out", out_path, "output curves.csv")->required();

  auto* cls = app.add_subcommand("classify", "monotonicity classification");
  cls->add_option("--curves", curves_path, "curves.csv")->required();
  cls->add_option("--out", out_path, "output classes.csv")->required();

  auto* fit = app.add_subcommand("fit", "LOOCV model comparison + pooled workflow");
  fit->add_option("--curves", curves_path, "curves.csv")->required();
  fit->add_option("--config", config_path, "pipeline config JSON");
  fit->add_option("--out-dir", out_dir, "output directory")->required();
  fit->add_flag("--svg", emit_svg, "also render SVG curve overlays");

  auto* hyp = app.add_subcommand("hypersearch", "validation-based MLP sizing");
  hyp->add_option("--curves", curves_path, "curves.csv")->required();
  hyp->add_option("--config", config_path, "pipeline config JSON");
  hyp->add_option("--out", out_path, "output hyper.json")->required();

  auto* syn = app.add_subcommand("synth", "generate synthetic data");
  syn->add_option("--spec", spec_path, "synth spec JSON")->required();
  syn->add_option("--out-dir", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (pre->parsed()) return cmd_preprocess(input, config_path, out_path);
    if (cls->parsed()) return cmd_classify(curves_path, out_path);
    if (fit->parsed()) return cmd_fit(curves_path, config_path, out_dir, emit_svg);
    if (hyp->parsed()) return cmd_hypersearch(curves_path, config_path, out_path);
    if (syn->parsed()) return cmd_synth(spec_path, out_dir);
  } catch (const crf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
