#include "crf/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "crf/error.hpp"

namespace crf {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json model_to_json(const KernelModel& model) {
  json j;
  j["kind"] = to_string(model.kind);
  j["hyper"] = {{"n_neurons", model.hyper.n_neurons},
                {"n_rules", model.hyper.n_rules},
                {"n_locals", model.hyper.n_locals},
                {"rbf_width", model.hyper.rbf_width}};
  j["params"] = model.params;
  j["input_range"] = {model.input_range.lo, model.input_range.hi};
  return j;
}

KernelModel model_from_json(const json& j) {
  KernelModel m;
  m.kind = model_kind_from_string(j.at("kind").get<std::string>());
  const auto& h = j.at("hyper");
  m.hyper.n_neurons = h.at("n_neurons").get<int>();
  m.hyper.n_rules = h.at("n_rules").get<int>();
  m.hyper.n_locals = h.at("n_locals").get<int>();
  m.hyper.rbf_width = h.at("rbf_width").get<double>();
  m.params = j.at("params").get<std::vector<double>>();
  m.input_range.lo = j.at("input_range").at(0).get<double>();
  m.input_range.hi = j.at("input_range").at(1).get<double>();
  if (m.params.size() != param_count(m.kind, m.hyper))
    fail(ErrorKind::InvalidConfig, "serialized params length mismatch");
  return m;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot read " + path.string());
  return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const fs::path& path, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::IoError, path.string() + ":" + std::to_string(line_no) +
                                 ": malformed number '" + s + "'");
  }
}

}  // namespace

void write_curves_csv(const fs::path& path, std::span<const TuningCurve> curves) {
  auto out = open_out(path);
  out << "site_id,contrast,response,n_trials\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out << c.site_id << ',' << format_double(p.contrast) << ','
          << format_double(p.response) << ',' << p.n_trials << '\n';
    }
  }
}

std::vector<TuningCurve> read_curves_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  int line_no = 0;
  std::vector<std::string> site_order;
  std::map<std::string, TuningCurve> by_site;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (split_csv_line(line) !=
          std::vector<std::string>{"site_id", "contrast", "response", "n_trials"})
        fail(ErrorKind::IoError, path.string() + ":1: unexpected header");
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 4)
      fail(ErrorKind::IoError, path.string() + ":" + std::to_string(line_no) +
                                   ": expected 4 fields, got " +
                                   std::to_string(fields.size()));
    CurvePoint pt;
    pt.contrast = parse_double(fields[1], path, line_no);
    pt.response = parse_double(fields[2], path, line_no);
    pt.n_trials = static_cast<int>(parse_double(fields[3], path, line_no));
    auto [it, inserted] = by_site.try_emplace(fields[0]);
    if (inserted) {
      it->second.site_id = fields[0];
      site_order.push_back(fields[0]);
    }
    it->second.points.push_back(pt);
  }
  std::vector<TuningCurve> out;
  for (const auto& id : site_order) out.push_back(by_site.at(id));
  return out;
}

void write_raw_recording(const fs::path& dir, const RawRecording& rec) {
  fs::create_directories(dir);
  json manifest;
  manifest["site_id"] = rec.site_id;
  manifest["sample_rate"] = rec.sample_rate;
  json files = json::array();
  int idx = 0;
  for (const auto& trial : rec.trials) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_trial%04d.csv", rec.site_id.c_str(), idx);
    auto out = open_out(dir / name);
    out << "site_id,contrast,onset_index,sample_rate\n";
    out << rec.site_id << ',' << format_double(trial.contrast) << ','
        << trial.onset_index << ',' << format_double(rec.sample_rate) << '\n';
    for (double s : trial.samples) out << format_double(s) << '\n';
    files.push_back(name);
    ++idx;
  }
  manifest["trials"] = files;
  auto mout = open_out(dir / (rec.site_id + "_manifest.json"));
  mout << manifest.dump(2) << '\n';
}

namespace {

struct TrialFile {
  std::string site_id;
  double sample_rate;
  Trial trial;
};

TrialFile read_trial_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorKind::IoError, path.string() + ": empty file");
  if (split_csv_line(line) != std::vector<std::string>{"site_id", "contrast",
                                                       "onset_index", "sample_rate"})
    fail(ErrorKind::IoError, path.string() + ":1: unexpected header");
  if (!std::getline(in, line))
    fail(ErrorKind::IoError, path.string() + ": missing metadata row");
  const auto meta = split_csv_line(line);
  if (meta.size() != 4)
    fail(ErrorKind::IoError, path.string() + ":2: expected 4 fields");
  TrialFile tf;
  tf.site_id = meta[0];
  tf.trial.contrast = parse_double(meta[1], path, 2);
  tf.trial.onset_index = static_cast<std::size_t>(parse_double(meta[2], path, 2));
  tf.sample_rate = parse_double(meta[3], path, 2);
  int line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    tf.trial.samples.push_back(parse_double(line, path, line_no));
  }
  if (tf.trial.samples.empty())
    fail(ErrorKind::IoError, path.string() + ": no samples");
  return tf;
}

}  // namespace

std::vector<RawRecording> read_raw_input(const fs::path& path) {
  std::vector<fs::path> trial_files;
  if (fs::is_directory(path)) {
    std::vector<fs::path> manifests;
    for (const auto& entry : fs::directory_iterator(path)) {
      const auto p = entry.path();
      if (p.extension() == ".json" &&
          p.filename().string().find("manifest") != std::string::npos)
        manifests.push_back(p);
    }
    std::sort(manifests.begin(), manifests.end());
    if (!manifests.empty()) {
      for (const auto& mpath : manifests) {
        auto in = open_in(mpath);
        json manifest = json::parse(in, nullptr, true);
        for (const auto& name : manifest.at("trials"))
          trial_files.push_back(mpath.parent_path() / name.get<std::string>());
      }
    } else {
      for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.path().extension() == ".csv")
          trial_files.push_back(entry.path());
      }
      std::sort(trial_files.begin(), trial_files.end());
    }
  } else {
    trial_files.push_back(path);
  }
  if (trial_files.empty())
    fail(ErrorKind::IoError, "no trial files under " + path.string());

  std::vector<std::string> site_order;
  std::map<std::string, RawRecording> by_site;
  for (const auto& file : trial_files) {
    auto tf = read_trial_csv(file);
    auto [it, inserted] = by_site.try_emplace(tf.site_id);
    if (inserted) {
      it->second.site_id = tf.site_id;
      it->second.sample_rate = tf.sample_rate;
      site_order.push_back(tf.site_id);
    } else if (it->second.sample_rate != tf.sample_rate) {
      fail(ErrorKind::DataError,
           "inconsistent sample_rate within site " + tf.site_id);
    }
    it->second.trials.push_back(std::move(tf.trial));
  }
  std::vector<RawRecording> out;
  for (const auto& id : site_order) out.push_back(std::move(by_site.at(id)));
  return out;
}

void write_classes_csv(const fs::path& path, std::span<const ClassRow> rows) {
  auto out = open_out(path);
  out << "site_id,mi,class\n";
  for (const auto& r : rows) {
    out << r.site_id << ',' << (r.mi ? format_double(*r.mi) : "") << ','
        << r.label << '\n';
  }
}

json fit_result_to_json(const FitResult& result) {
  json j;
  j["model"] = model_to_json(result.model);
  j["r2"] = result.r2;
  j["nmse"] = result.nmse_value;
  j["failed_folds"] = result.failed_folds;
  if (result.c50_estimate)
    j["c50"] = *result.c50_estimate;
  else
    j["c50"] = nullptr;
  json folds = json::array();
  for (const auto& f : result.per_fold) {
    folds.push_back({{"held_out", f.held_out},
                     {"prediction", f.prediction},
                     {"target", f.target},
                     {"failed", f.failed}});
  }
  j["per_fold"] = folds;
  if (!result.warnings.empty()) j["warnings"] = result.warnings;
  return j;
}

json comparison_to_json(const ComparisonTable& table) {
  json j;
  j["r2_threshold"] = table.r2_threshold;
  j["site_ids"] = table.site_ids;
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"kind", to_string(r.kind)},
                    {"mean_r2", r.mean_r2},
                    {"mean_nmse", r.mean_nmse},
                    {"n_tuned", r.n_tuned},
                    {"mean_r2_unfiltered", r.mean_r2_all},
                    {"mean_nmse_unfiltered", r.mean_nmse_all},
                    {"failed_curves", r.failed_curves},
                    {"per_curve_r2", r.per_curve_r2}});
  }
  j["rows"] = rows;
  return j;
}

void write_table1_csv(const fs::path& path, const ComparisonTable& table) {
  auto out = open_out(path);
  out << "kind,mean_r2,mean_nmse,n_tuned\n";
  for (const auto& r : table.rows) {
    out << to_string(r.kind) << ',' << format_double(r.mean_r2) << ','
        << format_double(r.mean_nmse) << ',' << r.n_tuned << '\n';
  }
}

json hyper_result_to_json(const HyperSearchResult& result) {
  json j;
  j["neurons_mean"] = result.neurons_mean;
  j["neurons_std"] = result.neurons_std;
  j["epochs_mean"] = result.epochs_mean;
  j["epochs_std"] = result.epochs_std;
  j["fallback_count"] = result.fallback_count;
  json runs = json::array();
  for (const auto& r : result.runs) {
    json sweep_n = json::array(), sweep_e = json::array();
    for (const auto& p : r.neuron_sweep)
      sweep_n.push_back({{"value", p.value},
                         {"train_mse", p.train_mse},
                         {"val_mse", p.val_mse}});
    for (const auto& p : r.epoch_sweep)
      sweep_e.push_back({{"value", p.value},
                         {"train_mse", p.train_mse},
                         {"val_mse", p.val_mse}});
    runs.push_back({{"seed", r.seed},
                    {"optimal_neurons", r.optimal_neurons},
                    {"optimal_epochs", r.optimal_epochs},
                    {"neurons_fallback", r.neurons_fallback},
                    {"epochs_fallback", r.epochs_fallback},
                    {"neuron_sweep", sweep_n},
                    {"epoch_sweep", sweep_e}});
  }
  j["runs"] = runs;
  return j;
}

json labeled_curves_to_json(std::span<const LabeledCurve> curves) {
  json arr = json::array();
  for (const auto& lc : curves) {
    json responses = json::array(), contrasts = json::array();
    for (const auto& p : lc.curve.points) {
      contrasts.push_back(p.contrast);
      responses.push_back(p.response);
    }
    arr.push_back({{"site_id", lc.curve.site_id},
                   {"kind", to_string(lc.kind)},
                   {"true_params", lc.true_params},
                   {"contrasts", contrasts},
                   {"responses", responses}});
  }
  return json{{"curves", arr}};
}

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& section) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key()))
      fail(ErrorKind::InvalidConfig,
           "unknown config key '" + section + it.key() + "'");
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

PipelineConfig parse_pipeline_config(const json& j) {
  PipelineConfig cfg;
  reject_unknown_keys(
      j, {"preprocess", "models", "train", "eval", "synth", "output"}, "");

  if (j.contains("preprocess")) {
    const auto& p = j.at("preprocess");
    reject_unknown_keys(p,
                        {"contrast_grid", "cutoff_hz", "zero_phase", "band_lo",
                         "band_hi", "stimulus_start_ms", "stimulus_len_ms",
                         "baseline_len_ms", "stationarity_segments"},
                        "preprocess.");
    maybe(p, "contrast_grid", cfg.preprocess.contrast_grid);
    maybe(p, "cutoff_hz", cfg.preprocess.cutoff_hz);
    maybe(p, "zero_phase", cfg.preprocess.zero_phase);
    maybe(p, "band_lo", cfg.preprocess.band.lo);
    maybe(p, "band_hi", cfg.preprocess.band.hi);
    maybe(p, "stimulus_start_ms", cfg.preprocess.stimulus_start_ms);
    maybe(p, "stimulus_len_ms", cfg.preprocess.stimulus_len_ms);
    maybe(p, "baseline_len_ms", cfg.preprocess.baseline_len_ms);
    maybe(p, "stationarity_segments", cfg.preprocess.stationarity_segments);
  }
  if (j.contains("models")) {
    const auto& m = j.at("models");
    reject_unknown_keys(
        m, {"kinds", "n_neurons", "n_rules", "n_locals", "rbf_width"},
        "models.");
    if (m.contains("kinds")) {
      cfg.kinds.clear();
      for (const auto& k : m.at("kinds"))
        cfg.kinds.push_back(model_kind_from_string(k.get<std::string>()));
    }
    maybe(m, "n_neurons", cfg.hyper.n_neurons);
    maybe(m, "n_rules", cfg.hyper.n_rules);
    maybe(m, "n_locals", cfg.hyper.n_locals);
    maybe(m, "rbf_width", cfg.hyper.rbf_width);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    reject_unknown_keys(t,
                        {"max_epochs", "init_step", "init_weight_lo",
                         "init_weight_hi", "seed", "tolerance", "mlp_epochs",
                         "pooled_mlp_epochs", "anfis_epochs", "anfis_step"},
                        "train.");
    maybe(t, "max_epochs", cfg.train.max_epochs);
    maybe(t, "init_step", cfg.train.init_step);
    maybe(t, "init_weight_lo", cfg.train.init_weight_lo);
    maybe(t, "init_weight_hi", cfg.train.init_weight_hi);
    maybe(t, "seed", cfg.train.seed);
    maybe(t, "tolerance", cfg.train.tolerance);
    maybe(t, "mlp_epochs", cfg.mlp_epochs);
    maybe(t, "pooled_mlp_epochs", cfg.pooled_mlp_epochs);
    maybe(t, "anfis_epochs", cfg.anfis_epochs);
    maybe(t, "anfis_step", cfg.anfis_step);
  }
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    reject_unknown_keys(e,
                        {"r2_threshold", "candidate_neurons", "candidate_epochs",
                         "hyper_fixed_epochs", "n_runs"},
                        "eval.");
    maybe(e, "r2_threshold", cfg.r2_threshold);
    maybe(e, "candidate_neurons", cfg.hyper_search.candidate_neurons);
    maybe(e, "candidate_epochs", cfg.hyper_search.candidate_epochs);
    maybe(e, "hyper_fixed_epochs", cfg.hyper_search.fixed_epochs);
    maybe(e, "n_runs", cfg.hyper_search.n_runs);
  }
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    reject_unknown_keys(s, {"noise_sd", "seed"}, "synth.");
    maybe(s, "noise_sd", cfg.synth_noise_sd);
    maybe(s, "seed", cfg.synth_seed);
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    reject_unknown_keys(o, {"threads"}, "output.");
    maybe(o, "threads", cfg.threads);
  }
  cfg.hyper_search.train = cfg.train;
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  auto in = open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::IoError, path.string() + ": " + e.what());
  }
  return parse_pipeline_config(j);
}

SynthSpec synth_spec_from_json(const json& j) {
  SynthSpec spec;
  reject_unknown_keys(j,
                      {"kind", "true_params", "noise_sd", "n_curves", "seed",
                       "site_prefix"},
                      "spec.");
  spec.kind = synth_kind_from_string(j.at("kind").get<std::string>());
  spec.true_params = j.at("true_params").get<std::vector<double>>();
  maybe(j, "noise_sd", spec.noise_sd);
  maybe(j, "n_curves", spec.n_curves);
  maybe(j, "seed", spec.seed);
  maybe(j, "site_prefix", spec.site_prefix);
  return spec;
}

}  // namespace crf
