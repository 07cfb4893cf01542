#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crf/eval.hpp"
#include "crf/preprocess.hpp"
#include "crf/synth.hpp"

#include "json.hpp"

namespace crf {

using json = nlohmann::json;

json model_to_json(const KernelModel& model);
KernelModel model_from_json(const json& j);

// ---- curves.csv: site_id,contrast,response,n_trials ----
void write_curves_csv(const std::filesystem::path& path,
                      std::span<const TuningCurve> curves);
std::vector<TuningCurve> read_curves_csv(const std::filesystem::path& path);

// ---- raw trial files: header site_id,contrast,onset_index,sample_rate then
//      one sample per line; manifest.json lists the trial files ----
void write_raw_recording(const std::filesystem::path& dir,
                         const RawRecording& rec);
std::vector<RawRecording> read_raw_input(const std::filesystem::path& path);

struct ClassRow {
  std::string site_id;
  std::optional<double> mi;  // empty for flat (unclassifiable) curves
  std::string label;         // "supersaturating" | "monotone" | "skipped"
};
void write_classes_csv(const std::filesystem::path& path,
                       std::span<const ClassRow> rows);

json fit_result_to_json(const FitResult& result);
json comparison_to_json(const ComparisonTable& table);
void write_table1_csv(const std::filesystem::path& path,
                      const ComparisonTable& table);

json hyper_result_to_json(const HyperSearchResult& result);

/// Ground-truth sidecar for synthetic corpora.
json labeled_curves_to_json(std::span<const LabeledCurve> curves);

// ---- pipeline configuration ----
struct PipelineConfig {
  PreprocessConfig preprocess;
  std::vector<ModelKind> kinds = {
      ModelKind::Linear,        ModelKind::NakaRushton,
      ModelKind::ModifiedNakaRushton, ModelKind::Mlp,
      ModelKind::Rbf,           ModelKind::TskFuzzy,
      ModelKind::Anfis,         ModelKind::Lolimot};
  HyperParams hyper;
  TrainConfig train;
  int mlp_epochs = 12;         // per-curve LOOCV training
  int pooled_mlp_epochs = 3;   // pooled-workflow MLP
  int anfis_epochs = 1;
  double anfis_step = 0.01;
  double r2_threshold = 0.6;
  HyperSearchConfig hyper_search;
  double synth_noise_sd = kDefaultCorpusNoiseSd;
  std::uint64_t synth_seed = kDefaultCorpusSeed;
  int threads = 1;

  KindConfig kind_config() const {
    KindConfig kc;
    kc.hyper = hyper;
    kc.train = train;
    kc.mlp_epochs = mlp_epochs;
    kc.anfis_epochs = anfis_epochs;
    kc.anfis_step = anfis_step;
    return kc;
  }
  EvalConfig eval_config() const {
    EvalConfig ec;
    ec.kind_config = kind_config();
    ec.r2_threshold = r2_threshold;
    ec.threads = threads;
    return ec;
  }
};

/// Parse from JSON; unknown keys are rejected with the offending name.
PipelineConfig parse_pipeline_config(const json& j);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

SynthSpec synth_spec_from_json(const json& j);

std::string format_double(double v);

}  // namespace crf
