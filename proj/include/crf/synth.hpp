#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crf/models.hpp"
#include "crf/preprocess.hpp"
#include "crf/types.hpp"

namespace crf {

enum class SynthKind { Linear, Saturating, Supersaturating };

const char* to_string(SynthKind kind);
SynthKind synth_kind_from_string(const std::string& name);

/// Ground-truth generator description. `true_params` follow the layouts of
/// the Linear / Naka-Rushton / modified Naka-Rushton models and act on
/// contrast normalized to [0, 1] over the grid span.
struct SynthSpec {
  SynthKind kind = SynthKind::Supersaturating;
  std::vector<double> true_params;
  double noise_sd = 0.15;
  int n_curves = 1;
  std::uint64_t seed = 0;
  std::string site_prefix = "site";
};

ModelKind generator_model_kind(SynthKind kind);
KernelModel generator_model(const SynthSpec& spec,
                            const std::vector<double>& grid);

struct LabeledCurve {
  TuningCurve curve;
  SynthKind kind = SynthKind::Supersaturating;
  std::vector<double> true_params;
};

std::vector<LabeledCurve> gen_curves(const SynthSpec& spec,
                                     const std::vector<double>& grid);

struct TrialLayout {
  double pre_pad_ms = 100.0;     // settle room before the baseline window
  double baseline_ms = 200.0;
  double stimulus_ms = 2000.0;
  int n_trials = 20;
};

/// Raw-trace oracle: baseline is white noise normalized to an exact band
/// power; the stimulus window adds an in-band tone whose amplitude makes
/// the analytic SNR equal the true model response at each contrast.
RawRecording gen_raw(const SynthSpec& spec, double carrier_hz,
                     double sample_rate, const TrialLayout& layout,
                     const std::vector<double>& grid, const BandHz& band);

/// The shipped 66-site corpus: 28 supersaturating, 18 linear and 20
/// saturating generators with fixed parameter tables; only the noise
/// realization depends on the seed.
std::vector<SynthSpec> default_corpus_specs(std::uint64_t seed, double noise_sd);
std::vector<LabeledCurve> default_corpus(std::uint64_t seed, double noise_sd);

extern const std::vector<double> kDefaultContrastGrid;
extern const std::uint64_t kDefaultCorpusSeed;
constexpr double kDefaultCorpusNoiseSd = 0.15;

}  // namespace crf
