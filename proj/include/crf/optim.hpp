#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crf/models.hpp"
#include "crf/types.hpp"

namespace crf {

struct TrainConfig {
  int max_epochs = 200;
  double init_step = 0.01;           // initial LM damping mu_0
  double init_weight_lo = -0.6;
  double init_weight_hi = 0.6;
  std::uint64_t seed = 0;
  double tolerance = 1e-12;          // relative cost improvement stop
};

struct LMState {
  std::vector<double> theta;
  double mu = 0.01;
  int iteration = 0;
  std::vector<double> cost_history;  // J values, strictly decreasing over accepts
};

struct LMOptions {
  int max_inflations = 20;
  // applied to every candidate before evaluating its cost (box constraints)
  std::function<void(std::vector<double>&)> project;
};

struct LMStepResult {
  LMState state;
  bool accepted = false;   // a strictly lower-cost theta was taken
  bool converged = false;  // gradient vanished or no decrease was possible
};

LMState make_lm_state(const KernelModel& shape, std::span<const DataPoint> data,
                      std::vector<double> theta, double mu0);

/// One damped Gauss-Newton update with the x10 / /10 mu schedule. `shape`
/// supplies kind/hyper; theta comes from the state.
LMStepResult lm_step(const KernelModel& shape, std::span<const DataPoint> data,
                     LMState state, const LMOptions& options = {});

struct EpochRecord {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;  // NaN when no validation data
};

struct FittedModel {
  KernelModel model;
  std::vector<EpochRecord> trace;
  double train_cost = 0.0;  // final J on the training set
  bool converged = false;
  std::vector<std::string> warnings;
  int selected_centers = 0;  // RBF only: how many centers OLS actually kept
};

FittedModel train_mlp(std::span<const DataPoint> train,
                      std::span<const DataPoint> val, int n_neurons,
                      const TrainConfig& config,
                      const std::vector<double>* warm_start = nullptr);

FittedModel fit_rbf_ols(std::span<const DataPoint> train, int n_centers,
                        double width);

FittedModel fit_fuzzy_grid(std::span<const DataPoint> train, int n_rules);

FittedModel train_anfis(std::span<const DataPoint> train,
                        std::span<const DataPoint> val, int n_rules, int epochs,
                        double step = 0.01,
                        const std::vector<double>* warm_start = nullptr);

FittedModel fit_lolimot(std::span<const DataPoint> train, int nl_max);

FittedModel fit_classic(std::span<const DataPoint> train, ModelKind kind,
                        const TrainConfig& config,
                        const std::vector<double>* warm_start = nullptr);

/// Uniform grid premise layout shared by the fuzzy-family estimators:
/// centers over [0,1], sigmas at half the grid spacing (0.5 when M == 1).
void grid_premise(int n_rules, std::vector<double>& centers,
                  std::vector<double>& sigmas);

/// Per-kind knobs for the dispatcher.
struct KindConfig {
  HyperParams hyper;
  TrainConfig train;
  int mlp_epochs = 12;
  int anfis_epochs = 1;
  double anfis_step = 0.01;
};

FittedModel fit_any(std::span<const DataPoint> train,
                    std::span<const DataPoint> val, ModelKind kind,
                    const KindConfig& config,
                    const std::vector<double>* warm_start = nullptr);

}  // namespace crf
