#pragma once

#include <span>
#include <string>
#include <vector>

#include "crf/linalg.hpp"
#include "crf/types.hpp"

namespace crf {

enum class ModelKind {
  Linear,
  NakaRushton,
  ModifiedNakaRushton,
  Mlp,
  Rbf,
  TskFuzzy,
  Anfis,
  Lolimot,
};

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);
bool is_tsk_family(ModelKind kind);

struct HyperParams {
  int n_neurons = 3;      // MLP hidden units
  int n_rules = 2;        // TSK / ANFIS rules
  int n_locals = 2;       // LOLIMOT local models
  double rbf_width = 0.5; // shared sigma for RBF, normalized input scale
};

struct InputRange {
  double lo = 0.0;
  double hi = 1.0;
};

/// Parameter layout per kind (fixed so the optimizer and serialization
/// agree):
///   Linear:              [A, B]
///   NakaRushton:         [R_m, C50, n, B]
///   ModifiedNakaRushton: [R_m, C50, n, B, s]
///   Mlp (n units):       [w_1, b_1, a_1, ..., w_n, b_n, a_n, a_0]
///   Rbf (n centers):     [c_1, a_1, ..., c_n, a_n, a_0]   (shared sigma in hyper)
///   Tsk/Anfis/Lolimot:   [a_1, b_1, c_1, sigma_1, ..., a_M, b_M, c_M, sigma_M]
struct KernelModel {
  ModelKind kind = ModelKind::Linear;
  HyperParams hyper;
  std::vector<double> params;
  InputRange input_range;
};

std::size_t param_count(ModelKind kind, const HyperParams& hyper);

/// (phi - lo) / (hi - lo); throws degenerate-range when lo >= hi.
double normalize_input(double phi, double lo, double hi);
double denormalize_input(double phi_norm, double lo, double hi);

/// Model response at a normalized contrast.
double eval(const KernelModel& model, double phi);

std::vector<double> eval_many(const KernelModel& model, std::span<const double> phi);

/// Analytic d eval / d params, ordered exactly as KernelModel::params.
std::vector<double> gradient(const KernelModel& model, double phi);

struct ResidualJacobian {
  std::vector<double> residuals;  // e(k) = y(k) - yhat(k)
  Mat jacobian;                   // rows are gradient(phi_k)
  double cost = 0.0;              // 0.5 * sum e^2
};

ResidualJacobian residual_jacobian(const KernelModel& model,
                                   std::span<const DataPoint> data);

double sse(const KernelModel& model, std::span<const DataPoint> data);

/// Normalized TSK memberships at phi (max-shifted before exponentiation).
/// Throws degenerate-membership when every exponent underflows.
std::vector<double> tsk_memberships(std::span<const double> centers,
                                    std::span<const double> sigmas, double phi);

}  // namespace crf
