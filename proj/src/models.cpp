#include "crf/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crf/error.hpp"

namespace crf {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// C^p with C = 0 treated as exact 0 for p > 0 (avoids 0 * log(0) NaNs).
double pow_safe(double c, double p) {
  if (c == 0.0) return 0.0;
  return std::exp(p * std::log(c));
}

struct TskView {
  // strided views into the 4M parameter vector
  std::span<const double> params;
  int rules;
  double a(int i) const { return params[4 * i]; }
  double b(int i) const { return params[4 * i + 1]; }
  double c(int i) const { return params[4 * i + 2]; }
  double sigma(int i) const { return params[4 * i + 3]; }
};

void check_params(const KernelModel& m) {
  const std::size_t want = param_count(m.kind, m.hyper);
  if (m.params.size() != want)
    fail(ErrorKind::InvalidConfig,
         "param vector length " + std::to_string(m.params.size()) +
             " does not match kind (expected " + std::to_string(want) + ")");
}

}  // namespace

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Linear: return "linear";
    case ModelKind::NakaRushton: return "naka_rushton";
    case ModelKind::ModifiedNakaRushton: return "modified_naka_rushton";
    case ModelKind::Mlp: return "mlp";
    case ModelKind::Rbf: return "rbf";
    case ModelKind::TskFuzzy: return "tsk_fuzzy";
    case ModelKind::Anfis: return "anfis";
    case ModelKind::Lolimot: return "lolimot";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (ModelKind k : {ModelKind::Linear, ModelKind::NakaRushton,
                      ModelKind::ModifiedNakaRushton, ModelKind::Mlp,
                      ModelKind::Rbf, ModelKind::TskFuzzy, ModelKind::Anfis,
                      ModelKind::Lolimot}) {
    if (name == to_string(k)) return k;
  }
  fail(ErrorKind::InvalidConfig, "unknown model kind '" + name + "'");
}

bool is_tsk_family(ModelKind kind) {
  return kind == ModelKind::TskFuzzy || kind == ModelKind::Anfis ||
         kind == ModelKind::Lolimot;
}

std::size_t param_count(ModelKind kind, const HyperParams& hyper) {
  switch (kind) {
    case ModelKind::Linear: return 2;
    case ModelKind::NakaRushton: return 4;
    case ModelKind::ModifiedNakaRushton: return 5;
    case ModelKind::Mlp: return 3 * static_cast<std::size_t>(hyper.n_neurons) + 1;
    case ModelKind::Rbf: return 2 * static_cast<std::size_t>(hyper.n_neurons) + 1;
    case ModelKind::TskFuzzy:
    case ModelKind::Anfis: return 4 * static_cast<std::size_t>(hyper.n_rules);
    case ModelKind::Lolimot: return 4 * static_cast<std::size_t>(hyper.n_locals);
  }
  return 0;
}

double normalize_input(double phi, double lo, double hi) {
  if (!(lo < hi)) fail(ErrorKind::DegenerateRange, "phi_min must be < phi_max");
  return (phi - lo) / (hi - lo);
}

double denormalize_input(double phi_norm, double lo, double hi) {
  if (!(lo < hi)) fail(ErrorKind::DegenerateRange, "phi_min must be < phi_max");
  return lo + phi_norm * (hi - lo);
}

std::vector<double> tsk_memberships(std::span<const double> centers,
                                    std::span<const double> sigmas, double phi) {
  const std::size_t m = centers.size();
  std::vector<double> expo(m);
  double emax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double d = phi - centers[i];
    expo[i] = -(d * d) / (2.0 * sigmas[i] * sigmas[i]);
    emax = std::max(emax, expo[i]);
  }
  if (!std::isfinite(emax))
    fail(ErrorKind::DegenerateMembership,
         "all memberships vanish at phi=" + std::to_string(phi));
  std::vector<double> w(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    w[i] = std::exp(expo[i] - emax);
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

double eval(const KernelModel& model, double phi) {
  check_params(model);
  const auto& p = model.params;
  switch (model.kind) {
    case ModelKind::Linear:
      return p[0] * phi + p[1];
    case ModelKind::NakaRushton: {
      const double u = pow_safe(phi, p[2]);
      const double v = pow_safe(p[1], p[2]);
      return p[0] * (u == 0.0 && v == 0.0 ? 0.0 : u / (u + v)) + p[3];
    }
    case ModelKind::ModifiedNakaRushton: {
      const double sn = p[4] * p[2];
      const double u = pow_safe(phi, p[2]);
      const double pp = pow_safe(phi, sn);
      const double q = pow_safe(p[1], sn);
      return p[0] * (u == 0.0 ? 0.0 : u / (pp + q)) + p[3];
    }
    case ModelKind::Mlp: {
      const int n = model.hyper.n_neurons;
      double y = p[3 * n];
      for (int i = 0; i < n; ++i)
        y += p[3 * i + 2] * sigmoid(p[3 * i] * phi + p[3 * i + 1]);
      return y;
    }
    case ModelKind::Rbf: {
      const int n = model.hyper.n_neurons;
      const double s2 = 2.0 * model.hyper.rbf_width * model.hyper.rbf_width;
      double y = p[2 * n];
      for (int i = 0; i < n; ++i) {
        const double d = phi - p[2 * i];
        y += p[2 * i + 1] * std::exp(-(d * d) / s2);
      }
      return y;
    }
    case ModelKind::TskFuzzy:
    case ModelKind::Anfis:
    case ModelKind::Lolimot: {
      const int m = static_cast<int>(model.params.size() / 4);
      TskView v{p, m};
      std::vector<double> centers(m), sigmas(m);
      for (int i = 0; i < m; ++i) {
        centers[i] = v.c(i);
        sigmas[i] = v.sigma(i);
      }
      const auto h = tsk_memberships(centers, sigmas, phi);
      double y = 0.0;
      for (int i = 0; i < m; ++i) y += h[i] * (v.a(i) * phi + v.b(i));
      return y;
    }
  }
  fail(ErrorKind::InvalidConfig, "unreachable model kind");
}

std::vector<double> eval_many(const KernelModel& model, std::span<const double> phi) {
  std::vector<double> out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) out[i] = eval(model, phi[i]);
  return out;
}

std::vector<double> gradient(const KernelModel& model, double phi) {
  check_params(model);
  const auto& p = model.params;
  std::vector<double> g(p.size(), 0.0);
  switch (model.kind) {
    case ModelKind::Linear:
      g[0] = phi;
      g[1] = 1.0;
      return g;
    case ModelKind::NakaRushton: {
      const double rm = p[0], c50 = p[1], n = p[2];
      g[3] = 1.0;
      if (phi == 0.0) return g;  // response is exactly B there
      const double u = pow_safe(phi, n);
      const double v = pow_safe(c50, n);
      const double den = (u + v) * (u + v);
      g[0] = u / (u + v);
      g[1] = -rm * u * n * pow_safe(c50, n - 1.0) / den;
      const double du = u * std::log(phi);
      const double dv = v * std::log(c50);
      g[2] = rm * (du * v - u * dv) / den;
      return g;
    }
    case ModelKind::ModifiedNakaRushton: {
      const double rm = p[0], c50 = p[1], n = p[2], s = p[4];
      g[3] = 1.0;
      if (phi == 0.0) return g;
      const double sn = s * n;
      const double lphi = std::log(phi);
      const double lc = std::log(c50);
      const double u = pow_safe(phi, n);
      const double pp = pow_safe(phi, sn);
      const double q = pow_safe(c50, sn);
      const double den = (pp + q) * (pp + q);
      g[0] = u / (pp + q);
      g[1] = -rm * u * sn * pow_safe(c50, sn - 1.0) / den;
      const double du_dn = u * lphi;
      const double dp_dn = pp * s * lphi;
      const double dq_dn = q * s * lc;
      g[2] = rm * (du_dn * (pp + q) - u * (dp_dn + dq_dn)) / den;
      const double dp_ds = pp * n * lphi;
      const double dq_ds = q * n * lc;
      g[4] = -rm * u * (dp_ds + dq_ds) / den;
      return g;
    }
    case ModelKind::Mlp: {
      const int n = model.hyper.n_neurons;
      for (int i = 0; i < n; ++i) {
        const double si = sigmoid(p[3 * i] * phi + p[3 * i + 1]);
        const double ds = si * (1.0 - si);
        g[3 * i] = p[3 * i + 2] * ds * phi;
        g[3 * i + 1] = p[3 * i + 2] * ds;
        g[3 * i + 2] = si;
      }
      g[3 * n] = 1.0;
      return g;
    }
    case ModelKind::Rbf: {
      const int n = model.hyper.n_neurons;
      const double sig = model.hyper.rbf_width;
      for (int i = 0; i < n; ++i) {
        const double d = phi - p[2 * i];
        const double r = std::exp(-(d * d) / (2.0 * sig * sig));
        g[2 * i] = p[2 * i + 1] * r * d / (sig * sig);
        g[2 * i + 1] = r;
      }
      g[2 * n] = 1.0;
      return g;
    }
    case ModelKind::TskFuzzy:
    case ModelKind::Anfis:
    case ModelKind::Lolimot: {
      const int m = static_cast<int>(p.size() / 4);
      TskView v{p, m};
      std::vector<double> centers(m), sigmas(m);
      for (int i = 0; i < m; ++i) {
        centers[i] = v.c(i);
        sigmas[i] = v.sigma(i);
      }
      const auto h = tsk_memberships(centers, sigmas, phi);
      double y = 0.0;
      for (int i = 0; i < m; ++i) y += h[i] * (v.a(i) * phi + v.b(i));
      for (int i = 0; i < m; ++i) {
        const double li = v.a(i) * phi + v.b(i);
        const double d = phi - v.c(i);
        const double s2 = v.sigma(i) * v.sigma(i);
        g[4 * i] = h[i] * phi;
        g[4 * i + 1] = h[i];
        g[4 * i + 2] = (li - y) * h[i] * d / s2;
        g[4 * i + 3] = (li - y) * h[i] * d * d / (s2 * v.sigma(i));
      }
      return g;
    }
  }
  fail(ErrorKind::InvalidConfig, "unreachable model kind");
}

ResidualJacobian residual_jacobian(const KernelModel& model,
                                   std::span<const DataPoint> data) {
  if (data.empty()) fail(ErrorKind::DataError, "empty data set");
  ResidualJacobian out;
  out.residuals.resize(data.size());
  out.jacobian = Mat(data.size(), model.params.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    out.residuals[k] = data[k].y - eval(model, data[k].phi);
    const auto g = gradient(model, data[k].phi);
    for (std::size_t j = 0; j < g.size(); ++j) out.jacobian(k, j) = g[j];
    out.cost += 0.5 * out.residuals[k] * out.residuals[k];
  }
  return out;
}

double sse(const KernelModel& model, std::span<const DataPoint> data) {
  double total = 0.0;
  for (const auto& d : data) {
    const double e = d.y - eval(model, d.phi);
    total += e * e;
  }
  return total;
}

}  // namespace crf
