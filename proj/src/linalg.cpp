#include "crf/linalg.hpp"

#include <cmath>
#include <utility>

namespace crf {

Mat gram(const Mat& a) {
  const std::size_t n = a.cols();
  Mat g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * a(k, j);
      g(i, j) = s;
      g(j, i) = s;
    }
  }
  return g;
}

std::vector<double> mat_tvec(const Mat& a, std::span<const double> b) {
  std::vector<double> out(a.cols(), 0.0);
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double bk = b[k];
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a(k, j) * bk;
  }
  return out;
}

std::vector<double> mat_vec(const Mat& a, std::span<const double> x) {
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    out[i] = s;
  }
  return out;
}

std::optional<std::vector<double>> try_solve(Mat a, std::vector<double> b) {
  const std::size_t n = a.rows();
  if (n != a.cols() || b.size() != n) return std::nullopt;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::fabs(a(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::fabs(a(r, col));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < 1e-300) return std::nullopt;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(pivot, c));
      std::swap(b[col], b[pivot]);
    }
    const double inv = 1.0 / a(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) * inv;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }

  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

// Householder QR least squares; rank deficiency falls back to a tiny ridge
// on the normal equations and sets the warning flag.
std::vector<double> lstsq(const Mat& a, std::span<const double> b,
                          bool* rank_warning) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Mat r = a;
  std::vector<double> qb(b.begin(), b.end());

  double col_scale = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i)
      col_scale = std::max(col_scale, std::fabs(r(i, j)));
  if (col_scale == 0.0) col_scale = 1.0;

  bool deficient = m < n;
  for (std::size_t k = 0; k < n && k < m && !deficient; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < m; ++i) norm += r(i, k) * r(i, k);
    norm = std::sqrt(norm);
    if (norm < 1e-13 * col_scale) {
      deficient = true;
      break;
    }
    const double alpha = r(k, k) >= 0 ? -norm : norm;
    std::vector<double> v(m - k);
    v[0] = r(k, k) - alpha;
    for (std::size_t i = k + 1; i < m; ++i) v[i - k] = r(i, k);
    double vnorm2 = 0.0;
    for (double x : v) vnorm2 += x * x;
    if (vnorm2 == 0.0) {
      deficient = true;
      break;
    }
    for (std::size_t j = k; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < m; ++i) dot += v[i - k] * r(i, j);
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < m; ++i) r(i, j) -= f * v[i - k];
    }
    double dot = 0.0;
    for (std::size_t i = k; i < m; ++i) dot += v[i - k] * qb[i];
    const double f = 2.0 * dot / vnorm2;
    for (std::size_t i = k; i < m; ++i) qb[i] -= f * v[i - k];
  }

  if (!deficient) {
    std::vector<double> x(n, 0.0);
    bool back_ok = true;
    for (std::size_t i = n; i-- > 0;) {
      double s = qb[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= r(i, j) * x[j];
      if (std::fabs(r(i, i)) < 1e-13 * col_scale) {
        back_ok = false;
        break;
      }
      x[i] = s / r(i, i);
    }
    if (back_ok) return x;
    deficient = true;
  }

  if (rank_warning) *rank_warning = true;
  Mat g = gram(a);
  auto rhs = mat_tvec(a, b);
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, std::fabs(g(i, i)));
  double ridge = (dmax > 0 ? dmax : 1.0) * 1e-10;
  for (;;) {
    Mat gr = g;
    for (std::size_t i = 0; i < n; ++i) gr(i, i) += ridge;
    if (auto x = try_solve(gr, rhs)) return *x;
    ridge *= 10;
  }
}

std::vector<double> weighted_lstsq(const Mat& a, std::span<const double> b,
                                   std::span<const double> w,
                                   bool* rank_warning) {
  Mat scaled = a;
  std::vector<double> bs(b.begin(), b.end());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double s = std::sqrt(std::max(w[k], 0.0));
    for (std::size_t j = 0; j < a.cols(); ++j) scaled(k, j) *= s;
    bs[k] *= s;
  }
  return lstsq(scaled, bs, rank_warning);
}

}  // namespace crf
