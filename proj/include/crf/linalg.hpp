#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace crf {

/// Dense row-major matrix. Sizes in this project are tiny (at most a few
/// hundred rows and ~20 columns), so no attempt is made at blocking or
/// factorization reuse.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// A^T A for a tall matrix.
Mat gram(const Mat& a);

/// A^T b.
std::vector<double> mat_tvec(const Mat& a, std::span<const double> b);

/// A x.
std::vector<double> mat_vec(const Mat& a, std::span<const double> x);

/// Solve A x = b by LU with partial pivoting. Returns nullopt when the
/// pivot collapses (singular to working precision).
std::optional<std::vector<double>> try_solve(Mat a, std::vector<double> b);

/// Least squares via Householder QR. Rank-deficient systems fall back to a
/// small ridge on the normal equations; `rank_warning` (optional) is set in
/// that case.
std::vector<double> lstsq(const Mat& a, std::span<const double> b,
                          bool* rank_warning = nullptr);

/// Row-weighted least squares: minimizes sum_i w_i (b_i - a_i . x)^2.
std::vector<double> weighted_lstsq(const Mat& a, std::span<const double> b,
                                   std::span<const double> w,
                                   bool* rank_warning = nullptr);

}  // namespace crf
