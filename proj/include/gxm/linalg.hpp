#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gxm {

/// Small row-major dense matrix; transfer matrices here are at most a few
/// thousand states on a side.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<double> apply(std::span<const double> x) const;
  std::vector<double> apply_transpose(std::span<const double> x) const;
  DenseMatrix transpose() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LeadingEigenpair {
  double value = 0.0;
  std::vector<double> vector;  // normalized to max entry 1
  std::size_t iterations = 0;
  bool converged = false;
};

struct PowerIterationOptions {
  double tolerance = 1e-14;
  std::size_t max_iterations = 100000;
};

/// Power iteration for the Perron root of a nonnegative primitive matrix,
/// started from the all-ones vector. Stops once successive Rayleigh quotients
/// differ by less than `tolerance` and the iterate has settled to the same
/// relative level.
LeadingEigenpair perron_eigenpair(const DenseMatrix& m, const PowerIterationOptions& options = {});

/// Largest singular value via power iteration on M^T M from a fixed
/// deterministic start vector; converged when successive estimates of
/// sigma^2 agree to `tolerance` (relative).
struct SingularValueEstimate {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};
SingularValueEstimate top_singular_value(const DenseMatrix& m, const PowerIterationOptions& options = {});

struct LeastSquaresFit {
  std::vector<double> coefficients;
  std::vector<double> residuals;  // y - X beta, in input order
};

/// Ordinary least squares via Householder QR; `design` is row-major with
/// `columns` entries per observation.
LeastSquaresFit least_squares(std::span<const double> design, std::size_t columns, std::span<const double> y);

}  // namespace gxm
