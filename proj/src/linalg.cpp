#include "gxm/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "gxm/error.hpp"

namespace gxm {

std::vector<double> DenseMatrix::apply(std::span<const double> x) const {
  std::vector<double> y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    const double* row = data_.data() + r * cols_;
    for (std::size_t c = 0; c < cols_; ++c) s += row[c] * x[c];
    y[r] = s;
  }
  return y;
}

std::vector<double> DenseMatrix::apply_transpose(std::span<const double> x) const {
  std::vector<double> y(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* row = data_.data() + r * cols_;
    for (std::size_t c = 0; c < cols_; ++c) y[c] += row[c] * x[r];
  }
  return y;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void scale_to_max_one(std::vector<double>& v) {
  double mx = 0.0;
  for (double x : v) mx = std::max(mx, std::abs(x));
  if (mx > 0.0) {
    for (double& x : v) x /= mx;
  }
}

}  // namespace

LeadingEigenpair perron_eigenpair(const DenseMatrix& m, const PowerIterationOptions& options) {
  if (m.rows() != m.cols() || m.rows() == 0) throw InputError("perron_eigenpair: matrix must be square and nonempty");
  LeadingEigenpair out;
  std::vector<double> v(m.rows(), 1.0);
  double previous = 0.0;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    std::vector<double> w = m.apply(v);
    const double rayleigh = dot(v, w) / dot(v, v);
    scale_to_max_one(w);
    double change = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) change = std::max(change, std::abs(w[i] - v[i]));
    v.swap(w);
    out.iterations = it;
    if (it > 1 && std::abs(rayleigh - previous) < options.tolerance * std::max(1.0, std::abs(rayleigh)) &&
        change < 10.0 * options.tolerance) {
      out.converged = true;
      previous = rayleigh;
      break;
    }
    previous = rayleigh;
  }
  // Final eigenvalue from the settled iterate.
  const std::vector<double> w = m.apply(v);
  out.value = dot(v, w) / dot(v, v);
  out.vector = std::move(v);
  return out;
}

SingularValueEstimate top_singular_value(const DenseMatrix& m, const PowerIterationOptions& options) {
  SingularValueEstimate out;
  if (m.rows() == 0 || m.cols() == 0) return out;
  std::vector<double> v(m.cols());
  // Deterministic start with a full-support perturbation so no eigendirection
  // of M^T M is missed by symmetry.
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.25 * std::sin(1.0 + static_cast<double>(i));
  double previous = 0.0;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    const double norm_v = std::sqrt(dot(v, v));
    for (double& x : v) x /= norm_v;
    const std::vector<double> mv = m.apply(v);
    std::vector<double> w = m.apply_transpose(mv);
    const double sigma2 = dot(v, w);
    out.iterations = it;
    v.swap(w);
    if (it > 1 && std::abs(sigma2 - previous) <= options.tolerance * std::max(1.0, sigma2)) {
      out.converged = true;
      previous = sigma2;
      break;
    }
    previous = sigma2;
  }
  out.value = std::sqrt(std::max(0.0, previous));
  return out;
}

LeastSquaresFit least_squares(std::span<const double> design, std::size_t columns, std::span<const double> y) {
  const std::size_t n = y.size();
  if (columns == 0 || design.size() != n * columns || n < columns) {
    throw InputError("least_squares: need at least as many observations as unknowns");
  }
  std::vector<double> a(design.begin(), design.end());
  std::vector<double> b(y.begin(), y.end());
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * columns + c]; };
  for (std::size_t k = 0; k < columns; ++k) {
    double norm = 0.0;
    for (std::size_t r = k; r < n; ++r) norm += at(r, k) * at(r, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) throw InputError("least_squares: rank-deficient design");
    const double alpha = at(k, k) > 0 ? -norm : norm;
    std::vector<double> u(n - k);
    for (std::size_t r = k; r < n; ++r) u[r - k] = at(r, k);
    u[0] -= alpha;
    const double unorm2 = dot(u, u);
    if (unorm2 == 0.0) continue;
    for (std::size_t c = k; c < columns; ++c) {
      double s = 0.0;
      for (std::size_t r = k; r < n; ++r) s += u[r - k] * at(r, c);
      s = 2.0 * s / unorm2;
      for (std::size_t r = k; r < n; ++r) at(r, c) -= s * u[r - k];
    }
    double s = 0.0;
    for (std::size_t r = k; r < n; ++r) s += u[r - k] * b[r];
    s = 2.0 * s / unorm2;
    for (std::size_t r = k; r < n; ++r) b[r] -= s * u[r - k];
  }
  LeastSquaresFit fit;
  fit.coefficients.assign(columns, 0.0);
  for (std::size_t k = columns; k-- > 0;) {
    double s = b[k];
    for (std::size_t c = k + 1; c < columns; ++c) s -= at(k, c) * fit.coefficients[c];
    fit.coefficients[k] = s / at(k, k);
  }
  fit.residuals.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    double pred = 0.0;
    for (std::size_t c = 0; c < columns; ++c) pred += design[r * columns + c] * fit.coefficients[c];
    fit.residuals[r] = y[r] - pred;
  }
  return fit;
}

}  // namespace gxm
