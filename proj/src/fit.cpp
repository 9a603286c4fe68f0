#include "gxm/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gxm/error.hpp"
#include "gxm/linalg.hpp"

namespace gxm {

namespace {

struct TailFit {
  double rate = 0.0;
  double log_coefficient = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  std::size_t points = 0;
};

TailFit fit_points(const std::vector<std::pair<double, double>>& pts) {
  TailFit out;
  out.points = pts.size();
  if (pts.size() == 1) {
    out.rate = pts[0].second / pts[0].first;
    return out;
  }
  const std::size_t cols = pts.size() >= 3 ? 3 : 2;
  std::vector<double> design, y;
  design.reserve(pts.size() * cols);
  for (const auto& [n, v] : pts) {
    design.push_back(n);
    if (cols == 3) design.push_back(std::log(n));
    design.push_back(1.0);
    y.push_back(v);
  }
  const auto ls = least_squares(design, cols, y);
  out.rate = ls.coefficients[0];
  if (cols == 3) {
    out.log_coefficient = ls.coefficients[1];
    out.intercept = ls.coefficients[2];
  } else {
    out.intercept = ls.coefficients[1];
  }
  for (double r : ls.residuals) out.max_residual = std::max(out.max_residual, std::abs(r));
  return out;
}

std::vector<std::pair<double, double>> tail(const std::vector<std::pair<double, double>>& pts, double fraction) {
  const double last = pts.back().first;
  const double cut = last * (1.0 - fraction);
  std::vector<std::pair<double, double>> out;
  for (const auto& p : pts) {
    if (p.first > cut) out.push_back(p);
  }
  if (out.empty()) out.push_back(pts.back());
  return out;
}

}  // namespace

GrowthFit fit_growth(std::span<const std::pair<double, double>> sequence) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : sequence) {
    if (std::isfinite(p.second) && p.first > 0) pts.push_back(p);
  }
  if (pts.empty()) throw PreconditionError("growth fit: every term of the sequence is zero");
  std::sort(pts.begin(), pts.end());

  GrowthFit out;
  long g = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    g = std::gcd(g, std::lround(pts[i].first - pts[i - 1].first));
  }
  out.period = static_cast<std::size_t>(g);
  out.raw_rate = pts.back().second / pts.back().first;

  const TailFit half = fit_points(tail(pts, 0.5));
  out.rate = half.rate;
  out.log_coefficient = half.log_coefficient;
  out.intercept = half.intercept;
  out.max_residual = half.max_residual;
  out.points = half.points;
  const auto quarter_pts = tail(pts, 0.25);
  if (quarter_pts.size() >= 3) {
    out.stability = std::abs(fit_points(quarter_pts).rate - half.rate);
  } else if (pts.size() >= 2) {
    out.stability = std::abs(out.raw_rate - half.rate);
  }
  return out;
}

double growth_error_bar(const GrowthFit& fit, double largest_index) {
  return fit.stability + fit.max_residual / std::max(1.0, largest_index);
}

}  // namespace gxm
