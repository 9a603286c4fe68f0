#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace gxm {

/// Exponential growth rate of a sequence given as (n, log a_n) pairs, fitted
/// with the power-law-corrected model
///
///   log a_n ~ rate * n + c * log n + d
///
/// on the tail of the supported terms. Terms with log a_n = -inf (a_n = 0)
/// are dropped first, so sequences supported on an arithmetic progression
/// are fitted on that progression only.
struct GrowthFit {
  double rate = 0.0;
  double log_coefficient = 0.0;
  double intercept = 0.0;
  /// Largest |residual| of the tail fit, in log units.
  double max_residual = 0.0;
  /// |rate(tail half) - rate(last quarter)|; a cheap convergence indicator.
  double stability = 0.0;
  /// log a_N / N at the last supported term.
  double raw_rate = 0.0;
  std::size_t points = 0;
  /// gcd of the gaps between supported indices.
  std::size_t period = 0;
};

/// Throws PreconditionError when no term is supported.
GrowthFit fit_growth(std::span<const std::pair<double, double>> sequence);

/// Heuristic error bar for a fitted rate: stability plus the worst tail
/// residual spread over the largest index.
double growth_error_bar(const GrowthFit& fit, double largest_index);

}  // namespace gxm
