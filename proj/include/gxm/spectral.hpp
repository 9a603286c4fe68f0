#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gxm/extension.hpp"
#include "gxm/gibbs.hpp"
#include "gxm/group.hpp"
#include "gxm/potential.hpp"

namespace gxm {

enum class NormMethod { Auto, FiniteSvd, AbelianFourier, ReturnSequence };
const char* to_string(NormMethod m);
/// "auto", "finite_svd", "abelian_fourier" or "return_sequence".
NormMethod parse_norm_method(const std::string& name);

struct NormOptions {
  /// Number of convolution powers for the return-sequence method.
  std::size_t k_max = 2000;
  /// Absolute pruning threshold for generic convolution powers.
  double prune_eps = 1e-15;
  /// Escalate the pruned-mass warning to a ResourceError.
  bool strict = false;
  std::size_t fourier_points = 1024;
  std::size_t support_cap = std::size_t{1} << 22;
  /// Use the free-group radial shortcut when it applies.
  bool allow_radial = true;
};

/// l2 operator norm of T_n, right convolution by the step distribution p_n.
struct OperatorNormEstimate {
  std::size_t n = 0;
  double norm = 0.0;
  NormMethod method = NormMethod::Auto;
  std::size_t k_used = 0;
  double error_bar = 0.0;
  double pruned_mass = 0.0;
  std::string route;  // "dense", "grid", "radial", "generic"
  std::vector<std::string> warnings;
};

/// Norm of right convolution by `p` on l2(G). `n` is recorded only.
/// Throws InputError when the method does not fit the group.
OperatorNormEstimate convolution_norm(const Group& group, const GroupMeasure& p, NormMethod method,
                                      const NormOptions& options = {}, std::size_t n = 0);

/// Norm of T_n for the Gibbs measure in `rpf`.
OperatorNormEstimate tn_norm(const GroupExtension& ext, const RpfData& rpf, std::size_t n, NormMethod method,
                             const NormOptions& options = {});

struct SpectralRadiusEstimate {
  double log_rho = 0.0;
  /// (n, log ||T_n|| / n).
  std::vector<std::pair<double, double>> per_n;
  std::vector<OperatorNormEstimate> norms;
  double normalization_offset = 0.0;  // P(phi, sigma)
  double error_bar = 0.0;
  double fit_residual = 0.0;
};

/// Normalizes phi, computes ||T_n|| for n in the schedule, fits
/// log ||T_n|| ~ n r + d and returns r + P(phi, sigma).
SpectralRadiusEstimate spectral_radius(const GroupExtension& ext, const Potential& pot,
                                       const std::vector<std::size_t>& schedule, NormMethod method = NormMethod::Auto,
                                       const NormOptions& options = {});

/// n-fold transfer operator applied to a depth-1 table f, evaluated on
/// cylinders: entry (j, g) bounds (L^n f)(x, g) over x in [j] by using the
/// sup or inf of S_n phi over [w j] for each contributing word w.
SkewTable transfer_apply(const GroupExtension& ext, const Potential& pot, const SkewTable& f, std::size_t n,
                         Bound bound);

/// g -> integral of f(., g) against the Gibbs measure.
GroupMeasure average_project(const SkewTable& f, const RpfData& rpf);

struct ReturnAuditRow {
  std::size_t n = 0;
  double norm = 0.0;
  double norm_error = 0.0;
  std::string norm_route;
  /// Lower bound for the transfer operator on the fiber indicator of id.
  double test_lower_bound = 0.0;
  /// (T_n delta_id, delta_id) = p_n(id).
  double return_value = 0.0;
  double sandwich_lo = 0.0;
  double sandwich_hi = 0.0;
  double log_return_rate = 0.0;  // log p_n(id) / n
  double log_sup_rate = 0.0;     // log Z_n^sup(id) / n
  std::optional<double> enumerated;
  bool lower_ok = false;     // ||T_n|| >= test_lower_bound / C
  bool upper_ok = false;     // ||T_n|| <= C
  bool sandwich_ok = false;  // sandwich_lo <= p_n(id) <= sandwich_hi
  bool rate_ok = false;      // rates agree within log(C) / n
  bool enumeration_ok = true;
};

struct ReturnAuditReport {
  double c_hat = 1.0;
  std::size_t gibbs_depth = 0;
  std::vector<ReturnAuditRow> rows;
  std::vector<std::string> failures;
  bool passed() const { return failures.empty(); }
};

struct ReturnAuditOptions {
  NormOptions norm;
  double tolerance = 1e-9;
  /// Enumeration cross-check runs when alphabet^n stays below this.
  std::size_t enumeration_limit = std::size_t{1} << 20;
};

/// Checks, for n = 1..n_max on the normalized potential, the operator-norm
/// bounds against the empirical Gibbs constant and the identity-return
/// sandwich. Throws InputError for n_max outside [1, 12].
ReturnAuditReport return_audit(const GroupExtension& ext, const Potential& pot, std::size_t n_max,
                            const ReturnAuditOptions& options = {});

}  // namespace gxm
