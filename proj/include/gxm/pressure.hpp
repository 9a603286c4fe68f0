#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gxm/extension.hpp"
#include "gxm/fit.hpp"
#include "gxm/potential.hpp"
#include "gxm/shift.hpp"

namespace gxm {

enum class PressureMethod { ExactSpectral, SequenceExtrapolation };
const char* to_string(PressureMethod m);

struct PressureEstimate {
  double value = 0.0;
  PressureMethod method = PressureMethod::ExactSpectral;
  /// (n, log Z_n) for the supported terms.
  std::vector<std::pair<double, double>> sequence;
  /// log Z_N / N at the last supported term.
  double raw_rate = 0.0;
  double fit_residual = 0.0;
  double error_bar = 0.0;
  /// "matrix", "radial" or "dp".
  std::string route;
  /// exp(log_pruned) / Z_n at the largest n, 0 without pruning.
  double pruned_fraction = 0.0;
};

enum class ZFlavor { Standard, FirstReturn };

/// Sum over words w of length n with w_1 = a and w a admissible of
/// exp(sup S_n phi over [w]); FirstReturn also forbids a at positions 2..n.
double z_n(const Shift& shift, const Potential& pot, Letter a, std::size_t n, ZFlavor flavor = ZFlavor::Standard);

/// Log of the Perron root of the weighted transfer matrix; the sequence
/// field carries (n, log Z_n(phi, 1)) for n <= n_check as a cross-check.
/// Throws PreconditionError on a non-mixing shift.
PressureEstimate pressure_base(const Shift& shift, const Potential& pot, std::size_t n_check = 20);

struct ExtensionPressureOptions {
  std::size_t n_max = 200;
  double prune_eps = 0.0;
  std::size_t probe_depth = 8;
  /// Skip the irreducibility probe requirement.
  bool override_probe = false;
  /// Use the free-group radial shortcut when it applies.
  bool allow_radial = true;
  std::size_t pool_cap = std::size_t{1} << 23;
};

/// Growth rate of Z_n restricted to Psi(w) = id with start and return
/// letter a. Throws PreconditionError when the probe is not Proven (unless
/// overridden) or when every sum up to n_max vanishes.
PressureEstimate pressure_extension(const GroupExtension& ext, const Potential& pot, Letter a,
                                    const ExtensionPressureOptions& options = {});

/// True when the radial free-group path computes the extension sums: psi a
/// bijection onto the free generators and a constant potential.
bool radial_applicable(const GroupExtension& ext, const Potential& pot);

struct ExhaustionEntry {
  std::vector<Letter> letters;
  std::optional<PressureEstimate> base;
  std::optional<PressureEstimate> extension;
  std::string diagnostic;  // set when the entry could not be computed
};

struct ExhaustionReport {
  std::vector<ExhaustionEntry> entries;
  /// Base and extension values nondecreasing along the computed entries,
  /// up to their error bars.
  bool monotone = true;
};

/// Pressures of the restrictions to increasing sub-alphabets. The probe is
/// not required here: restrictions typically generate a proper subgroup.
ExhaustionReport exhaustion_pressures(const GroupExtension& ext, const Potential& pot,
                                      const std::vector<std::vector<Letter>>& sub_alphabets,
                                      ExtensionPressureOptions options = {});

}  // namespace gxm
