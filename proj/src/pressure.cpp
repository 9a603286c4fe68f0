#include "gxm/pressure.hpp"

#include <algorithm>
#include <cmath>

#include "gxm/error.hpp"
#include "gxm/linalg.hpp"
#include "gxm/radial.hpp"

namespace gxm {

const char* to_string(PressureMethod m) {
  return m == PressureMethod::ExactSpectral ? "exact_spectral" : "sequence_extrapolation";
}

double z_n(const Shift& shift, const Potential& pot, Letter a, std::size_t n, ZFlavor flavor) {
  const GroupExtension trivial(shift, Group::trivial(), std::vector<Element>(shift.size(), Element{0}));
  const auto c = WordConstraint::start_and_return(a, flavor == ZFlavor::FirstReturn);
  return partition_sum(trivial, pot, n, Element{0}, c).value();
}

PressureEstimate pressure_base(const Shift& shift, const Potential& pot, std::size_t n_check) {
  if (!is_mixing(shift)) throw PreconditionError("pressure_base: shift is not topologically mixing");
  const TransferMatrix tm = transfer_matrix(shift, pot);
  const LeadingEigenpair eig = perron_eigenpair(tm.matrix);
  PressureEstimate est;
  est.method = PressureMethod::ExactSpectral;
  est.route = "matrix";
  est.value = std::log(eig.value);
  // Residual of the eigen-equation, relative to the smallest entry of h.
  const std::vector<double> lh = tm.matrix.apply(eig.vector);
  double resid = 0.0;
  double hmin = 1.0;
  for (std::size_t i = 0; i < lh.size(); ++i) {
    resid = std::max(resid, std::abs(lh[i] - eig.value * eig.vector[i]));
    hmin = std::min(hmin, eig.vector[i]);
  }
  est.error_bar = resid / (eig.value * hmin);
  if (n_check > 0) {
    const GroupExtension trivial(shift, Group::trivial(), std::vector<Element>(shift.size(), Element{0}));
    const auto seq = partition_sum_sequence(trivial, pot, n_check, Element{0}, WordConstraint::start_and_return(0));
    for (std::size_t n = 1; n <= seq.size(); ++n) {
      if (std::isfinite(seq[n - 1].log_value)) est.sequence.emplace_back(static_cast<double>(n), seq[n - 1].log_value);
    }
    if (!est.sequence.empty()) est.raw_rate = est.sequence.back().second / est.sequence.back().first;
  }
  return est;
}

bool radial_applicable(const GroupExtension& ext, const Potential& pot) {
  if (!ext.is_free_generator_bijection() || !(ext.shift() == pot.shift())) return false;
  const auto v = pot.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo <= 1e-15 * std::max(1.0, std::abs(*hi));
}

namespace {

PressureEstimate fit_sequence(std::vector<std::pair<double, double>> seq, double pruned_fraction, std::string route) {
  PressureEstimate est;
  est.method = PressureMethod::SequenceExtrapolation;
  est.route = std::move(route);
  est.sequence = std::move(seq);
  if (est.sequence.empty()) {
    throw PreconditionError(
        "pressure_extension: every identity-constrained sum vanished up to n_max; the return times may lie on an "
        "arithmetic progression that the schedule misses (use a parity-aware schedule or a larger n_max)");
  }
  const GrowthFit fit = fit_growth(est.sequence);
  const double n_last = est.sequence.back().first;
  est.value = fit.rate;
  est.raw_rate = fit.raw_rate;
  est.fit_residual = fit.max_residual;
  est.pruned_fraction = pruned_fraction;
  est.error_bar = growth_error_bar(fit, n_last) + std::log1p(pruned_fraction) / n_last;
  return est;
}

}  // namespace

PressureEstimate pressure_extension(const GroupExtension& ext, const Potential& pot, Letter a,
                                    const ExtensionPressureOptions& options) {
  if (a >= ext.shift().size()) throw InputError("pressure_extension: base letter outside the alphabet");
  if (options.n_max == 0) throw InputError("pressure_extension: n_max must be positive");
  if (!options.override_probe) {
    const ProbeResult probe = irreducibility_probe(ext, options.probe_depth);
    if (probe.status != ProbeResult::Status::Proven) {
      throw PreconditionError("pressure_extension: irreducibility of the extension not established at depth " +
                              std::to_string(options.probe_depth) + " (first gap: " + probe.first_missing +
                              "); pass the override to proceed");
    }
  }
  std::vector<std::pair<double, double>> seq;
  if (options.allow_radial && radial_applicable(ext, pot)) {
    // Z_n = e^{c n} (2k)^{n-1} P(simple random walk is at id after n steps)
    // since every word starting with a is equally likely to return.
    const double c = pot.values()[0];
    const double gens = 2.0 * static_cast<double>(ext.group().rank());
    const auto ret = srw_return_logs(ext.group().rank(), 1, options.n_max);
    for (std::size_t n = 1; n <= options.n_max; ++n) {
      const double lp = ret[n - 1];
      if (std::isfinite(lp)) {
        seq.emplace_back(static_cast<double>(n),
                         c * static_cast<double>(n) + static_cast<double>(n - 1) * std::log(gens) + lp);
      }
    }
    return fit_sequence(std::move(seq), 0.0, "radial");
  }
  PartitionOptions po;
  po.bound = Bound::Sup;
  po.prune_eps = options.prune_eps;
  po.pool_cap = options.pool_cap;
  const auto sums =
      partition_sum_sequence(ext, pot, options.n_max, ext.group().identity(), WordConstraint::start_and_return(a), po);
  double pruned_fraction = 0.0;
  for (std::size_t n = 1; n <= sums.size(); ++n) {
    if (std::isfinite(sums[n - 1].log_value)) {
      seq.emplace_back(static_cast<double>(n), sums[n - 1].log_value);
      pruned_fraction = std::isfinite(sums[n - 1].log_pruned)
                            ? std::exp(sums[n - 1].log_pruned - sums[n - 1].log_value)
                            : 0.0;
    }
  }
  return fit_sequence(std::move(seq), pruned_fraction, "dp");
}

ExhaustionReport exhaustion_pressures(const GroupExtension& ext, const Potential& pot,
                                      const std::vector<std::vector<Letter>>& sub_alphabets,
                                      ExtensionPressureOptions options) {
  options.override_probe = true;
  ExhaustionReport report;
  for (const auto& letters : sub_alphabets) {
    ExhaustionEntry entry;
    entry.letters = letters;
    try {
      const GroupExtension sub = ext.restrict_to(letters);
      if (!is_mixing(sub.shift())) throw PreconditionError("restriction is not topologically mixing");
      const Potential sub_pot = restrict_potential(pot, sub.shift(), letters);
      entry.base = pressure_base(sub.shift(), sub_pot, 0);
      entry.extension = pressure_extension(sub, sub_pot, 0, options);
    } catch (const std::exception& e) {
      entry.diagnostic = e.what();
    }
    report.entries.push_back(std::move(entry));
  }
  const ExhaustionEntry* prev = nullptr;
  for (const auto& e : report.entries) {
    if (!e.base || !e.extension) continue;
    if (prev) {
      if (e.base->value + e.base->error_bar + prev->base->error_bar + 1e-9 < prev->base->value) report.monotone = false;
      if (e.extension->value + e.extension->error_bar + prev->extension->error_bar + 1e-9 < prev->extension->value) {
        report.monotone = false;
      }
    }
    prev = &e;
  }
  return report;
}

}  // namespace gxm
