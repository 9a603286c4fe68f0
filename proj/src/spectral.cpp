#include "gxm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>

#include "block_dp.hpp"
#include "gxm/error.hpp"
#include "gxm/fit.hpp"
#include "gxm/linalg.hpp"
#include "gxm/radial.hpp"

namespace gxm {

const char* to_string(NormMethod m) {
  switch (m) {
    case NormMethod::Auto:
      return "auto";
    case NormMethod::FiniteSvd:
      return "finite_svd";
    case NormMethod::AbelianFourier:
      return "abelian_fourier";
    case NormMethod::ReturnSequence:
      return "return_sequence";
  }
  return "auto";
}

NormMethod parse_norm_method(const std::string& name) {
  for (NormMethod m : {NormMethod::Auto, NormMethod::FiniteSvd, NormMethod::AbelianFourier, NormMethod::ReturnSequence}) {
    if (name == to_string(m)) return m;
  }
  throw InputError("unknown norm method '" + name +
                   "' (valid: auto, finite_svd, abelian_fourier, return_sequence)");
}

namespace {

NormMethod resolve(const Group& group, NormMethod method) {
  if (method != NormMethod::Auto) return method;
  switch (group.kind()) {
    case GroupKind::Finite:
      return NormMethod::FiniteSvd;
    case GroupKind::FreeAbelian:
      return NormMethod::AbelianFourier;
    case GroupKind::Free:
      return NormMethod::ReturnSequence;
  }
  return NormMethod::ReturnSequence;
}

OperatorNormEstimate finite_svd(const Group& group, const GroupMeasure& p) {
  if (!group.is_finite()) throw InputError("finite_svd needs a finite group; " + group.name() + " is infinite");
  const std::size_t n = group.order();
  DenseMatrix m(n, n, 0.0);
  // (T f)(g) = sum_h p(h) f(g h^-1)
  for (const auto& [h, w] : p.masses) {
    const Element hinv = group.inv(h);
    for (std::size_t g = 0; g < n; ++g) {
      const Element gi{static_cast<std::int32_t>(g)};
      m(g, static_cast<std::size_t>(group.mul(gi, hinv)[0])) += w;
    }
  }
  const SingularValueEstimate sv = top_singular_value(m, PowerIterationOptions{1e-15, 100000});
  OperatorNormEstimate est;
  est.method = NormMethod::FiniteSvd;
  est.route = "dense";
  est.norm = sv.value;
  est.k_used = sv.iterations;
  est.error_bar = 1e-12 * std::max(1.0, sv.value) + p.pruned_mass;
  return est;
}

/// max over the grid of |sum_g p(g) e^{i <theta, g>}| for a measure on Z or
/// Z^2, with theta_j = 2 pi k_j / points.
struct GridMax {
  double value = 0.0;
  std::vector<double> theta;
};

std::complex<double> character_sum(const GroupMeasure& p, const std::vector<double>& theta) {
  std::complex<double> s = 0.0;
  for (const auto& [g, w] : p.masses) {
    double phase = 0.0;
    for (std::size_t d = 0; d < theta.size(); ++d) phase += theta[d] * g[d];
    s += w * std::polar(1.0, phase);
  }
  return s;
}

OperatorNormEstimate abelian_fourier(const Group& group, const GroupMeasure& p, std::size_t points) {
  if (group.kind() != GroupKind::FreeAbelian) {
    throw InputError("abelian_fourier needs a free abelian group; got " + group.name());
  }
  const std::size_t d = group.rank();
  if (points < 2) throw InputError("abelian_fourier: need at least two grid points");
  // Keep the grid below 2^22 points in high rank.
  while (d > 2 && std::pow(static_cast<double>(points), static_cast<double>(d)) > 4194304.0) points /= 2;
  const double h = 2.0 * std::numbers::pi / static_cast<double>(points);
  const double total = p.total_mass();
  double lipschitz = 0.0;
  for (const auto& [g, w] : p.masses) lipschitz += w * static_cast<double>(group.word_length(g));

  // Coarse pass. Rank <= 2 is separable: partial sums over the first
  // coordinate are shared by every value of the second.
  std::vector<std::pair<double, std::vector<double>>> cells;
  GridMax best;
  if (d == 1) {
    for (std::size_t k = 0; k < points; ++k) {
      std::vector<double> th{h * static_cast<double>(k)};
      const double v = std::abs(character_sum(p, th));
      cells.emplace_back(v, th);
    }
  } else if (d == 2) {
    std::map<std::int32_t, std::vector<std::pair<std::int32_t, double>>> by_second;
    for (const auto& [g, w] : p.masses) by_second[g[1]].emplace_back(g[0], w);
    for (std::size_t k1 = 0; k1 < points; ++k1) {
      const double t1 = h * static_cast<double>(k1);
      std::vector<std::pair<std::int32_t, std::complex<double>>> partial;
      for (const auto& [g2, row] : by_second) {
        std::complex<double> s = 0.0;
        for (const auto& [g1, w] : row) s += w * std::polar(1.0, t1 * g1);
        partial.emplace_back(g2, s);
      }
      for (std::size_t k2 = 0; k2 < points; ++k2) {
        const double t2 = h * static_cast<double>(k2);
        std::complex<double> s = 0.0;
        for (const auto& [g2, ps] : partial) s += ps * std::polar(1.0, t2 * g2);
        cells.emplace_back(std::abs(s), std::vector<double>{t1, t2});
      }
    }
  } else {
    std::vector<std::size_t> idx(d, 0);
    while (true) {
      std::vector<double> th(d);
      for (std::size_t i = 0; i < d; ++i) th[i] = h * static_cast<double>(idx[i]);
      cells.emplace_back(std::abs(character_sum(p, th)), th);
      std::size_t i = 0;
      while (i < d && ++idx[i] == points) idx[i++] = 0;
      if (i == d) break;
    }
  }
  for (const auto& [v, th] : cells) {
    if (v > best.value) best = GridMax{v, th};
  }

  // One refinement pass over the cells whose certified upper bound could
  // beat the coarse maximum (at most 64 of them).
  double bar = lipschitz * h / 2.0;
  std::vector<const std::pair<double, std::vector<double>>*> candidates;
  for (const auto& c : cells) {
    if (c.first + bar > best.value) candidates.push_back(&c);
  }
  std::sort(candidates.begin(), candidates.end(), [](auto* a, auto* b) { return a->first > b->first; });
  if (candidates.size() <= 64 && bar > 0.0) {
    constexpr int kSub = 16;
    const double hf = h / kSub;
    for (const auto* c : candidates) {
      std::vector<int> offs(d, 0);
      while (true) {
        std::vector<double> th = c->second;
        for (std::size_t i = 0; i < d; ++i) th[i] += hf * (offs[i] - kSub / 2 + 0.5);
        const double v = std::abs(character_sum(p, th));
        if (v > best.value) best = GridMax{v, th};
        std::size_t i = 0;
        while (i < d && ++offs[i] == kSub) offs[i++] = 0;
        if (i == d) break;
      }
    }
    bar = lipschitz * hf / 2.0;
  }
  OperatorNormEstimate est;
  est.method = NormMethod::AbelianFourier;
  est.route = "grid";
  est.norm = best.value;
  est.k_used = cells.size();
  // The character sum never exceeds the total mass.
  est.error_bar = std::max(0.0, std::min(bar, total - best.value)) + p.pruned_mass;
  return est;
}

OperatorNormEstimate from_return_logs(const std::vector<double>& logs, double pruned, std::string route) {
  std::vector<std::pair<double, double>> seq;
  for (std::size_t k = 0; k < logs.size(); ++k) seq.emplace_back(static_cast<double>(k + 1), logs[k]);
  const GrowthFit fit = fit_growth(seq);
  OperatorNormEstimate est;
  est.method = NormMethod::ReturnSequence;
  est.route = std::move(route);
  est.norm = std::exp(fit.rate / 2.0);
  est.k_used = logs.size();
  est.error_bar = est.norm * growth_error_bar(fit, static_cast<double>(logs.size())) / 2.0 + pruned;
  est.pruned_mass = pruned;
  return est;
}

OperatorNormEstimate return_sequence(const Group& group, const GroupMeasure& p, const NormOptions& options) {
  if (options.k_max == 0) throw InputError("return_sequence: k_max must be positive");
  const GroupMeasure q = convolve(group, reflect(group, p), p, 0.0, options.support_cap);
  std::size_t radius = 0;
  for (const auto& [g, w] : q.masses) radius = std::max(radius, group.word_length(g));
  GroupMeasure cur = GroupMeasure::delta(group.identity());
  std::vector<double> logs;
  std::vector<std::string> warnings;
  bool warned = false;
  for (std::size_t k = 1; k <= options.k_max; ++k) {
    cur = convolve(group, cur, q, options.prune_eps, options.support_cap);
    if (!group.is_finite()) {
      // Mass farther out than the remaining factors can bring back never
      // reaches the identity again; dropping it is exact.
      const std::size_t limit = (options.k_max - k) * radius;
      for (auto it = cur.masses.begin(); it != cur.masses.end();) {
        it = group.word_length(it->first) > limit ? cur.masses.erase(it) : std::next(it);
      }
    }
    const double live = cur.total_mass();
    if (!warned && cur.pruned_mass > 0.1 * (live + cur.pruned_mass)) {
      const std::string msg = "return_sequence: pruned mass exceeds 10% of the layer at k=" + std::to_string(k);
      if (options.strict) throw ResourceError(msg);
      warnings.push_back(msg);
      warned = true;
    }
    const double s = cur.at(group.identity());
    logs.push_back(s > 0.0 ? std::log(s) : -std::numeric_limits<double>::infinity());
  }
  OperatorNormEstimate est = from_return_logs(logs, cur.pruned_mass + p.pruned_mass, "generic");
  est.warnings = std::move(warnings);
  return est;
}

/// True when the Gibbs chain is the uniform Bernoulli measure.
bool uniform_chain(const RpfData& rpf) {
  const double m = static_cast<double>(rpf.shift.size());
  const double ns = static_cast<double>(rpf.states.size());
  for (std::size_t s = 0; s < rpf.states.size(); ++s) {
    if (std::abs(rpf.stationary[s] - 1.0 / ns) > 1e-13) return false;
    for (std::size_t t = 0; t < rpf.states.size(); ++t) {
      const double v = rpf.transition(s, t);
      if (v != 0.0 && std::abs(v - 1.0 / m) > 1e-13) return false;
    }
  }
  return true;
}

}  // namespace

OperatorNormEstimate convolution_norm(const Group& group, const GroupMeasure& p, NormMethod method,
                                      const NormOptions& options, std::size_t n) {
  OperatorNormEstimate est;
  switch (resolve(group, method)) {
    case NormMethod::FiniteSvd:
      est = finite_svd(group, p);
      break;
    case NormMethod::AbelianFourier:
      est = abelian_fourier(group, p, options.fourier_points);
      break;
    default:
      est = return_sequence(group, p, options);
      break;
  }
  est.n = n;
  return est;
}

OperatorNormEstimate tn_norm(const GroupExtension& ext, const RpfData& rpf, std::size_t n, NormMethod method,
                             const NormOptions& options) {
  if (n == 0) throw InputError("tn_norm: n must be positive");
  if (options.k_max == 0) throw InputError("tn_norm: k_max must be positive");
  const NormMethod resolved = resolve(ext.group(), method);
  if (resolved == NormMethod::ReturnSequence && options.allow_radial && ext.is_free_generator_bijection() &&
      uniform_chain(rpf)) {
    // p_n is the n-step simple random walk, so (p_n-check * p_n)^{*k}(id)
    // is its return probability after 2 n k steps.
    OperatorNormEstimate est =
        from_return_logs(srw_return_logs(ext.group().rank(), 2 * n, options.k_max), 0.0, "radial");
    est.n = n;
    return est;
  }
  if (resolved == NormMethod::FiniteSvd && !ext.group().is_finite()) {
    throw InputError("finite_svd needs a finite group; " + ext.group().name() + " is infinite");
  }
  if (resolved == NormMethod::AbelianFourier && ext.group().kind() != GroupKind::FreeAbelian) {
    throw InputError("abelian_fourier needs a free abelian group; got " + ext.group().name());
  }
  const GroupMeasure p = step_distribution(ext, rpf, n);
  return convolution_norm(ext.group(), p, resolved, options, n);
}

SpectralRadiusEstimate spectral_radius(const GroupExtension& ext, const Potential& pot,
                                       const std::vector<std::size_t>& schedule, NormMethod method,
                                       const NormOptions& options) {
  if (schedule.empty()) throw InputError("spectral_radius: empty schedule");
  const RpfData rpf = rpf_solve(ext.shift(), pot);
  SpectralRadiusEstimate out;
  out.normalization_offset = rpf.pressure;
  std::vector<double> design, y;
  double rel_err = 0.0;
  for (std::size_t n : schedule) {
    OperatorNormEstimate est = tn_norm(ext, rpf, n, method, options);
    if (!(est.norm > 0.0)) throw PreconditionError("spectral_radius: operator norm estimate vanished at n=" + std::to_string(n));
    const double ln = std::log(est.norm);
    out.per_n.emplace_back(static_cast<double>(n), ln / static_cast<double>(n));
    design.push_back(static_cast<double>(n));
    design.push_back(1.0);
    y.push_back(ln);
    rel_err = std::max(rel_err, est.error_bar / est.norm / static_cast<double>(n));
    out.norms.push_back(std::move(est));
  }
  double slope = 0.0;
  if (schedule.size() >= 2) {
    const auto ls = least_squares(design, 2, y);
    slope = ls.coefficients[0];
    for (double r : ls.residuals) out.fit_residual = std::max(out.fit_residual, std::abs(r));
  } else {
    slope = out.per_n[0].second;
  }
  const double n_last = static_cast<double>(*std::max_element(schedule.begin(), schedule.end()));
  out.log_rho = slope + rpf.pressure;
  out.error_bar = rel_err + out.fit_residual / n_last;
  return out;
}

SkewTable transfer_apply(const GroupExtension& ext, const Potential& pot, const SkewTable& f, std::size_t n,
                         Bound bound) {
  if (f.depth != 1) throw InputError("transfer_apply: input table must have depth 1");
  if (n == 0) throw InputError("transfer_apply: n must be positive");
  if (!(ext.shift() == pot.shift())) throw InputError("transfer_apply: potential and extension use different shifts");
  const Shift& shift = ext.shift();
  const Group& group = ext.group();
  SkewTable out;
  out.depth = 1;
  out.pruned_mass = f.pruned_mass;

  const detail::BlockChain chain = detail::potential_chain(shift, pot);
  const std::size_t b = chain.block;
  if (n < b) {
    for_each_word(shift, n, [&](std::span<const Letter> w) {
      const Element pw = psi_word(ext, w);
      for (const auto& [key, v] : f.values) {
        if (key.first[0] != w[0] || v == 0.0) continue;
        const Element g = group.mul(key.second, pw);
        for (Letter j : shift.successors(w.back())) {
          out.values[{Word{j}, g}] += v * std::exp(cylinder_sum_extreme(pot, w, n, bound, j));
        }
      }
    });
    return out;
  }
  const Potential lifted = pot.with_memory(b + 1);
  detail::ElementPool pool(group, ext.psi(), std::size_t{1} << 23);
  detail::SkewDP dp(chain, pool, detail::SkewOptions{});
  for (std::size_t s = 0; s < chain.states.size(); ++s) {
    const auto block = chain.states.word(s);
    const Element pb = psi_word(ext, block);
    for (const auto& [key, v] : f.values) {
      if (key.first[0] != block[0] || v <= 0.0) continue;
      dp.seed(static_cast<std::uint32_t>(s), pool.intern(group.mul(key.second, pb)), std::log(v));
    }
  }
  for (std::size_t len = b + 1; len <= n; ++len) dp.step();
  const auto& cells = dp.cells();
  for (std::size_t s = 0; s < cells.size(); ++s) {
    const auto block = chain.states.word(s);
    for (Letter j : shift.successors(block.back())) {
      const double tail = cylinder_sum_extreme(lifted, block, b, bound, j);
      for (const detail::Cell& c : cells[s]) {
        out.values[{Word{j}, pool.element(c.element)}] += std::exp(c.log_value + tail);
      }
    }
  }
  return out;
}

GroupMeasure average_project(const SkewTable& f, const RpfData& rpf) {
  GroupMeasure out;
  out.pruned_mass = f.pruned_mass;
  for (const auto& [key, v] : f.values) {
    const double m = v * cylinder_mass(rpf, key.first);
    if (m != 0.0) out.masses[key.second] += m;
  }
  return out;
}

ReturnAuditReport return_audit(const GroupExtension& ext, const Potential& pot, std::size_t n_max,
                            const ReturnAuditOptions& options) {
  if (n_max == 0 || n_max > 12) throw InputError("return_audit: n_max must lie in [1, 12]");
  const Shift& shift = ext.shift();
  const Group& group = ext.group();
  const RpfData rpf = rpf_solve(shift, pot);
  const Potential& norm_pot = rpf.normalized;

  ReturnAuditReport report;
  // Gibbs constant audited as deep as the enumeration guard allows.
  std::size_t depth = std::min<std::size_t>(std::max<std::size_t>(n_max, 6), 14);
  while (depth > 1) {
    std::uint64_t words = 0;
    for (std::size_t d = 1; d <= depth; ++d) words += count_words(shift, d);
    if (words <= (std::uint64_t{1} << 22)) break;
    --depth;
  }
  report.gibbs_depth = depth;
  report.c_hat = gibbs_audit(rpf, norm_pot, depth).c_hat;
  if (depth < n_max) {
    report.failures.push_back("Gibbs constant audited only to depth " + std::to_string(depth) + " < n_max");
  }
  const double c = report.c_hat;
  const double tol = options.tolerance;
  const Element id = group.identity();
  const auto steps = step_distributions(ext, rpf, n_max);
  PartitionOptions sup_opts, inf_opts;
  sup_opts.bound = Bound::Sup;
  inf_opts.bound = Bound::Inf;
  const auto z_sup = partition_sum_sequence(ext, norm_pot, n_max, id, WordConstraint::none(), sup_opts);
  const auto z_inf = partition_sum_sequence(ext, norm_pot, n_max, id, WordConstraint::none(), inf_opts);
  const SkewTable indicator = SkewTable::fiber_indicator(shift, id);

  for (std::size_t n = 1; n <= n_max; ++n) {
    ReturnAuditRow row;
    row.n = n;
    const OperatorNormEstimate est = tn_norm(ext, rpf, n, NormMethod::Auto, options.norm);
    row.norm = est.norm;
    row.norm_error = est.error_bar;
    row.norm_route = est.route;

    const SkewTable image = transfer_apply(ext, norm_pot, indicator, n, Bound::Inf);
    std::map<Element, double> fiber_max;
    for (const auto& [key, v] : image.values) {
      double& slot = fiber_max[key.second];
      slot = std::max(slot, v);
    }
    double sq = 0.0;
    for (const auto& [g, v] : fiber_max) sq += v * v;
    row.test_lower_bound = std::sqrt(sq);

    row.return_value = steps[n - 1].at(id);
    const double zs = z_sup[n - 1].value();
    const double zi = z_inf[n - 1].value();
    row.sandwich_lo = zi / c;
    row.sandwich_hi = zs * c;
    const double dn = static_cast<double>(n);
    row.log_return_rate = row.return_value > 0.0 ? std::log(row.return_value) / dn : -INFINITY;
    row.log_sup_rate = zs > 0.0 ? std::log(zs) / dn : -INFINITY;

    row.lower_ok = row.norm + row.norm_error + tol >= row.test_lower_bound / c;
    row.upper_ok = row.norm - row.norm_error <= c + tol;
    row.sandwich_ok = row.sandwich_lo * (1.0 - 1e-12) - tol <= row.return_value &&
                      row.return_value <= row.sandwich_hi * (1.0 + 1e-12) + tol;
    if (row.return_value > 0.0 && zs > 0.0) {
      row.rate_ok = std::abs(row.log_return_rate - row.log_sup_rate) <= std::log(c) / dn + tol;
    } else {
      row.rate_ok = row.return_value == 0.0 && zs == 0.0;
    }
    if (std::pow(static_cast<double>(shift.size()), dn) <= static_cast<double>(options.enumeration_limit)) {
      double total = 0.0;
      for_each_word(shift, n, [&](std::span<const Letter> w) {
        if (psi_word(ext, w) == id) total += cylinder_mass(rpf, w);
      });
      row.enumerated = total;
      row.enumeration_ok = std::abs(total - row.return_value) <= 1e-12 * std::max(1.0, total);
    }
    auto fail = [&](bool ok, const std::string& what) {
      if (!ok) report.failures.push_back("n=" + std::to_string(n) + ": " + what);
    };
    fail(row.lower_ok, "norm below the fiber-indicator lower bound / C");
    fail(row.upper_ok, "norm exceeds the Gibbs constant");
    fail(row.sandwich_ok, "identity return value outside the Gibbs sandwich");
    fail(row.rate_ok, "return rate departs from the sup partition rate by more than log(C)/n");
    fail(row.enumeration_ok, "return value disagrees with direct enumeration");
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace gxm
