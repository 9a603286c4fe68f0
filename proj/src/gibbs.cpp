#include "gxm/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "gxm/error.hpp"
#include "gxm/parallel.hpp"

namespace gxm {

RpfData rpf_solve(const Shift& shift, const Potential& pot) {
  const Normalization norm = normalize(shift, pot);
  const TransferMatrix tm = transfer_matrix(shift, pot);
  // tm.matrix is L = W^T; the left vector of L is the right vector of W.
  const LeadingEigenpair right_of_w = perron_eigenpair(tm.matrix.transpose());
  const std::size_t n = tm.states.size();
  const double lambda = std::exp(norm.pressure);

  RpfData rpf{shift,
              tm.memory,
              tm.states,
              norm.pressure,
              norm.eigenfunction.values,
              right_of_w.vector,
              std::vector<double>(n),
              DenseMatrix(n, n, 0.0),
              pot,
              norm.normalized};
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) total += rpf.right[s] * rpf.left[s];
  for (double& v : rpf.left) v /= total;
  for (std::size_t s = 0; s < n; ++s) rpf.stationary[s] = rpf.right[s] * rpf.left[s];
  for (std::size_t s = 0; s < n; ++s) {
    double row = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double w = tm.matrix(t, s);
      if (w == 0.0) continue;
      rpf.transition(s, t) = w * rpf.left[t] / (lambda * rpf.left[s]);
      row += rpf.transition(s, t);
    }
    // Remove the residual rounding so that rows are stochastic to machine
    // precision.
    for (std::size_t t = 0; t < n; ++t) rpf.transition(s, t) /= row;
  }
  return rpf;
}

double cylinder_mass(const RpfData& rpf, std::span<const Letter> w) {
  if (w.empty()) return 1.0;
  require_admissible(rpf.shift, w);
  const std::size_t b = rpf.memory - 1;
  if (w.size() < b) {
    double total = 0.0;
    for (std::size_t s = 0; s < rpf.states.size(); ++s) {
      const auto block = rpf.states.word(s);
      if (std::equal(w.begin(), w.end(), block.begin())) total += rpf.stationary[s];
    }
    return total;
  }
  std::size_t s = rpf.states.at(w.first(b));
  double mass = rpf.stationary[s];
  for (std::size_t i = 1; i + b <= w.size(); ++i) {
    const std::size_t t = rpf.states.at(w.subspan(i, b));
    mass *= rpf.transition(s, t);
    s = t;
  }
  return mass;
}

double transfer_integral(const RpfData& rpf, std::span<const Letter> w) {
  if (w.empty()) throw InputError("transfer_integral: word must be nonempty");
  require_admissible(rpf.shift, w);
  const std::size_t k = rpf.normalized.memory();
  const std::size_t depth = std::max(w.size(), k);
  double total = 0.0;
  Word u(w.begin(), w.end());
  // Extend w to `depth` letters so that both the weight window and the
  // image cylinder are determined.
  std::function<void()> extend = [&]() {
    if (u.size() == depth) {
      const std::span<const Letter> us(u);
      total += std::exp(rpf.normalized.value(us)) * cylinder_mass(rpf, us.subspan(1));
      return;
    }
    for (Letter c : rpf.shift.successors(u.back())) {
      u.push_back(c);
      extend();
      u.pop_back();
    }
  };
  extend();
  return total;
}

GibbsAudit gibbs_audit(const RpfData& rpf, const Potential& pot, std::size_t n_max) {
  if (n_max == 0 || n_max > 14) throw InputError("gibbs_audit: n_max must lie in [1, 14]");
  std::uint64_t words = 0;
  for (std::size_t n = 1; n <= n_max; ++n) words += count_words(rpf.shift, n);
  if (words > (1u << 24)) throw ResourceError("gibbs_audit: enumeration exceeds 2^24 words");

  // Pressure of `pot` itself, so the audit also applies to the normalized
  // potential of the same measure.
  const double pressure = std::log(perron_eigenpair(transfer_matrix(rpf.shift, pot).matrix).value);

  struct DepthResult {
    double c = 0.0;
    Word worst;
  };
  std::vector<DepthResult> results(n_max);
  parallel_for(n_max, [&](std::size_t i) {
    const std::size_t n = i + 1;
    DepthResult r;
    for_each_word(rpf.shift, n, [&](std::span<const Letter> w) {
      const SumBounds b = ergodic_sum_bounds(rpf.shift, pot, w);
      const double log_mass = std::log(cylinder_mass(rpf, w));
      const double shift_p = static_cast<double>(n) * pressure;
      const double d1 = std::abs(log_mass - (b.sup - shift_p));
      const double d2 = std::abs(log_mass - (b.inf - shift_p));
      const double c = std::exp(std::max(d1, d2));
      if (c > r.c) {
        r.c = c;
        r.worst.assign(w.begin(), w.end());
      }
    });
    results[i] = std::move(r);
  });

  GibbsAudit audit;
  audit.n_max = n_max;
  audit.c_hat = 0.0;
  for (std::size_t i = 0; i < n_max; ++i) {
    audit.per_depth.push_back(results[i].c);
    if (results[i].c > audit.c_hat) {
      audit.c_hat = results[i].c;
      audit.worst_word = results[i].worst;
    }
  }
  return audit;
}

}  // namespace gxm
