#include "gxm/radial.hpp"

#include <algorithm>
#include <cmath>

#include "gxm/error.hpp"

namespace gxm {

namespace {

void rescale(RadialMeasure& m) {
  double mx = 0.0;
  for (double v : m.spheres) mx = std::max(mx, v);
  if (mx > 0.0) {
    for (double& v : m.spheres) v /= mx;
    m.log_scale += std::log(mx);
  }
  while (m.spheres.size() > 1 && m.spheres.back() == 0.0) m.spheres.pop_back();
}

}  // namespace

double RadialMeasure::log_sphere(std::size_t r) const {
  if (r >= spheres.size() || spheres[r] <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(spheres[r]) + log_scale;
}

double sphere_size(std::size_t rank, std::size_t r) {
  if (r == 0) return 1.0;
  return 2.0 * static_cast<double>(rank) * std::pow(2.0 * static_cast<double>(rank) - 1.0, static_cast<double>(r - 1));
}

RadialMeasure radial_delta(std::size_t rank) {
  if (rank == 0) throw InputError("radial measure: rank must be positive");
  return RadialMeasure{rank, {1.0}, 0.0};
}

RadialMeasure radial_step(std::size_t rank) {
  if (rank == 0) throw InputError("radial measure: rank must be positive");
  return RadialMeasure{rank, {0.0, 1.0}, 0.0};
}

RadialMeasure radial_convolve(const RadialMeasure& x, const RadialMeasure& y, std::size_t max_radius) {
  if (x.rank != y.rank) throw InputError("radial_convolve: rank mismatch");
  const double gens = 2.0 * static_cast<double>(x.rank);
  const double q = gens - 1.0;
  const std::size_t out_radius = std::min(x.radius() + y.radius(), max_radius);
  RadialMeasure out{x.rank, std::vector<double>(out_radius + 1, 0.0), x.log_scale + y.log_scale};
  for (std::size_t a = 0; a < x.spheres.size(); ++a) {
    if (x.spheres[a] == 0.0) continue;
    for (std::size_t b = 0; b < y.spheres.size(); ++b) {
      const double w = x.spheres[a] * y.spheres[b];
      if (w == 0.0) continue;
      const std::size_t lo = std::min(a, b);
      if (lo == 0) {
        if (a + b <= out_radius) out.spheres[a + b] += w;
        continue;
      }
      // j = number of cancelled letter pairs at the join:
      // P(j >= 1) = 1/2k and P(j >= i | j >= i-1) = 1/q for 2 <= i <= lo.
      double tail = 1.0 / gens;  // P(j >= 1)
      double p_prev = 1.0;        // P(j >= 0)
      for (std::size_t j = 0; j <= lo; ++j) {
        const double p_ge_next = j < lo ? tail : 0.0;
        const double pj = p_prev - p_ge_next;
        const std::size_t len = a + b - 2 * j;
        if (len <= out_radius && pj > 0.0) out.spheres[len] += w * pj;
        p_prev = p_ge_next;
        tail /= q;
      }
    }
  }
  rescale(out);
  return out;
}

RadialMeasure radial_power(const RadialMeasure& x, std::size_t n) {
  RadialMeasure out = radial_delta(x.rank);
  for (std::size_t i = 0; i < n; ++i) out = radial_convolve(out, x);
  return out;
}

std::vector<double> radial_return_logs(const RadialMeasure& q, std::size_t k_max) {
  std::vector<double> out;
  out.reserve(k_max);
  RadialMeasure cur = radial_delta(q.rank);
  const std::size_t step = std::max<std::size_t>(q.radius(), 1);
  for (std::size_t k = 1; k <= k_max; ++k) {
    // Radii beyond what the remaining factors can pull back are dead.
    cur = radial_convolve(cur, q, (k_max - k) * step);
    out.push_back(cur.log_sphere(0));
  }
  return out;
}

std::vector<double> srw_return_logs(std::size_t rank, std::size_t stride, std::size_t count) {
  if (rank == 0 || stride == 0) throw InputError("srw_return_logs: rank and stride must be positive");
  const double gens = 2.0 * static_cast<double>(rank);
  const double root_q = std::sqrt(gens - 1.0);
  // Iterate v_r = P(distance r) * q^{-r/2}. In these units the chain is
  // symmetric, with weight sqrt(q) / 2k in both directions (1 / sqrt(q) out
  // of the identity), and all radii stay on a comparable scale; raw
  // probabilities at the identity underflow long before 10^4 steps.
  const double side = root_q / gens;
  const double leave = 1.0 / root_q;
  const std::size_t total = stride * count;
  std::vector<double> v{1.0};
  double log_scale = 0.0;
  std::vector<double> result;
  result.reserve(count);
  for (std::size_t t = 1; t <= total; ++t) {
    const std::size_t limit = total - t;  // farther radii cannot return in time
    std::vector<double> next(std::min(v.size() + 1, limit + 1), 0.0);
    for (std::size_t r = 0; r < v.size(); ++r) {
      const double x = v[r];
      if (x == 0.0) continue;
      if (r == 0) {
        if (1 < next.size()) next[1] += x * leave;
        continue;
      }
      if (r + 1 < next.size()) next[r + 1] += x * side;
      if (r - 1 < next.size()) next[r - 1] += x * side;
    }
    double mx = 0.0;
    for (double x : next) mx = std::max(mx, x);
    if (mx > 0.0) {
      for (double& x : next) x /= mx;
      log_scale += std::log(mx);
    }
    v.swap(next);
    if (t % stride == 0) {
      result.push_back(v[0] > 0.0 ? std::log(v[0]) + log_scale : -std::numeric_limits<double>::infinity());
    }
  }
  return result;
}

GroupMeasure to_group_measure(const Group& group, const RadialMeasure& x) {
  if (group.kind() != GroupKind::Free || group.rank() != x.rank) {
    throw InputError("to_group_measure: radial measures live on the free group of matching rank");
  }
  GroupMeasure out;
  for (const Element& g : group.ball(x.radius())) {
    const std::size_t r = g.size();
    const double mass = x.spheres[r] * std::exp(x.log_scale) / sphere_size(x.rank, r);
    if (mass > 0.0) out.masses.emplace(g, mass);
  }
  return out;
}

}  // namespace gxm
