#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "gxm/group.hpp"

namespace gxm {

/// Measure on the free group F_k that is uniform on every sphere, stored as
/// the total mass of each sphere. Products of such measures stay radial, so
/// convolution collapses to a computation on radii.
struct RadialMeasure {
  std::size_t rank = 0;
  std::vector<double> spheres;  // scaled sphere masses
  double log_scale = 0.0;       // true sphere mass = spheres[r] * exp(log_scale)

  /// log of the true mass of sphere r (-inf when empty).
  double log_sphere(std::size_t r) const;
  std::size_t radius() const { return spheres.empty() ? 0 : spheres.size() - 1; }
};

/// Number of reduced words of length r in F_k.
double sphere_size(std::size_t rank, std::size_t r);

RadialMeasure radial_delta(std::size_t rank);
/// Uniform probability on the 2k generators and their inverses.
RadialMeasure radial_step(std::size_t rank);

/// Exact convolution of radial measures; radii above `max_radius` are
/// dropped, which is exact whenever the caller only reads radii that such
/// terms can no longer reach.
RadialMeasure radial_convolve(const RadialMeasure& x, const RadialMeasure& y,
                              std::size_t max_radius = std::numeric_limits<std::size_t>::max());
RadialMeasure radial_power(const RadialMeasure& x, std::size_t n);

/// log q^{*k}(id) for k = 1..k_max.
std::vector<double> radial_return_logs(const RadialMeasure& q, std::size_t k_max);

/// log P(simple random walk on F_k is at the identity after `stride * j`
/// steps) for j = 1..count, by iterating the distance chain (out with
/// probability (2k-1)/2k, in with probability 1/2k away from the identity).
std::vector<double> srw_return_logs(std::size_t rank, std::size_t stride, std::size_t count);

/// Expands to an explicit measure (every sphere element gets its share).
GroupMeasure to_group_measure(const Group& group, const RadialMeasure& x);

}  // namespace gxm
