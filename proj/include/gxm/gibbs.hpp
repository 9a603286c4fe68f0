#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gxm/linalg.hpp"
#include "gxm/potential.hpp"
#include "gxm/shift.hpp"
#include "gxm/word_index.hpp"

namespace gxm {

/// Leading eigendata of a locally constant potential and the Gibbs measure
/// it induces, realised as a stationary Markov chain on the block states of
/// the recoded shift (words of length memory - 1).
struct RpfData {
  Shift shift;
  std::size_t memory = 0;  // max(potential memory, 2)
  WordIndex states;
  double pressure = 0.0;
  std::vector<double> right;  // h, positive, max 1
  std::vector<double> left;   // nu, scaled so that sum h * nu = 1
  std::vector<double> stationary;  // pi = h * nu
  DenseMatrix transition;  // transition(s, t), rows sum to 1
  Potential source;
  Potential normalized;

  /// Block state of the first memory - 1 letters of `word`.
  std::size_t state_of(std::span<const Letter> word) const { return states.at(word.first(memory - 1)); }
};

/// Throws PreconditionError if the shift is not topologically mixing.
RpfData rpf_solve(const Shift& shift, const Potential& pot);

/// mu([w]); 1 for the empty word. Throws InputError on an inadmissible word.
double cylinder_mass(const RpfData& rpf, std::span<const Letter> w);

/// Integral of L(1_[w]) against mu, with L the transfer operator of the
/// normalized potential. Equals mu([w]) by invariance of mu under the dual.
double transfer_integral(const RpfData& rpf, std::span<const Letter> w);

struct GibbsAudit {
  std::size_t n_max = 0;
  double c_hat = 1.0;
  Word worst_word;
  /// c_hat over words of length exactly n, for n = 1..n_max.
  std::vector<double> per_depth;
};

/// Empirical Gibbs constant: the largest max(r, 1/r) over all admissible
/// words of length <= n_max, where r = mu([w]) / exp(S_n phi - n P) with
/// S_n phi ranging over both its sup and its inf on [w] and P the pressure
/// of `pot`.
/// Throws InputError for n_max outside [1, 14] and ResourceError if the
/// enumeration would exceed 2^24 words.
GibbsAudit gibbs_audit(const RpfData& rpf, const Potential& pot, std::size_t n_max);

}  // namespace gxm
