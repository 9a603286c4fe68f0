#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "gxm/linalg.hpp"
#include "gxm/shift.hpp"
#include "gxm/word_index.hpp"

namespace gxm {

enum class Bound { Inf, Sup };

/// Locally constant potential of memory k: its value on x depends only on
/// the first k letters. Such a potential has vanishing variation at depths
/// >= k, so it is Hölder for every exponent.
class Potential {
 public:
  /// `values[i]` is the value on the cylinder of the i-th admissible word of
  /// length `memory` (lexicographic order, see WordIndex).
  Potential(const Shift& shift, std::size_t memory, std::vector<double> values);

  /// Throws InputError unless `table` covers exactly the admissible words of
  /// length `memory` with finite values.
  static Potential from_table(const Shift& shift, std::size_t memory, const std::map<Word, double>& table);
  static Potential from_letters(const Shift& shift, std::span<const double> values);
  static Potential constant(const Shift& shift, double c);
  static Potential zero(const Shift& shift) { return constant(shift, 0.0); }

  const Shift& shift() const { return shift_; }
  std::size_t memory() const { return memory_; }
  const WordIndex& words() const { return words_; }
  std::span<const double> values() const { return values_; }

  /// Value on x for any x whose first `memory` letters are `prefix`
  /// (prefix may be longer; extra letters are ignored).
  double value(std::span<const Letter> prefix) const;

  /// Same function written with a larger memory.
  Potential with_memory(std::size_t memory) const;
  Potential plus_constant(double c) const;
  std::map<Word, double> table() const;

 private:
  Shift shift_;
  std::size_t memory_;
  WordIndex words_;
  std::vector<double> values_;
};

struct SumBounds {
  double inf = 0.0;
  double sup = 0.0;
};

/// Exact inf and sup of S_{|w|} phi over the cylinder [w].
SumBounds ergodic_sum_bounds(const Shift& shift, const Potential& pot, std::span<const Letter> w);

/// Exact extreme of S_m phi over [v] (or over [v next] when `next` is set),
/// obtained by optimising over the finitely many admissible continuations
/// that the last windows can see.
double cylinder_sum_extreme(const Potential& pot, std::span<const Letter> v, std::size_t windows, Bound bound,
                            std::optional<Letter> next = std::nullopt);

/// Weighted transfer matrix on the higher-block recoding: states are the
/// admissible words of length K-1 with K = max(memory, 2), and
/// matrix(t, s) = exp(phi(s c)) whenever t is s shifted by the letter c.
/// Acting on column vectors indexed by state it is the transfer operator.
struct TransferMatrix {
  std::size_t memory = 0;  // K
  WordIndex states;
  DenseMatrix matrix;
};
TransferMatrix transfer_matrix(const Shift& shift, const Potential& pot);

struct Eigenfunction {
  WordIndex states;
  std::vector<double> values;  // strictly positive, max 1
};

struct Normalization {
  Potential normalized;
  double pressure = 0.0;
  Eigenfunction eigenfunction;
};

/// phi + log h - log h o sigma - P with h the positive eigenfunction of the
/// transfer operator; the transfer matrix of the result has unit row sums.
/// Throws PreconditionError if the shift is not topologically mixing.
Normalization normalize(const Shift& shift, const Potential& pot);

/// phi + log u - log u o sigma for a positive table u on letters.
Potential add_coboundary(const Shift& shift, const Potential& pot, std::span<const double> u);

/// Restriction of `pot` to the subshift on `letters` (as produced by
/// Shift::restrict_to on the same letters).
Potential restrict_potential(const Potential& pot, const Shift& sub_shift, std::span<const Letter> letters);

struct CylinderBounds {
  double inf = 0.0;
  double sup = 0.0;
};

/// Potential known through inf/sup bounds on every cylinder up to a depth
/// cap J, plus the distortion schedule D_n derived from those bounds.
class CylinderBoundedPotential {
 public:
  static CylinderBoundedPotential from_potential(const Shift& shift, const Potential& pot, std::size_t depth_cap);
  /// `bounds_of(w)` is queried for every admissible w with 1 <= |w| <= cap.
  /// Throws InputError if the bounds are not finite, not ordered, or not
  /// nested (child cylinders must sit inside their parent's interval).
  static CylinderBoundedPotential from_function(
      const Shift& shift, std::size_t depth_cap,
      const std::function<CylinderBounds(std::span<const Letter>)>& bounds_of);

  const Shift& shift() const { return shift_; }
  std::size_t depth_cap() const { return tables_.size(); }
  CylinderBounds bounds(std::span<const Letter> w) const;

  /// Largest sup - inf over cylinders of the given depth; depths beyond the
  /// cap reuse the deepest table, which bounds them by nesting.
  double variation(std::size_t depth) const;
  /// D_n = exp(sum_{d=1..n} variation(d)): a bound on
  /// exp(S_n phi(x) - S_n phi(y)) for x, y in a common n-cylinder.
  double distortion(std::size_t n) const;
  /// D_n^{1/n} for n = 1..n_max.
  std::vector<double> distortion_rates(std::size_t n_max) const;

 private:
  CylinderBoundedPotential(const Shift& shift) : shift_(shift) {}
  void validate() const;

  Shift shift_;
  std::vector<WordIndex> indexes_;
  std::vector<std::vector<CylinderBounds>> tables_;
};

/// Memory-j potential equal on each depth-j cylinder to the recorded inf.
/// Throws InputError if j is zero or exceeds the depth cap.
Potential approximant(const CylinderBoundedPotential& pot, std::size_t j);

}  // namespace gxm
