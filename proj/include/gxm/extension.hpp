#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gxm/gibbs.hpp"
#include "gxm/group.hpp"
#include "gxm/potential.hpp"
#include "gxm/shift.hpp"

namespace gxm {

/// Shift together with a group and a letter map psi; the skew product acts by
/// (x, g) -> (sigma x, g psi(x_1)).
class GroupExtension {
 public:
  /// Throws InputError unless psi has one valid element per letter.
  GroupExtension(const Shift& shift, const Group& group, std::vector<Element> psi);

  const Shift& shift() const { return shift_; }
  const Group& group() const { return group_; }
  const std::vector<Element>& psi() const { return psi_; }
  const Element& psi(Letter c) const { return psi_.at(c); }

  /// Extension over the subshift on `letters` (ascending, distinct).
  GroupExtension restrict_to(std::span<const Letter> letters) const;

  /// Full 2k-shift onto the free group F_k with psi a bijection onto the
  /// generators and their inverses.
  bool is_free_generator_bijection() const;

 private:
  Shift shift_;
  Group group_;
  std::vector<Element> psi_;
};

/// psi(w_1) psi(w_2) ... psi(w_n). Throws InputError on the empty word.
Element psi_word(const GroupExtension& ext, std::span<const Letter> w);

struct WordConstraint {
  enum class Kind { None, StartLetter, StartAndReturn };
  Kind kind = Kind::None;
  Letter letter = 0;
  /// Additionally forbid `letter` at positions 2..n.
  bool first_return = false;

  static WordConstraint none() { return {}; }
  static WordConstraint start(Letter a) { return {Kind::StartLetter, a, false}; }
  static WordConstraint start_and_return(Letter a, bool first_return = false) {
    return {Kind::StartAndReturn, a, first_return};
  }
};

struct PartitionOptions {
  Bound bound = Bound::Sup;
  /// Relative pruning threshold per DP layer (0 = exact).
  double prune_eps = 0.0;
  std::size_t pool_cap = std::size_t{1} << 23;
};

/// A partition sum in log form: sum = exp(log_value), with
/// exp(log_pruned) bounding the contribution lost to pruning.
struct PartitionSum {
  double log_value = 0.0;
  double log_pruned = 0.0;
  double value() const;
  double pruned() const;
};

/// Sum over admissible words w of length n with Psi(w) = target and the
/// selected constraint of exp(sup or inf of S_n phi over [w]).
PartitionSum partition_sum(const GroupExtension& ext, const Potential& pot, std::size_t n, const Element& target,
                           WordConstraint constraint, const PartitionOptions& options = {});

/// The same sums for every n = 1..n_max from a single forward pass.
std::vector<PartitionSum> partition_sum_sequence(const GroupExtension& ext, const Potential& pot, std::size_t n_max,
                                                 const Element& target, WordConstraint constraint,
                                                 const PartitionOptions& options = {});

/// For n = 1..n_max, the map g -> log of the unconstrained sum over
/// {w : |w| = n, Psi(w) = g} (only reached g are present).
std::vector<std::map<Element, double>> partition_tables(const GroupExtension& ext, const Potential& pot,
                                                        std::size_t n_max, const PartitionOptions& options = {});

/// p_n(g) = mu({x : Psi(x_1..x_n) = g}) for n = 1..n_max; pruned mass is
/// recorded in each measure.
std::vector<GroupMeasure> step_distributions(const GroupExtension& ext, const RpfData& rpf, std::size_t n_max,
                                             double prune_eps = 0.0);
GroupMeasure step_distribution(const GroupExtension& ext, const RpfData& rpf, std::size_t n, double prune_eps = 0.0);

struct ProbeResult {
  enum class Status { Proven, Unknown };
  Status status = Status::Unknown;
  std::size_t depth_cap = 0;
  std::size_t radius = 0;
  std::size_t required = 0;  // (i, j, g) triples to realise
  std::size_t covered = 0;
  std::string first_missing;  // "i=1 j=2 g=..." when not proven
};

/// Bounded search for connecting words: for every letter pair (i, j) and g
/// in the ball of radius depth_cap / 2, looks for w with i w j admissible,
/// |i w| <= depth_cap and Psi(i w) = g. One-sided: failure means Unknown.
ProbeResult irreducibility_probe(const GroupExtension& ext, std::size_t depth_cap,
                                 std::size_t state_cap = std::size_t{1} << 21);

/// Nonnegative function on Sigma x G that depends on the first `depth`
/// letters and the group coordinate, with finite support.
struct SkewTable {
  std::size_t depth = 1;
  std::map<std::pair<Word, Element>, double> values;
  double pruned_mass = 0.0;

  /// 1 on Sigma x {g}.
  static SkewTable fiber_indicator(const Shift& shift, const Element& g, std::size_t depth = 1);
  /// f(w, g) = m(g) for every admissible w of length `depth`.
  static SkewTable lift(const Shift& shift, const GroupMeasure& m, std::size_t depth = 1);

  double at(const Word& w, const Element& g) const;
  void add(const Word& w, const Element& g, double v);
};

}  // namespace gxm
