#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace gxm {

/// Canonical element encoding, shared by all group kinds:
///  - finite group: {index} into the Cayley table;
///  - free abelian group of rank d: the d integer coordinates;
///  - free group of rank k: the reduced word as a sequence of nonzero
///    integers, +i for the i-th generator and -i for its inverse.
/// The encoding is canonical, so it doubles as a hash and sort key.
using Element = std::vector<std::int32_t>;

struct ElementHash {
  std::size_t operator()(const Element& e) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ull ^ e.size();
    for (std::int32_t x : e) {
      h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(x)) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

enum class GroupKind { Finite, FreeAbelian, Free };

class Group {
 public:
  /// Validates that the table is a Latin square with a two-sided identity
  /// and an associative law.
  static Group finite(const std::vector<std::vector<int>>& cayley, std::string name = "finite");
  static Group cyclic(std::size_t order);
  /// Permutations of {1,2,3} in lexicographic order; (g h)(x) = g(h(x)).
  static Group symmetric3();
  /// "trivial", "Z<n>" (cyclic of order n) or "S3".
  static Group finite_by_name(const std::string& name);
  static Group trivial() { return cyclic(1); }
  static Group free_abelian(std::size_t rank);
  static Group free(std::size_t rank);

  GroupKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  /// Rank of a free or free abelian group; 0 for finite groups.
  std::size_t rank() const { return rank_; }
  /// Order of a finite group; 0 for infinite groups.
  std::size_t order() const { return table_.size(); }
  bool is_finite() const { return kind_ == GroupKind::Finite; }
  /// Finite and free abelian groups are amenable; free groups of rank >= 2
  /// are not. Descriptive metadata only.
  bool is_amenable() const { return kind_ != GroupKind::Free || rank_ <= 1; }

  Element identity() const;
  bool is_identity(const Element& g) const;
  Element mul(const Element& g, const Element& h) const;
  Element inv(const Element& g) const;
  /// Throws InputError when `g` is not a valid encoding (wrong arity,
  /// index out of range, unreduced free word, ...).
  void validate(const Element& g) const;
  /// Word length for the standard generators: l1 norm on Z^d, reduced length
  /// on free groups, 0 for finite groups.
  std::size_t word_length(const Element& g) const;
  /// i-th standard generator (0-based), or its inverse. Finite groups have no
  /// standard generators.
  Element generator(std::size_t i, bool inverse = false) const;

  /// All elements of word length <= r in a deterministic order (all elements
  /// for finite groups). Throws ResourceError beyond `cap` elements.
  std::vector<Element> ball(std::size_t r, std::size_t cap = std::size_t{1} << 22) const;

  /// Free: "e", "a", "aB" (capitals are inverses); Z^d: "(1,-2)";
  /// finite: the index.
  std::string format(const Element& g) const;
  Element parse(const std::string& text) const;

 private:
  GroupKind kind_ = GroupKind::Finite;
  std::string name_;
  std::size_t rank_ = 0;
  std::vector<std::vector<int>> table_;
  std::vector<int> inverse_;
  int identity_index_ = 0;
};

/// Finitely supported nonnegative measure on a group, with accounting of the
/// mass removed by pruning.
struct GroupMeasure {
  std::map<Element, double> masses;
  double pruned_mass = 0.0;

  static GroupMeasure delta(const Element& g, double mass = 1.0);
  double total_mass() const;
  double at(const Element& g) const;
  void add(const Element& g, double mass);
};

/// (mu * nu)(g) = sum_h mu(h) nu(h^-1 g). Entries below `prune_eps` are
/// dropped and their mass moved to pruned_mass; pruned masses of the inputs
/// propagate so that total + pruned is multiplicative. Exact for
/// prune_eps = 0. Throws ResourceError when the result would hold more than
/// `support_cap` elements.
GroupMeasure convolve(const Group& group, const GroupMeasure& mu, const GroupMeasure& nu, double prune_eps = 0.0,
                      std::size_t support_cap = std::size_t{1} << 22);

/// mu-check(g) = mu(g^-1).
GroupMeasure reflect(const Group& group, const GroupMeasure& mu);

}  // namespace gxm
