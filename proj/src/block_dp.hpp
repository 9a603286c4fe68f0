#pragma once

// Forward dynamic programming over (block state, group element).
//
// A word of length n >= b is tracked by its last b letters (a state of the
// recoded shift) together with Psi of the whole word. Values are kept as
// logarithms so that weights spread over thousands of e-folds (biased walks
// at n ~ 10^3) stay representable.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "gxm/gibbs.hpp"
#include "gxm/group.hpp"
#include "gxm/potential.hpp"
#include "gxm/shift.hpp"
#include "gxm/word_index.hpp"

namespace gxm::detail {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b);

struct BlockChain {
  struct Edge {
    std::uint32_t source;
    double log_weight;
  };
  std::size_t block = 1;
  WordIndex states;
  std::vector<Letter> last_letter;
  /// incoming[t]: edges s -> t; the appended letter is last_letter[t].
  std::vector<std::vector<Edge>> incoming;
  /// log of the largest total outgoing weight of a state.
  double log_growth = 0.0;
};

/// Edge s -> t weighted by phi(s c) for the potential promoted to memory
/// K = max(k, 2); states are blocks of length K - 1.
BlockChain potential_chain(const Shift& shift, const Potential& pot);
/// Edge s -> t weighted by the Gibbs transition probability.
BlockChain gibbs_chain(const RpfData& rpf);

/// Interns group elements and memoizes right multiplication by the image of
/// each letter.
class ElementPool {
 public:
  ElementPool(const Group& group, std::vector<Element> letter_images, std::size_t cap);

  std::uint32_t intern(const Element& e);
  std::optional<std::uint32_t> find(const Element& e) const;
  const Element& element(std::uint32_t id) const { return elements_[id]; }
  std::size_t size() const { return elements_.size(); }
  const Group& group() const { return group_; }

  /// Id of element(id) * psi(c); fills the cache. Not thread safe.
  std::uint32_t times(std::uint32_t id, Letter c);
  /// Cached product; only valid after times(id, c) has run.
  std::uint32_t cached_times(std::uint32_t id, Letter c) const { return cache_[id * letters_ + c]; }

  /// Keeps only the flagged ids, renumbered in order, and clears the product
  /// cache. Returns the old-to-new map (kDropped for removed ids).
  std::vector<std::uint32_t> retain(const std::vector<char>& keep);
  static constexpr std::uint32_t kDropped = std::numeric_limits<std::uint32_t>::max();

 private:
  static constexpr std::uint32_t kUnknown = std::numeric_limits<std::uint32_t>::max();
  const Group& group_;
  std::vector<Element> images_;
  std::size_t letters_;
  std::size_t cap_;
  std::vector<Element> elements_;
  std::unordered_map<Element, std::uint32_t, ElementHash> ids_;
  std::vector<std::uint32_t> cache_;
};

struct Cell {
  std::uint32_t element;
  double log_value;
};

struct SkewOptions {
  /// Cells below prune_eps times the layer total are dropped (0 = exact).
  double prune_eps = 0.0;
  /// Letter that appended letters may not equal.
  std::optional<Letter> forbidden;
};

class SkewDP {
 public:
  SkewDP(const BlockChain& chain, ElementPool& pool, SkewOptions options);

  /// Adds log_value to the cell (state, element) of the initial layer, which
  /// represents words of length `block`.
  void seed(std::uint32_t state, std::uint32_t element, double log_value);
  /// Appends one letter to every tracked word.
  void step();

  std::size_t length() const { return length_; }
  const std::vector<std::vector<Cell>>& cells() const;
  /// log of an upper bound on the mass, at the current layer, that pruned
  /// cells would have carried.
  double log_pruned() const { return log_pruned_; }

 private:
  void normalize_seeded() const;
  void prune();
  /// Rebuilds the pool from the live cells once dead elements dominate it, so
  /// that pruned runs are bounded by their live support.
  void compact();

  const BlockChain& chain_;
  ElementPool& pool_;
  SkewOptions options_;
  std::size_t length_;
  mutable bool seeded_dirty_ = false;
  mutable std::vector<std::vector<Cell>> cells_;
  double log_pruned_ = kNegInf;
};

/// Sorts by element and merges duplicates with log-sum-exp.
void merge_cells(std::vector<Cell>& cells);

}  // namespace gxm::detail
