#include "gxm/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gxm/error.hpp"

namespace gxm {

Potential::Potential(const Shift& shift, std::size_t memory, std::vector<double> values)
    : shift_(shift), memory_(memory), words_(shift, memory), values_(std::move(values)) {
  if (memory == 0) throw InputError("potential: memory must be at least 1");
  if (values_.size() != words_.size()) {
    throw InputError("potential: expected " + std::to_string(words_.size()) + " values, got " +
                     std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InputError("potential: values must be finite");
  }
}

Potential Potential::from_table(const Shift& shift, std::size_t memory, const std::map<Word, double>& table) {
  if (memory == 0) throw InputError("potential: memory must be at least 1");
  WordIndex index(shift, memory);
  std::vector<double> values(index.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& [word, value] : table) {
    if (word.size() != memory) {
      throw InputError("potential: word " + format_word(word) + " does not have length " + std::to_string(memory));
    }
    const auto idx = index.find(word);
    if (!idx) throw InputError("potential: word " + format_word(word) + " is not admissible");
    values[*idx] = value;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) {
      throw InputError("potential: missing value for admissible word " + format_word(index.word(i)));
    }
  }
  return Potential(shift, memory, std::move(values));
}

Potential Potential::from_letters(const Shift& shift, std::span<const double> values) {
  if (values.size() != shift.size()) throw InputError("potential: need one value per letter");
  return Potential(shift, 1, std::vector<double>(values.begin(), values.end()));
}

Potential Potential::constant(const Shift& shift, double c) {
  return Potential(shift, 1, std::vector<double>(shift.size(), c));
}

double Potential::value(std::span<const Letter> prefix) const {
  if (prefix.size() < memory_) throw InputError("potential: prefix shorter than the memory");
  return values_[words_.at(prefix.first(memory_))];
}

Potential Potential::with_memory(std::size_t memory) const {
  if (memory < memory_) throw InputError("potential: cannot lower the memory of a potential");
  if (memory == memory_) return *this;
  WordIndex index(shift_, memory);
  std::vector<double> values(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) values[i] = value(index.word(i));
  return Potential(shift_, memory, std::move(values));
}

Potential Potential::plus_constant(double c) const {
  std::vector<double> values = values_;
  for (double& v : values) v += c;
  return Potential(shift_, memory_, std::move(values));
}

std::map<Word, double> Potential::table() const {
  std::map<Word, double> out;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    const auto w = words_.word(i);
    out.emplace(Word(w.begin(), w.end()), values_[i]);
  }
  return out;
}

namespace {

void require_same_shift(const Shift& shift, const Potential& pot) {
  if (!(shift == pot.shift())) throw InputError("potential was built for a different shift");
}

}  // namespace

double cylinder_sum_extreme(const Potential& pot, std::span<const Letter> v, std::size_t windows, Bound bound,
                            std::optional<Letter> next) {
  const Shift& shift = pot.shift();
  const std::size_t k = pot.memory();
  const std::size_t len = v.size();
  if (len == 0) throw InputError("cylinder_sum_extreme: empty word");
  require_admissible(shift, v);
  if (next) {
    if (*next >= shift.size()) throw InputError("cylinder_sum_extreme: next letter out of range");
    if (!shift.allowed(v.back(), *next)) {
      throw InputError("cylinder_sum_extreme: cylinder [" + format_word(v) + " " + std::to_string(*next + 1) +
                       "] is empty");
    }
  }
  // Windows [i, i+k) lying inside v contribute a fixed amount.
  const std::size_t inside = len + 1 > k ? std::min(windows, len + 1 - k) : 0;
  double fixed = 0.0;
  for (std::size_t i = 0; i < inside; ++i) fixed += pot.value(v.subspan(i));
  if (inside == windows) return fixed;

  // The remaining windows reach past the end of v; optimise over the
  // continuation letters they can see.
  const std::size_t needed = windows + k - 1 - len;
  Word buffer(v.begin(), v.end());
  buffer.resize(len + needed);
  const bool want_max = bound == Bound::Sup;
  double best = want_max ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();

  std::function<void(std::size_t)> extend = [&](std::size_t pos) {
    if (pos == len + needed) {
      double s = 0.0;
      for (std::size_t i = inside; i < windows; ++i) s += pot.value(std::span<const Letter>(buffer).subspan(i, k));
      best = want_max ? std::max(best, s) : std::min(best, s);
      return;
    }
    if (pos == len && next) {
      buffer[pos] = *next;
      extend(pos + 1);
      return;
    }
    for (Letter c : shift.successors(buffer[pos - 1])) {
      buffer[pos] = c;
      extend(pos + 1);
    }
  };
  extend(len);
  return fixed + best;
}

SumBounds ergodic_sum_bounds(const Shift& shift, const Potential& pot, std::span<const Letter> w) {
  require_same_shift(shift, pot);
  if (w.empty()) throw InputError("ergodic_sum_bounds: word must be nonempty");
  require_admissible(shift, w);
  return {cylinder_sum_extreme(pot, w, w.size(), Bound::Inf), cylinder_sum_extreme(pot, w, w.size(), Bound::Sup)};
}

TransferMatrix transfer_matrix(const Shift& shift, const Potential& pot) {
  require_same_shift(shift, pot);
  TransferMatrix tm;
  tm.memory = std::max<std::size_t>(pot.memory(), 2);
  const Potential lifted = pot.with_memory(tm.memory);
  tm.states = WordIndex(shift, tm.memory - 1);
  const std::size_t n = tm.states.size();
  tm.matrix = DenseMatrix(n, n, 0.0);
  const WordIndex& windows = lifted.words();
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto y = windows.word(i);
    const std::size_t s = tm.states.at(y.first(tm.memory - 1));
    const std::size_t t = tm.states.at(y.subspan(1));
    tm.matrix(t, s) = std::exp(lifted.values()[i]);
  }
  return tm;
}

Normalization normalize(const Shift& shift, const Potential& pot) {
  require_same_shift(shift, pot);
  if (!is_mixing(shift)) throw PreconditionError("normalize: shift is not topologically mixing");
  TransferMatrix tm = transfer_matrix(shift, pot);
  const LeadingEigenpair eig = perron_eigenpair(tm.matrix);
  if (!(eig.value > 0.0)) throw PreconditionError("normalize: transfer matrix has no positive Perron root");
  for (double h : eig.vector) {
    if (!(h > 0.0)) throw PreconditionError("normalize: Perron eigenfunction is not strictly positive");
  }
  const double pressure = std::log(eig.value);
  const Potential lifted = pot.with_memory(tm.memory);
  const WordIndex& windows = lifted.words();
  std::vector<double> values(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto y = windows.word(i);
    const double hs = eig.vector[tm.states.at(y.first(tm.memory - 1))];
    const double ht = eig.vector[tm.states.at(y.subspan(1))];
    values[i] = lifted.values()[i] + std::log(hs) - std::log(ht) - pressure;
  }
  return Normalization{Potential(shift, tm.memory, std::move(values)), pressure,
                       Eigenfunction{tm.states, eig.vector}};
}

Potential add_coboundary(const Shift& shift, const Potential& pot, std::span<const double> u) {
  require_same_shift(shift, pot);
  if (u.size() != shift.size()) throw InputError("add_coboundary: need one value per letter");
  for (double x : u) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InputError("add_coboundary: u must be positive and finite");
  }
  const Potential lifted = pot.with_memory(std::max<std::size_t>(pot.memory(), 2));
  std::vector<double> values(lifted.values().begin(), lifted.values().end());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto y = lifted.words().word(i);
    values[i] += std::log(u[y[0]]) - std::log(u[y[1]]);
  }
  return Potential(shift, lifted.memory(), std::move(values));
}

Potential restrict_potential(const Potential& pot, const Shift& sub_shift, std::span<const Letter> letters) {
  WordIndex index(sub_shift, pot.memory());
  std::vector<double> values(index.size());
  Word original(pot.memory());
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto w = index.word(i);
    for (std::size_t j = 0; j < w.size(); ++j) original[j] = letters[w[j]];
    values[i] = pot.value(original);
  }
  return Potential(sub_shift, pot.memory(), std::move(values));
}

CylinderBoundedPotential CylinderBoundedPotential::from_potential(const Shift& shift, const Potential& pot,
                                                                  std::size_t depth_cap) {
  require_same_shift(shift, pot);
  const std::size_t k = pot.memory();
  return from_function(shift, depth_cap, [&](std::span<const Letter> w) {
    if (w.size() >= k) {
      const double v = pot.value(w);
      return CylinderBounds{v, v};
    }
    // phi depends on k letters; extremise over admissible completions of w.
    CylinderBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < pot.words().size(); ++i) {
      const auto y = pot.words().word(i);
      if (std::equal(w.begin(), w.end(), y.begin())) {
        b.inf = std::min(b.inf, pot.values()[i]);
        b.sup = std::max(b.sup, pot.values()[i]);
      }
    }
    return b;
  });
}

CylinderBoundedPotential CylinderBoundedPotential::from_function(
    const Shift& shift, std::size_t depth_cap, const std::function<CylinderBounds(std::span<const Letter>)>& bounds_of) {
  if (depth_cap == 0) throw InputError("cylinder bounds: depth cap must be at least 1");
  CylinderBoundedPotential out(shift);
  for (std::size_t d = 1; d <= depth_cap; ++d) {
    out.indexes_.emplace_back(shift, d);
    const WordIndex& idx = out.indexes_.back();
    std::vector<CylinderBounds> table(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) table[i] = bounds_of(idx.word(i));
    out.tables_.push_back(std::move(table));
  }
  out.validate();
  return out;
}

void CylinderBoundedPotential::validate() const {
  constexpr double kSlack = 1e-15;
  for (std::size_t d = 0; d < tables_.size(); ++d) {
    for (std::size_t i = 0; i < tables_[d].size(); ++i) {
      const auto& b = tables_[d][i];
      const auto w = indexes_[d].word(i);
      if (!std::isfinite(b.inf) || !std::isfinite(b.sup)) {
        throw InputError("cylinder bounds: non-finite bound on " + format_word(w));
      }
      if (b.inf > b.sup) throw InputError("cylinder bounds: inf > sup on " + format_word(w));
      if (d > 0) {
        const auto& parent = tables_[d - 1][indexes_[d - 1].at(w.first(d))];
        if (b.inf < parent.inf - kSlack || b.sup > parent.sup + kSlack) {
          throw InputError("cylinder bounds: bounds on " + format_word(w) + " are not nested in the parent cylinder");
        }
      }
    }
  }
}

CylinderBounds CylinderBoundedPotential::bounds(std::span<const Letter> w) const {
  if (w.empty() || w.size() > tables_.size()) {
    throw InputError("cylinder bounds: depth " + std::to_string(w.size()) + " outside [1, " +
                     std::to_string(tables_.size()) + "]");
  }
  return tables_[w.size() - 1][indexes_[w.size() - 1].at(w)];
}

double CylinderBoundedPotential::variation(std::size_t depth) const {
  const std::size_t d = std::min(std::max<std::size_t>(depth, 1), tables_.size());
  double v = 0.0;
  for (const auto& b : tables_[d - 1]) v = std::max(v, b.sup - b.inf);
  return v;
}

double CylinderBoundedPotential::distortion(std::size_t n) const {
  double s = 0.0;
  for (std::size_t d = 1; d <= n; ++d) s += variation(d);
  return std::exp(s);
}

std::vector<double> CylinderBoundedPotential::distortion_rates(std::size_t n_max) const {
  std::vector<double> out;
  double s = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    s += variation(n);
    out.push_back(std::exp(s / static_cast<double>(n)));
  }
  return out;
}

Potential approximant(const CylinderBoundedPotential& pot, std::size_t j) {
  if (j == 0 || j > pot.depth_cap()) {
    throw InputError("approximant: depth " + std::to_string(j) + " exceeds the available depth " +
                     std::to_string(pot.depth_cap()));
  }
  WordIndex index(pot.shift(), j);
  std::vector<double> values(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) values[i] = pot.bounds(index.word(i)).inf;
  return Potential(pot.shift(), j, std::move(values));
}

}  // namespace gxm
