#include "gxm/extension.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <set>
#include <unordered_set>

#include "block_dp.hpp"
#include "gxm/error.hpp"

namespace gxm {

using detail::Cell;
using detail::kNegInf;
using detail::log_add;

GroupExtension::GroupExtension(const Shift& shift, const Group& group, std::vector<Element> psi)
    : shift_(shift), group_(group), psi_(std::move(psi)) {
  if (psi_.size() != shift_.size()) {
    throw InputError("psi must assign a group element to each of the " + std::to_string(shift_.size()) + " letters");
  }
  for (const Element& g : psi_) group_.validate(g);
}

GroupExtension GroupExtension::restrict_to(std::span<const Letter> letters) const {
  std::vector<Element> psi;
  for (Letter c : letters) psi.push_back(psi_.at(c));
  return GroupExtension(shift_.restrict_to(letters), group_, std::move(psi));
}

bool GroupExtension::is_free_generator_bijection() const {
  if (group_.kind() != GroupKind::Free) return false;
  const std::size_t k = group_.rank();
  if (shift_.size() != 2 * k || !shift_.is_full()) return false;
  std::set<std::int32_t> seen;
  for (const Element& g : psi_) {
    if (g.size() != 1) return false;
    seen.insert(g[0]);
  }
  return seen.size() == 2 * k;
}

Element psi_word(const GroupExtension& ext, std::span<const Letter> w) {
  if (w.empty()) throw InputError("psi_word: the empty word has no image");
  require_admissible(ext.shift(), w);
  Element g = ext.psi(w[0]);
  for (std::size_t i = 1; i < w.size(); ++i) g = ext.group().mul(g, ext.psi(w[i]));
  return g;
}

double PartitionSum::value() const { return std::exp(log_value); }
double PartitionSum::pruned() const { return std::exp(log_pruned); }

namespace {

void check_constraint(const Shift& shift, const WordConstraint& c) {
  if (c.kind != WordConstraint::Kind::None && c.letter >= shift.size()) {
    throw InputError("constraint letter " + std::to_string(c.letter + 1) + " is outside the alphabet");
  }
  if (c.first_return && c.kind == WordConstraint::Kind::None) {
    throw InputError("first-return constraint needs a start letter");
  }
}

bool start_ok(std::span<const Letter> w, const WordConstraint& c) {
  if (c.kind == WordConstraint::Kind::None) return true;
  if (w[0] != c.letter) return false;
  if (c.first_return) {
    for (std::size_t i = 1; i < w.size(); ++i) {
      if (w[i] == c.letter) return false;
    }
  }
  return true;
}

bool end_ok(const Shift& shift, Letter last, const WordConstraint& c) {
  return c.kind != WordConstraint::Kind::StartAndReturn || shift.allowed(last, c.letter);
}

struct PotentialRun {
  detail::BlockChain chain;
  Potential lifted;
  std::vector<double> tails;
};

PotentialRun make_run(const Shift& shift, const Potential& pot, Bound bound) {
  detail::BlockChain chain = detail::potential_chain(shift, pot);
  Potential lifted = pot.with_memory(chain.block + 1);
  std::vector<double> tails(chain.states.size());
  for (std::size_t s = 0; s < tails.size(); ++s) {
    tails[s] = cylinder_sum_extreme(lifted, chain.states.word(s), chain.block, bound);
  }
  return PotentialRun{std::move(chain), std::move(lifted), std::move(tails)};
}

/// Words shorter than the block length, enumerated directly.
void for_each_short_word(const GroupExtension& ext, const Potential& pot, std::size_t n, const WordConstraint& c,
                         Bound bound, const std::function<void(const Element&, double)>& visit) {
  for_each_word(ext.shift(), n, [&](std::span<const Letter> w) {
    if (!start_ok(w, c) || !end_ok(ext.shift(), w.back(), c)) return;
    visit(psi_word(ext, w), cylinder_sum_extreme(pot, w, n, bound));
  });
}

/// Runs the DP for lengths block..n_max and hands each layer to `visit`.
void forward(const GroupExtension& ext, const PotentialRun& run, std::size_t n_max, const WordConstraint& c,
             const PartitionOptions& options, detail::ElementPool& pool,
             const std::function<void(const detail::SkewDP&)>& visit) {
  const std::size_t b = run.chain.block;
  if (n_max < b) return;
  detail::SkewOptions so;
  so.prune_eps = options.prune_eps;
  if (c.first_return) so.forbidden = c.letter;
  detail::SkewDP dp(run.chain, pool, so);
  for (std::size_t s = 0; s < run.chain.states.size(); ++s) {
    const auto block = run.chain.states.word(s);
    if (!start_ok(block, c)) continue;
    dp.seed(static_cast<std::uint32_t>(s), pool.intern(psi_word(ext, block)), 0.0);
  }
  visit(dp);
  for (std::size_t n = b + 1; n <= n_max; ++n) {
    dp.step();
    visit(dp);
  }
}

double max_tail(const std::vector<double>& tails) { return *std::max_element(tails.begin(), tails.end()); }

}  // namespace

std::vector<PartitionSum> partition_sum_sequence(const GroupExtension& ext, const Potential& pot, std::size_t n_max,
                                                 const Element& target, WordConstraint constraint,
                                                 const PartitionOptions& options) {
  if (!(ext.shift() == pot.shift())) throw InputError("partition_sum: potential and extension use different shifts");
  if (n_max == 0) throw InputError("partition_sum: n must be at least 1");
  ext.group().validate(target);
  check_constraint(ext.shift(), constraint);
  const PotentialRun run = make_run(ext.shift(), pot, options.bound);
  std::vector<PartitionSum> out;
  out.reserve(n_max);
  for (std::size_t n = 1; n < run.chain.block && n <= n_max; ++n) {
    PartitionSum ps{kNegInf, kNegInf};
    for_each_short_word(ext, pot, n, constraint, options.bound, [&](const Element& g, double s) {
      if (g == target) ps.log_value = log_add(ps.log_value, s);
    });
    out.push_back(ps);
  }
  detail::ElementPool pool(ext.group(), ext.psi(), options.pool_cap);
  const double tail_max = max_tail(run.tails);
  forward(ext, run, n_max, constraint, options, pool, [&](const detail::SkewDP& dp) {
    PartitionSum ps{kNegInf, dp.log_pruned() == kNegInf ? kNegInf : dp.log_pruned() + tail_max};
    const auto id = pool.find(target);
    if (id) {
      const auto& cells = dp.cells();
      for (std::size_t s = 0; s < cells.size(); ++s) {
        if (!end_ok(ext.shift(), run.chain.last_letter[s], constraint)) continue;
        const auto it = std::lower_bound(cells[s].begin(), cells[s].end(), *id,
                                         [](const Cell& c, std::uint32_t e) { return c.element < e; });
        if (it != cells[s].end() && it->element == *id) ps.log_value = log_add(ps.log_value, it->log_value + run.tails[s]);
      }
    }
    out.push_back(ps);
  });
  return out;
}

PartitionSum partition_sum(const GroupExtension& ext, const Potential& pot, std::size_t n, const Element& target,
                           WordConstraint constraint, const PartitionOptions& options) {
  return partition_sum_sequence(ext, pot, n, target, constraint, options).back();
}

std::vector<std::map<Element, double>> partition_tables(const GroupExtension& ext, const Potential& pot,
                                                        std::size_t n_max, const PartitionOptions& options) {
  if (!(ext.shift() == pot.shift())) throw InputError("partition_tables: potential and extension use different shifts");
  const PotentialRun run = make_run(ext.shift(), pot, options.bound);
  std::vector<std::map<Element, double>> out;
  for (std::size_t n = 1; n < run.chain.block && n <= n_max; ++n) {
    std::map<Element, double> table;
    for_each_short_word(ext, pot, n, WordConstraint::none(), options.bound, [&](const Element& g, double s) {
      auto [it, fresh] = table.emplace(g, s);
      if (!fresh) it->second = log_add(it->second, s);
    });
    out.push_back(std::move(table));
  }
  detail::ElementPool pool(ext.group(), ext.psi(), options.pool_cap);
  forward(ext, run, n_max, WordConstraint::none(), options, pool, [&](const detail::SkewDP& dp) {
    std::map<Element, double> table;
    const auto& cells = dp.cells();
    for (std::size_t s = 0; s < cells.size(); ++s) {
      for (const Cell& c : cells[s]) {
        const double v = c.log_value + run.tails[s];
        auto [it, fresh] = table.emplace(pool.element(c.element), v);
        if (!fresh) it->second = log_add(it->second, v);
      }
    }
    out.push_back(std::move(table));
  });
  return out;
}

std::vector<GroupMeasure> step_distributions(const GroupExtension& ext, const RpfData& rpf, std::size_t n_max,
                                             double prune_eps) {
  if (!(ext.shift() == rpf.shift)) throw InputError("step_distribution: Gibbs data and extension use different shifts");
  if (n_max == 0) throw InputError("step_distribution: n must be at least 1");
  const detail::BlockChain chain = detail::gibbs_chain(rpf);
  const std::size_t b = chain.block;
  std::vector<GroupMeasure> out;
  for (std::size_t n = 1; n < b && n <= n_max; ++n) {
    GroupMeasure m;
    for_each_word(ext.shift(), n, [&](std::span<const Letter> w) { m.masses[psi_word(ext, w)] += cylinder_mass(rpf, w); });
    out.push_back(std::move(m));
  }
  if (n_max < b) return out;
  detail::ElementPool pool(ext.group(), ext.psi(), std::size_t{1} << 23);
  detail::SkewOptions so;
  so.prune_eps = prune_eps;
  detail::SkewDP dp(chain, pool, so);
  for (std::size_t s = 0; s < chain.states.size(); ++s) {
    if (rpf.stationary[s] <= 0.0) continue;
    dp.seed(static_cast<std::uint32_t>(s), pool.intern(psi_word(ext, chain.states.word(s))),
            std::log(rpf.stationary[s]));
  }
  auto collect = [&]() {
    std::map<std::uint32_t, double> by_id;
    const auto& cells = dp.cells();
    for (const auto& cs : cells) {
      for (const Cell& c : cs) {
        auto [it, fresh] = by_id.emplace(c.element, c.log_value);
        if (!fresh) it->second = log_add(it->second, c.log_value);
      }
    }
    GroupMeasure m;
    for (const auto& [id, lv] : by_id) m.masses.emplace(pool.element(id), std::exp(lv));
    m.pruned_mass = dp.log_pruned() == kNegInf ? 0.0 : std::exp(dp.log_pruned());
    out.push_back(std::move(m));
  };
  collect();
  for (std::size_t n = b + 1; n <= n_max; ++n) {
    dp.step();
    collect();
  }
  return out;
}

GroupMeasure step_distribution(const GroupExtension& ext, const RpfData& rpf, std::size_t n, double prune_eps) {
  return step_distributions(ext, rpf, n, prune_eps).back();
}

ProbeResult irreducibility_probe(const GroupExtension& ext, std::size_t depth_cap, std::size_t state_cap) {
  const Shift& shift = ext.shift();
  const Group& group = ext.group();
  ProbeResult result;
  result.depth_cap = depth_cap;
  result.radius = depth_cap / 2;
  std::vector<Element> ball;
  try {
    ball = group.ball(result.radius, state_cap);
  } catch (const ResourceError&) {
    result.first_missing = "ball of radius " + std::to_string(result.radius) + " exceeds the state cap";
    return result;
  }
  const std::size_t m = shift.size();
  result.required = m * m * ball.size();

  for (Letter i = 0; i < m; ++i) {
    // BFS over (last letter, Psi(i w)) for words i w of length <= depth_cap.
    std::unordered_set<Element, ElementHash> seen;
    std::vector<std::unordered_set<Element, ElementHash>> reach(m);  // reach[j]: g with i w j admissible
    auto key = [](Letter last, const Element& g) {
      Element k = g;
      k.push_back(static_cast<std::int32_t>(last));
      return k;
    };
    std::vector<std::pair<Letter, Element>> frontier{{i, ext.psi(i)}};
    seen.insert(key(i, ext.psi(i)));
    bool overflow = false;
    for (std::size_t len = 1; len <= depth_cap && !frontier.empty() && !overflow; ++len) {
      for (const auto& [last, g] : frontier) {
        for (Letter j : shift.successors(last)) reach[j].insert(g);
      }
      if (len == depth_cap) break;
      std::vector<std::pair<Letter, Element>> next;
      for (const auto& [last, g] : frontier) {
        for (Letter c : shift.successors(last)) {
          Element h = group.mul(g, ext.psi(c));
          if (seen.insert(key(c, h)).second) next.emplace_back(c, std::move(h));
          if (seen.size() > state_cap) {
            overflow = true;
            break;
          }
        }
        if (overflow) break;
      }
      frontier.swap(next);
    }
    for (Letter j = 0; j < m; ++j) {
      for (const Element& g : ball) {
        if (reach[j].count(g)) {
          ++result.covered;
        } else if (result.first_missing.empty()) {
          result.first_missing = "i=" + std::to_string(i + 1) + " j=" + std::to_string(j + 1) + " g=" + group.format(g);
        }
      }
    }
  }
  result.status = result.covered == result.required ? ProbeResult::Status::Proven : ProbeResult::Status::Unknown;
  return result;
}

SkewTable SkewTable::fiber_indicator(const Shift& shift, const Element& g, std::size_t depth) {
  GroupMeasure m = GroupMeasure::delta(g);
  return lift(shift, m, depth);
}

SkewTable SkewTable::lift(const Shift& shift, const GroupMeasure& m, std::size_t depth) {
  if (depth == 0) throw InputError("skew table: depth must be at least 1");
  SkewTable t;
  t.depth = depth;
  t.pruned_mass = m.pruned_mass;
  for (const Word& w : enumerate_words(shift, depth)) {
    for (const auto& [g, v] : m.masses) {
      if (v != 0.0) t.values[{w, g}] = v;
    }
  }
  return t;
}

double SkewTable::at(const Word& w, const Element& g) const {
  const auto it = values.find({w, g});
  return it == values.end() ? 0.0 : it->second;
}

void SkewTable::add(const Word& w, const Element& g, double v) {
  if (w.size() != depth) throw InputError("skew table: word length does not match the table depth");
  if (v < 0.0) throw InputError("skew table: values must be nonnegative");
  values[{w, g}] += v;
}

}  // namespace gxm
