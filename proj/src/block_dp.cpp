#include "block_dp.hpp"

#include <algorithm>
#include <cmath>

#include "gxm/error.hpp"
#include "gxm/parallel.hpp"

namespace gxm::detail {

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

namespace {

BlockChain chain_skeleton(const Shift& shift, std::size_t block) {
  BlockChain chain;
  chain.block = block;
  chain.states = WordIndex(shift, block);
  const std::size_t n = chain.states.size();
  chain.last_letter.resize(n);
  chain.incoming.assign(n, {});
  for (std::size_t s = 0; s < n; ++s) chain.last_letter[s] = chain.states.word(s).back();
  return chain;
}

void finish_growth(BlockChain& chain) {
  std::vector<double> out(chain.states.size(), kNegInf);
  for (const auto& edges : chain.incoming) {
    for (const auto& e : edges) out[e.source] = log_add(out[e.source], e.log_weight);
  }
  chain.log_growth = *std::max_element(out.begin(), out.end());
}

}  // namespace

BlockChain potential_chain(const Shift& shift, const Potential& pot) {
  const std::size_t memory = std::max<std::size_t>(pot.memory(), 2);
  const Potential lifted = pot.with_memory(memory);
  BlockChain chain = chain_skeleton(shift, memory - 1);
  const WordIndex& windows = lifted.words();
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto y = windows.word(i);
    const auto s = static_cast<std::uint32_t>(chain.states.at(y.first(memory - 1)));
    const std::size_t t = chain.states.at(y.subspan(1));
    chain.incoming[t].push_back({s, lifted.values()[i]});
  }
  finish_growth(chain);
  return chain;
}

BlockChain gibbs_chain(const RpfData& rpf) {
  BlockChain chain = chain_skeleton(rpf.shift, rpf.memory - 1);
  const std::size_t n = chain.states.size();
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      const double p = rpf.transition(s, t);
      if (p > 0.0) chain.incoming[t].push_back({static_cast<std::uint32_t>(s), std::log(p)});
    }
  }
  finish_growth(chain);
  return chain;
}

ElementPool::ElementPool(const Group& group, std::vector<Element> letter_images, std::size_t cap)
    : group_(group), images_(std::move(letter_images)), letters_(images_.size()), cap_(cap) {}

std::uint32_t ElementPool::intern(const Element& e) {
  const auto it = ids_.find(e);
  if (it != ids_.end()) return it->second;
  if (elements_.size() >= cap_) {
    throw ResourceError("group-element pool exceeded " + std::to_string(cap_) +
                        " elements; raise prune_eps or lower n");
  }
  const auto id = static_cast<std::uint32_t>(elements_.size());
  elements_.push_back(e);
  ids_.emplace(e, id);
  cache_.resize(elements_.size() * letters_, kUnknown);
  return id;
}

std::optional<std::uint32_t> ElementPool::find(const Element& e) const {
  const auto it = ids_.find(e);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t ElementPool::times(std::uint32_t id, Letter c) {
  std::uint32_t cached = cache_[id * letters_ + c];
  if (cached != kUnknown) return cached;
  const Element product = group_.mul(elements_[id], images_[c]);
  cached = intern(product);
  cache_[id * letters_ + c] = cached;
  return cached;
}

std::vector<std::uint32_t> ElementPool::retain(const std::vector<char>& keep) {
  std::vector<std::uint32_t> remap(elements_.size(), kDropped);
  std::vector<Element> kept;
  ids_.clear();
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (!keep[i]) continue;
    remap[i] = static_cast<std::uint32_t>(kept.size());
    ids_.emplace(elements_[i], remap[i]);
    kept.push_back(std::move(elements_[i]));
  }
  elements_ = std::move(kept);
  cache_.assign(elements_.size() * letters_, kUnknown);
  return remap;
}

void merge_cells(std::vector<Cell>& cells) {
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    return a.element != b.element ? a.element < b.element : a.log_value < b.log_value;
  });
  std::size_t out = 0;
  for (std::size_t i = 0; i < cells.size();) {
    std::size_t j = i;
    double mx = kNegInf;
    while (j < cells.size() && cells[j].element == cells[i].element) {
      mx = std::max(mx, cells[j].log_value);
      ++j;
    }
    double sum = 0.0;
    if (mx != kNegInf) {
      for (std::size_t r = i; r < j; ++r) sum += std::exp(cells[r].log_value - mx);
    }
    cells[out++] = Cell{cells[i].element, mx == kNegInf ? kNegInf : mx + std::log(sum)};
    i = j;
  }
  cells.resize(out);
}

SkewDP::SkewDP(const BlockChain& chain, ElementPool& pool, SkewOptions options)
    : chain_(chain), pool_(pool), options_(options), length_(chain.block), cells_(chain.states.size()) {}

void SkewDP::seed(std::uint32_t state, std::uint32_t element, double log_value) {
  cells_[state].push_back(Cell{element, log_value});
  seeded_dirty_ = true;
}

void SkewDP::normalize_seeded() const {
  if (!seeded_dirty_) return;
  for (auto& c : cells_) merge_cells(c);
  seeded_dirty_ = false;
}

const std::vector<std::vector<Cell>>& SkewDP::cells() const {
  normalize_seeded();
  return cells_;
}

void SkewDP::step() {
  normalize_seeded();
  const std::size_t n = chain_.states.size();
  // Products are computed sequentially so that the parallel phase only reads
  // the cache.
  for (std::size_t t = 0; t < n; ++t) {
    const Letter c = chain_.last_letter[t];
    if (options_.forbidden && c == *options_.forbidden) continue;
    for (const auto& e : chain_.incoming[t]) {
      for (const Cell& cell : cells_[e.source]) pool_.times(cell.element, c);
    }
  }
  std::vector<std::vector<Cell>> next(n);
  parallel_for(n, [&](std::size_t t) {
    const Letter c = chain_.last_letter[t];
    if (options_.forbidden && c == *options_.forbidden) return;
    auto& out = next[t];
    for (const auto& e : chain_.incoming[t]) {
      for (const Cell& cell : cells_[e.source]) {
        out.push_back(Cell{pool_.cached_times(cell.element, c), cell.log_value + e.log_weight});
      }
    }
    merge_cells(out);
  });
  cells_.swap(next);
  ++length_;
  if (log_pruned_ != kNegInf) log_pruned_ += chain_.log_growth;
  prune();
  compact();
}

void SkewDP::compact() {
  if (options_.prune_eps <= 0.0) return;
  std::size_t live = 0;
  for (const auto& cs : cells_) live += cs.size();
  if (pool_.size() < 2 * live + 65536) return;
  std::vector<char> keep(pool_.size(), 0);
  for (const auto& cs : cells_) {
    for (const Cell& c : cs) keep[c.element] = 1;
  }
  const auto remap = pool_.retain(keep);
  for (auto& cs : cells_) {
    for (Cell& c : cs) c.element = remap[c.element];
    merge_cells(cs);
  }
}

void SkewDP::prune() {
  if (options_.prune_eps <= 0.0) return;
  double total = kNegInf;
  for (const auto& cs : cells_) {
    for (const Cell& c : cs) total = log_add(total, c.log_value);
  }
  if (total == kNegInf) return;
  const double cut = std::log(options_.prune_eps) + total;
  for (auto& cs : cells_) {
    std::size_t out = 0;
    for (const Cell& c : cs) {
      if (c.log_value < cut) {
        log_pruned_ = log_add(log_pruned_, c.log_value);
      } else {
        cs[out++] = c;
      }
    }
    cs.resize(out);
  }
}

}  // namespace gxm::detail
