#include "gxm/shift.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "gxm/error.hpp"

namespace gxm {

Shift::Shift(const std::vector<std::vector<int>>& incidence) : size_(incidence.size()) {
  if (size_ == 0) throw InputError("shift: alphabet must contain at least one letter");
  words_per_row_ = (size_ + 63) / 64;
  bits_.assign(size_ * words_per_row_, 0);
  successors_.resize(size_);
  predecessors_.resize(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    if (incidence[i].size() != size_) {
      throw InputError("shift: incidence matrix must be square (row " + std::to_string(i + 1) +
                       " has " + std::to_string(incidence[i].size()) + " entries)");
    }
    for (std::size_t j = 0; j < size_; ++j) {
      const int a = incidence[i][j];
      if (a != 0 && a != 1) throw InputError("shift: incidence entries must be 0 or 1");
      if (a == 1) {
        bits_[i * words_per_row_ + (j >> 6)] |= std::uint64_t{1} << (j & 63);
        successors_[i].push_back(static_cast<Letter>(j));
        predecessors_[j].push_back(static_cast<Letter>(i));
      }
    }
  }
  for (std::size_t i = 0; i < size_; ++i) {
    if (successors_[i].empty()) {
      throw InputError("shift: row " + std::to_string(i + 1) + " of the incidence matrix is all zero");
    }
    if (predecessors_[i].empty()) {
      throw InputError("shift: column " + std::to_string(i + 1) + " of the incidence matrix is all zero");
    }
  }
}

Shift Shift::full(std::size_t alphabet_size) {
  return Shift(std::vector<std::vector<int>>(alphabet_size, std::vector<int>(alphabet_size, 1)));
}

Shift Shift::golden_mean() { return Shift({{1, 1}, {1, 0}}); }

bool Shift::is_full() const {
  for (const auto& row : successors_) {
    if (row.size() != size_) return false;
  }
  return true;
}

std::vector<std::vector<int>> Shift::incidence() const {
  std::vector<std::vector<int>> out(size_, std::vector<int>(size_, 0));
  for (std::size_t i = 0; i < size_; ++i) {
    for (Letter j : successors_[i]) out[i][j] = 1;
  }
  return out;
}

Shift Shift::restrict_to(std::span<const Letter> letters) const {
  for (std::size_t i = 0; i < letters.size(); ++i) {
    if (letters[i] >= size_) throw InputError("shift: sub-alphabet letter out of range");
    if (i > 0 && letters[i] <= letters[i - 1]) {
      throw InputError("shift: sub-alphabet must be strictly ascending");
    }
  }
  std::vector<std::vector<int>> sub(letters.size(), std::vector<int>(letters.size(), 0));
  for (std::size_t i = 0; i < letters.size(); ++i) {
    for (std::size_t j = 0; j < letters.size(); ++j) {
      sub[i][j] = allowed(letters[i], letters[j]) ? 1 : 0;
    }
  }
  return Shift(sub);
}

bool is_admissible(const Shift& shift, std::span<const Letter> letters) {
  for (Letter l : letters) {
    if (l >= shift.size()) {
      throw InputError("letter " + std::to_string(l + 1) + " outside alphabet of size " +
                       std::to_string(shift.size()));
    }
  }
  for (std::size_t i = 1; i < letters.size(); ++i) {
    if (!shift.allowed(letters[i - 1], letters[i])) return false;
  }
  return true;
}

void require_admissible(const Shift& shift, std::span<const Letter> letters) {
  if (!is_admissible(shift, letters)) {
    throw InputError("word " + format_word(letters) + " is not admissible");
  }
}

std::uint64_t count_words(const Shift& shift, std::size_t n) {
  if (n == 0) throw InputError("count_words: length must be at least 1");
  std::vector<std::uint64_t> ending(shift.size(), 1), next(shift.size());
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  for (std::size_t step = 1; step < n; ++step) {
    for (Letter j = 0; j < shift.size(); ++j) {
      std::uint64_t total = 0;
      for (Letter i : shift.predecessors(j)) {
        if (ending[i] > kMax - total) {
          throw ResourceError("count_words: word count overflows 64 bits at length " +
                              std::to_string(step + 1));
        }
        total += ending[i];
      }
      next[j] = total;
    }
    ending.swap(next);
  }
  std::uint64_t total = 0;
  for (auto c : ending) {
    if (c > kMax - total) throw ResourceError("count_words: word count overflows 64 bits");
    total += c;
  }
  return total;
}

void for_each_word(const Shift& shift, std::size_t n,
                   const std::function<void(std::span<const Letter>)>& visit) {
  if (n == 0) return;
  Word word(n);
  // Iterative depth-first walk; cursor[d] indexes into the successor list
  // of word[d-1] (or the alphabet at depth 0).
  std::vector<std::size_t> cursor(n, 0);
  std::size_t depth = 0;
  while (true) {
    const std::size_t options = depth == 0 ? shift.size() : shift.successors(word[depth - 1]).size();
    if (cursor[depth] == options) {
      if (depth == 0) return;
      cursor[depth] = 0;
      --depth;
      ++cursor[depth];
      continue;
    }
    word[depth] = depth == 0 ? static_cast<Letter>(cursor[0])
                             : shift.successors(word[depth - 1])[cursor[depth]];
    if (depth + 1 == n) {
      visit(word);
      ++cursor[depth];
    } else {
      ++depth;
    }
  }
}

std::vector<Word> enumerate_words(const Shift& shift, std::size_t n) {
  std::vector<Word> out;
  for_each_word(shift, n, [&](std::span<const Letter> w) { out.emplace_back(w.begin(), w.end()); });
  return out;
}

namespace {

std::vector<bool> reachable(const Shift& shift, Letter start, bool forward) {
  std::vector<bool> seen(shift.size(), false);
  std::queue<Letter> queue;
  seen[start] = true;
  queue.push(start);
  while (!queue.empty()) {
    const Letter u = queue.front();
    queue.pop();
    for (Letter v : forward ? shift.successors(u) : shift.predecessors(u)) {
      if (!seen[v]) {
        seen[v] = true;
        queue.push(v);
      }
    }
  }
  return seen;
}

}  // namespace

MixingReport mixing_report(const Shift& shift) {
  MixingReport report;
  const auto fwd = reachable(shift, 0, true);
  const auto bwd = reachable(shift, 0, false);
  report.irreducible = true;
  for (std::size_t i = 0; i < shift.size(); ++i) {
    if (!fwd[i] || !bwd[i]) report.irreducible = false;
  }
  if (report.irreducible) {
    // Period of a strongly connected digraph: gcd over edges u->v of
    // level(u) + 1 - level(v), levels taken from a BFS tree.
    std::vector<long> level(shift.size(), -1);
    std::queue<Letter> queue;
    level[0] = 0;
    queue.push(0);
    long g = 0;
    while (!queue.empty()) {
      const Letter u = queue.front();
      queue.pop();
      for (Letter v : shift.successors(u)) {
        if (level[v] < 0) {
          level[v] = level[u] + 1;
          queue.push(v);
        } else {
          g = std::gcd(g, std::labs(level[u] + 1 - level[v]));
        }
      }
    }
    report.period = static_cast<std::size_t>(g);
  }
  report.topologically_mixing = report.irreducible && report.period == 1;
  report.bip_witness.resize(shift.size());
  std::iota(report.bip_witness.begin(), report.bip_witness.end(), Letter{0});
  return report;
}

bool is_mixing(const Shift& shift) { return mixing_report(shift).topologically_mixing; }

std::size_t common_prefix_length(std::span<const Letter> a, std::span<const Letter> b) {
  std::size_t l = 0;
  while (l < a.size() && l < b.size() && a[l] == b[l]) ++l;
  return l;
}

double prefix_distance(std::span<const Letter> a, std::span<const Letter> b, double beta) {
  return std::exp(-beta * static_cast<double>(common_prefix_length(a, b)));
}

std::string format_word(std::span<const Letter> word) {
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(word[i] + 1);
  }
  return out;
}

Word parse_word(const std::string& text, std::size_t alphabet_size) {
  Word out;
  std::size_t pos = 0;
  if (text.empty()) throw InputError("empty word string");
  while (pos <= text.size()) {
    const std::size_t dash = text.find('-', pos);
    const std::string token = text.substr(pos, dash == std::string::npos ? std::string::npos : dash - pos);
    if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos) {
      throw InputError("malformed word '" + text + "': expected dash-separated 1-based letters");
    }
    const unsigned long v = std::stoul(token);
    if (v < 1 || v > alphabet_size) {
      throw InputError("word '" + text + "': letter " + token + " outside [1, " +
                       std::to_string(alphabet_size) + "]");
    }
    out.push_back(static_cast<Letter>(v - 1));
    if (dash == std::string::npos) break;
    pos = dash + 1;
  }
  return out;
}

}  // namespace gxm
