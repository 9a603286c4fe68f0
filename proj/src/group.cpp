#include "gxm/group.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <functional>
#include <numeric>

#include "gxm/error.hpp"
#include "gxm/parallel.hpp"

namespace gxm {

Group Group::finite(const std::vector<std::vector<int>>& cayley, std::string name) {
  const std::size_t n = cayley.size();
  if (n == 0) throw InputError("finite group: empty Cayley table");
  for (const auto& row : cayley) {
    if (row.size() != n) throw InputError("finite group: Cayley table must be square");
    std::vector<bool> seen(n, false);
    for (int v : row) {
      if (v < 0 || static_cast<std::size_t>(v) >= n) throw InputError("finite group: table entry out of range");
      if (seen[v]) throw InputError("finite group: Cayley table is not a Latin square");
      seen[v] = true;
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<bool> seen(n, false);
    for (std::size_t r = 0; r < n; ++r) {
      if (seen[cayley[r][c]]) throw InputError("finite group: Cayley table is not a Latin square");
      seen[cayley[r][c]] = true;
    }
  }
  int id = -1;
  for (std::size_t e = 0; e < n && id < 0; ++e) {
    bool ok = true;
    for (std::size_t x = 0; x < n && ok; ++x) {
      ok = cayley[e][x] == static_cast<int>(x) && cayley[x][e] == static_cast<int>(x);
    }
    if (ok) id = static_cast<int>(e);
  }
  if (id < 0) throw InputError("finite group: no two-sided identity");
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t c = 0; c < n; ++c) {
        if (cayley[cayley[a][b]][c] != cayley[a][cayley[b][c]]) {
          throw InputError("finite group: operation is not associative");
        }
      }
    }
  }
  Group g;
  g.kind_ = GroupKind::Finite;
  g.name_ = std::move(name);
  g.table_ = cayley;
  g.identity_index_ = id;
  g.inverse_.assign(n, -1);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (cayley[a][b] == id) g.inverse_[a] = static_cast<int>(b);
    }
  }
  return g;
}

Group Group::cyclic(std::size_t order) {
  if (order == 0) throw InputError("cyclic group: order must be positive");
  std::vector<std::vector<int>> table(order, std::vector<int>(order));
  for (std::size_t a = 0; a < order; ++a) {
    for (std::size_t b = 0; b < order; ++b) table[a][b] = static_cast<int>((a + b) % order);
  }
  return finite(table, order == 1 ? "trivial" : "Z" + std::to_string(order));
}

Group Group::symmetric3() {
  std::vector<std::array<int, 3>> perms;
  std::array<int, 3> p{0, 1, 2};
  do {
    perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  auto index_of = [&](const std::array<int, 3>& q) {
    return static_cast<int>(std::find(perms.begin(), perms.end(), q) - perms.begin());
  };
  std::vector<std::vector<int>> table(6, std::vector<int>(6));
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      std::array<int, 3> c{};
      for (int x = 0; x < 3; ++x) c[x] = perms[a][perms[b][x]];
      table[a][b] = index_of(c);
    }
  }
  return finite(table, "S3");
}

Group Group::finite_by_name(const std::string& name) {
  if (name == "trivial") return trivial();
  if (name == "S3") return symmetric3();
  if (name.size() >= 2 && name[0] == 'Z' &&
      std::all_of(name.begin() + 1, name.end(), [](unsigned char c) { return std::isdigit(c); })) {
    const long n = std::strtol(name.c_str() + 1, nullptr, 10);
    if (n >= 1 && n <= 4096) return cyclic(static_cast<std::size_t>(n));
  }
  throw InputError("unknown finite group '" + name + "' (known: trivial, Z<n>, S3)");
}

Group Group::free_abelian(std::size_t rank) {
  if (rank == 0) throw InputError("free abelian group: rank must be positive");
  Group g;
  g.kind_ = GroupKind::FreeAbelian;
  g.rank_ = rank;
  g.name_ = rank == 1 ? "Z" : "Z^" + std::to_string(rank);
  return g;
}

Group Group::free(std::size_t rank) {
  if (rank == 0 || rank > 26) throw InputError("free group: rank must lie in [1, 26]");
  Group g;
  g.kind_ = GroupKind::Free;
  g.rank_ = rank;
  g.name_ = "F" + std::to_string(rank);
  return g;
}

Element Group::identity() const {
  switch (kind_) {
    case GroupKind::Finite:
      return {identity_index_};
    case GroupKind::FreeAbelian:
      return Element(rank_, 0);
    case GroupKind::Free:
      return {};
  }
  return {};
}

bool Group::is_identity(const Element& g) const { return g == identity(); }

void Group::validate(const Element& g) const {
  switch (kind_) {
    case GroupKind::Finite:
      if (g.size() != 1 || g[0] < 0 || static_cast<std::size_t>(g[0]) >= table_.size()) {
        throw InputError("element is not an index of " + name_);
      }
      return;
    case GroupKind::FreeAbelian:
      if (g.size() != rank_) throw InputError("element of " + name_ + " must have " + std::to_string(rank_) + " coordinates");
      return;
    case GroupKind::Free:
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] == 0 || static_cast<std::size_t>(std::abs(g[i])) > rank_) {
          throw InputError("free group element uses an unknown generator");
        }
        if (i > 0 && g[i] == -g[i - 1]) throw InputError("free group element is not reduced");
      }
      return;
  }
}

Element Group::mul(const Element& g, const Element& h) const {
  switch (kind_) {
    case GroupKind::Finite:
      return {table_[g.at(0)][h.at(0)]};
    case GroupKind::FreeAbelian: {
      if (g.size() != rank_ || h.size() != rank_) throw InputError("element of " + name_ + " has the wrong arity");
      Element out(rank_);
      for (std::size_t i = 0; i < rank_; ++i) out[i] = g[i] + h[i];
      return out;
    }
    case GroupKind::Free: {
      std::size_t cancel = 0;
      while (cancel < g.size() && cancel < h.size() && g[g.size() - 1 - cancel] == -h[cancel]) ++cancel;
      Element out;
      out.reserve(g.size() + h.size() - 2 * cancel);
      out.insert(out.end(), g.begin(), g.end() - static_cast<std::ptrdiff_t>(cancel));
      out.insert(out.end(), h.begin() + static_cast<std::ptrdiff_t>(cancel), h.end());
      return out;
    }
  }
  return {};
}

Element Group::inv(const Element& g) const {
  switch (kind_) {
    case GroupKind::Finite:
      return {inverse_[g.at(0)]};
    case GroupKind::FreeAbelian: {
      Element out(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) out[i] = -g[i];
      return out;
    }
    case GroupKind::Free: {
      Element out(g.rbegin(), g.rend());
      for (auto& x : out) x = -x;
      return out;
    }
  }
  return {};
}

std::size_t Group::word_length(const Element& g) const {
  switch (kind_) {
    case GroupKind::Finite:
      return 0;
    case GroupKind::FreeAbelian: {
      std::size_t s = 0;
      for (auto x : g) s += static_cast<std::size_t>(std::abs(x));
      return s;
    }
    case GroupKind::Free:
      return g.size();
  }
  return 0;
}

Element Group::generator(std::size_t i, bool inverse) const {
  if (kind_ == GroupKind::Finite) throw InputError("finite groups have no standard generators");
  if (i >= rank_) throw InputError("generator index out of range for " + name_);
  if (kind_ == GroupKind::FreeAbelian) {
    Element out(rank_, 0);
    out[i] = inverse ? -1 : 1;
    return out;
  }
  const auto label = static_cast<std::int32_t>(i + 1);
  return {inverse ? -label : label};
}

std::vector<Element> Group::ball(std::size_t r, std::size_t cap) const {
  std::vector<Element> out;
  auto push = [&](Element e) {
    if (out.size() >= cap) throw ResourceError("ball of radius " + std::to_string(r) + " exceeds the size cap");
    out.push_back(std::move(e));
  };
  switch (kind_) {
    case GroupKind::Finite:
      for (std::size_t i = 0; i < table_.size(); ++i) push({static_cast<std::int32_t>(i)});
      return out;
    case GroupKind::FreeAbelian: {
      // Lexicographic over coordinates in [-r, r] with an l1 budget.
      Element cur(rank_, 0);
      const auto radius = static_cast<long>(r);
      std::function<void(std::size_t, long)> rec = [&](std::size_t d, long budget) {
        if (d == rank_) {
          push(cur);
          return;
        }
        for (long x = -budget; x <= budget; ++x) {
          cur[d] = static_cast<std::int32_t>(x);
          rec(d + 1, budget - std::abs(x));
        }
        cur[d] = 0;
      };
      rec(0, radius);
      return out;
    }
    case GroupKind::Free: {
      push({});
      std::size_t begin = 0;
      for (std::size_t len = 1; len <= r; ++len) {
        const std::size_t end = out.size();
        for (std::size_t i = begin; i < end; ++i) {
          for (std::size_t gen = 0; gen < rank_; ++gen) {
            for (int sign : {1, -1}) {
              const std::int32_t x = sign * static_cast<std::int32_t>(gen + 1);
              if (!out[i].empty() && out[i].back() == -x) continue;
              Element e = out[i];
              e.push_back(x);
              push(std::move(e));
            }
          }
        }
        begin = end;
      }
      return out;
    }
  }
  return out;
}

std::string Group::format(const Element& g) const {
  switch (kind_) {
    case GroupKind::Finite:
      return std::to_string(g.at(0));
    case GroupKind::FreeAbelian: {
      std::string s = "(";
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(g[i]);
      }
      return s + ")";
    }
    case GroupKind::Free: {
      if (g.empty()) return "e";
      std::string s;
      for (auto x : g) s += x > 0 ? static_cast<char>('a' + x - 1) : static_cast<char>('A' - x - 1);
      return s;
    }
  }
  return {};
}

Element Group::parse(const std::string& text) const {
  switch (kind_) {
    case GroupKind::Finite: {
      char* end = nullptr;
      const long v = std::strtol(text.c_str(), &end, 10);
      if (text.empty() || *end != '\0') throw InputError("cannot parse '" + text + "' as an element index of " + name_);
      Element e{static_cast<std::int32_t>(v)};
      validate(e);
      return e;
    }
    case GroupKind::FreeAbelian: {
      std::string body = text;
      if (!body.empty() && body.front() == '(' && body.back() == ')') body = body.substr(1, body.size() - 2);
      Element e;
      std::size_t pos = 0;
      while (pos <= body.size()) {
        const std::size_t comma = body.find(',', pos);
        const std::string tok = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        char* end = nullptr;
        const long v = std::strtol(tok.c_str(), &end, 10);
        if (tok.empty() || *end != '\0') throw InputError("cannot parse '" + text + "' as an element of " + name_);
        e.push_back(static_cast<std::int32_t>(v));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      validate(e);
      return e;
    }
    case GroupKind::Free: {
      Element e;
      if (text == "e" || text.empty()) return e;
      for (char c : text) {
        std::int32_t x = 0;
        if (c >= 'a' && c < static_cast<char>('a' + rank_)) {
          x = c - 'a' + 1;
        } else if (c >= 'A' && c < static_cast<char>('A' + rank_)) {
          x = -(c - 'A' + 1);
        } else {
          throw InputError("cannot parse '" + text + "' as an element of " + name_);
        }
        e = mul(e, Element{x});
      }
      return e;
    }
  }
  return {};
}

GroupMeasure GroupMeasure::delta(const Element& g, double mass) {
  GroupMeasure m;
  m.masses.emplace(g, mass);
  return m;
}

double GroupMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& [g, v] : masses) s += v;
  return s;
}

double GroupMeasure::at(const Element& g) const {
  const auto it = masses.find(g);
  return it == masses.end() ? 0.0 : it->second;
}

void GroupMeasure::add(const Element& g, double mass) {
  if (mass < 0.0) throw InputError("group measure: negative mass");
  masses[g] += mass;
}

GroupMeasure convolve(const Group& group, const GroupMeasure& mu, const GroupMeasure& nu, double prune_eps,
                      std::size_t support_cap) {
  if (prune_eps < 0.0) throw InputError("convolve: prune_eps must be nonnegative");
  // Fixed-size blocks of mu's support, merged in block order, so the result
  // does not depend on the thread budget.
  constexpr std::size_t kBlock = 64;
  std::vector<const std::pair<const Element, double>*> left;
  left.reserve(mu.masses.size());
  for (const auto& entry : mu.masses) left.push_back(&entry);
  const std::size_t blocks = (left.size() + kBlock - 1) / kBlock;
  std::vector<std::map<Element, double>> partial(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    auto& out = partial[b];
    const std::size_t end = std::min(left.size(), (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      for (const auto& [h, w] : nu.masses) out[group.mul(left[i]->first, h)] += left[i]->second * w;
    }
  });
  GroupMeasure result;
  for (auto& part : partial) {
    for (auto& [g, v] : part) {
      result.masses[g] += v;
      if (result.masses.size() > support_cap) throw ResourceError("convolve: support exceeds the size cap");
    }
  }
  const double mu_total = mu.total_mass();
  const double nu_total = nu.total_mass();
  result.pruned_mass = mu.pruned_mass * nu_total + mu_total * nu.pruned_mass + mu.pruned_mass * nu.pruned_mass;
  if (prune_eps > 0.0) {
    for (auto it = result.masses.begin(); it != result.masses.end();) {
      if (it->second < prune_eps) {
        result.pruned_mass += it->second;
        it = result.masses.erase(it);
      } else {
        ++it;
      }
    }
  }
  return result;
}

GroupMeasure reflect(const Group& group, const GroupMeasure& mu) {
  GroupMeasure out;
  out.pruned_mass = mu.pruned_mass;
  for (const auto& [g, v] : mu.masses) out.masses.emplace(group.inv(g), v);
  return out;
}

}  // namespace gxm
