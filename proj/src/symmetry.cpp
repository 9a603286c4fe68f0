#include "gxm/symmetry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "gxm/error.hpp"
#include "gxm/linalg.hpp"

namespace gxm {

WindowSchedule WindowSchedule::parse(const std::string& text) {
  if (text == "zero") return zero();
  if (text == "sqrt") return sqrt();
  if (!text.empty() && std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return constant(std::stoul(text));
  }
  throw InputError("unknown window schedule '" + text + "' (valid: zero, sqrt, or an integer)");
}

std::size_t WindowSchedule::at(std::size_t n) const {
  switch (kind) {
    case Kind::Zero:
      return 0;
    case Kind::Sqrt:
      return static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    case Kind::Fixed:
      return fixed;
  }
  return 0;
}

std::string WindowSchedule::describe() const {
  switch (kind) {
    case Kind::Zero:
      return "zero";
    case Kind::Sqrt:
      return "sqrt";
    case Kind::Fixed:
      return std::to_string(fixed);
  }
  return "zero";
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

}  // namespace

AlphaCertificate alpha_estimate(const GroupExtension& ext, const Potential& pot, std::size_t n_lo, std::size_t n_hi,
                                WindowSchedule window, double prune_eps) {
  if (n_lo == 0 || n_lo > n_hi) throw InputError("alpha_estimate: need 1 <= n_lo <= n_hi");
  std::size_t longest = 0;
  for (std::size_t n = n_lo; n <= n_hi; ++n) {
    if (window.at(n) >= n) {
      throw InputError("alpha_estimate: window N_n = " + std::to_string(window.at(n)) + " is not below n = " +
                       std::to_string(n));
    }
    longest = std::max(longest, n + window.at(n));
  }
  PartitionOptions opts;
  opts.bound = Bound::Sup;
  opts.prune_eps = prune_eps;
  const auto tables = partition_tables(ext, pot, longest, opts);
  const Group& group = ext.group();

  AlphaCertificate cert;
  cert.n_lo = n_lo;
  cert.n_hi = n_hi;
  cert.window = window;
  for (std::size_t n = n_lo; n <= n_hi; ++n) {
    AlphaRow row;
    row.n = n;
    row.window = window.at(n);
    row.log_c = kNegInf;
    row.log_ratio_at_identity = kNegInf;
    for (const auto& [g, lhs] : tables[n - 1]) {
      const Element ginv = group.inv(g);
      double rhs = kNegInf;
      for (std::size_t len = n - row.window; len <= n + row.window; ++len) {
        const auto it = tables[len - 1].find(ginv);
        if (it != tables[len - 1].end()) rhs = log_add(rhs, it->second);
      }
      if (rhs == kNegInf) {
        if (!cert.obstructed) {
          cert.obstructed = true;
          cert.obstruction = "n=" + std::to_string(n) + " g=" + group.format(g) + ": no word maps to g^-1 in the window";
        }
        continue;
      }
      const double ratio = lhs - rhs;
      if (ratio > row.log_c) {
        row.log_c = ratio;
        row.argmax = g;
      }
      if (group.is_identity(g)) row.log_ratio_at_identity = ratio;
    }
    cert.rows.push_back(std::move(row));
  }

  // Fit log(c_n) / (2n) ~ A + B / n over the last third of the range.
  std::vector<double> design, y;
  const std::size_t count = cert.rows.size();
  const std::size_t first = count - std::max<std::size_t>(1, (count + 2) / 3);
  for (std::size_t i = first; i < count; ++i) {
    const auto& r = cert.rows[i];
    if (!std::isfinite(r.log_c)) continue;
    const double dn = static_cast<double>(r.n);
    design.push_back(1.0);
    design.push_back(1.0 / dn);
    y.push_back(r.log_c / (2.0 * dn));
  }
  double a = 0.0;
  if (y.size() >= 2) {
    a = least_squares(design, 2, y).coefficients[0];
  } else if (y.size() == 1) {
    a = y[0];
  }
  cert.alpha_raw = std::exp(a);
  cert.alpha_hat = std::max(1.0, cert.alpha_raw);
  return cert;
}

const char* to_string(CorollaryRow::Status s) {
  switch (s) {
    case CorollaryRow::Status::Pass:
      return "PASS";
    case CorollaryRow::Status::Fail:
      return "FAIL";
    case CorollaryRow::Status::Inconclusive:
      return "INCONCLUSIVE";
    case CorollaryRow::Status::NotApplicable:
      return "NOT_APPLICABLE";
  }
  return "FAIL";
}

std::vector<CorollaryRow> corollary_check(const Group& group, const CorollaryInputs& in) {
  auto make = [&](std::string name, double lhs, double rhs, double slack) {
    CorollaryRow row;
    row.name = std::move(name);
    row.lhs = lhs;
    row.rhs = rhs;
    row.margin = lhs - rhs;
    row.slack = slack + in.tolerance;
    if (row.margin >= -row.slack) {
      row.status = CorollaryRow::Status::Pass;
    } else if (row.margin >= -3.0 * row.slack) {
      row.status = CorollaryRow::Status::Inconclusive;
    } else {
      row.status = CorollaryRow::Status::Fail;
    }
    return row;
  };
  std::vector<CorollaryRow> rows;
  CorollaryRow r1 = make("ext_ge_base_minus_log_alpha", in.extension, in.base - in.log_alpha,
                         in.extension_error + in.base_error + in.log_alpha_error);
  if (!group.is_amenable()) r1.status = CorollaryRow::Status::NotApplicable;
  rows.push_back(r1);
  rows.push_back(make("ext_ge_rho_minus_log_alpha", in.extension, in.log_rho - in.log_alpha,
                      in.extension_error + in.log_rho_error + in.log_alpha_error));
  rows.push_back(make("ext_le_rho", in.log_rho, in.extension, in.extension_error + in.log_rho_error));
  rows.push_back(make("rho_le_base", in.base, in.log_rho, in.base_error + in.log_rho_error));
  return rows;
}

namespace {

/// Looks for a word over the (restricted) shift of length <= depth with
/// image `goal`.
bool image_reachable(const GroupExtension& ext, const Element& goal, std::size_t depth) {
  std::set<std::pair<Letter, Element>> seen;
  std::vector<std::pair<Letter, Element>> frontier;
  for (Letter c = 0; c < ext.shift().size(); ++c) {
    if (ext.psi(c) == goal) return true;
    if (seen.insert({c, ext.psi(c)}).second) frontier.emplace_back(c, ext.psi(c));
  }
  for (std::size_t len = 2; len <= depth && !frontier.empty(); ++len) {
    std::vector<std::pair<Letter, Element>> next;
    for (const auto& [last, g] : frontier) {
      for (Letter c : ext.shift().successors(last)) {
        Element h = ext.group().mul(g, ext.psi(c));
        if (h == goal) return true;
        if (seen.insert({c, h}).second) next.emplace_back(c, std::move(h));
      }
    }
    frontier.swap(next);
    if (seen.size() > (std::size_t{1} << 20)) break;
  }
  return false;
}

}  // namespace

std::vector<CompactAlphaEntry> compact_alpha(const GroupExtension& ext, const Potential& pot,
                                             const std::vector<std::vector<Letter>>& sub_alphabets, std::size_t n_lo,
                                             std::size_t n_hi, WindowSchedule window, std::size_t search_depth) {
  std::vector<CompactAlphaEntry> out;
  for (const auto& letters : sub_alphabets) {
    CompactAlphaEntry entry;
    entry.letters = letters;
    try {
      const GroupExtension sub = ext.restrict_to(letters);
      if (!is_mixing(sub.shift())) throw PreconditionError("restriction is not topologically mixing");
      entry.subgroup_ok = true;
      for (Letter c = 0; c < sub.shift().size(); ++c) {
        if (!image_reachable(sub, sub.group().inv(sub.psi(c)), search_depth)) {
          entry.subgroup_ok = false;
          entry.subgroup_note = "no word of length <= " + std::to_string(search_depth) + " maps to the inverse of psi(" +
                                std::to_string(letters[c] + 1) + ")";
          break;
        }
      }
      const Potential sub_pot = restrict_potential(pot, sub.shift(), letters);
      entry.certificate = alpha_estimate(sub, sub_pot, n_lo, n_hi, window);
    } catch (const std::exception& e) {
      entry.diagnostic = e.what();
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace gxm
