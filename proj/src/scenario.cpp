#include "gxm/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "gxm/error.hpp"
#include "gxm/gibbs.hpp"
#include "gxm/parallel.hpp"
#include "gxm/pressure.hpp"
#include "gxm/spectral.hpp"
#include "gxm/symmetry.hpp"

namespace gxm {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InputError(where + ": " + what);
}

std::string join(const std::vector<std::string>& items, const char* sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, "missing required key \"" + key + "\"");
  return *it;
}

void check_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      fail(where, "unknown key \"" + it.key() + "\" (allowed: " + join(allowed) + ")");
    }
  }
}

std::size_t as_size(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(where, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

double as_double(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) fail(where, "expected a finite number");
  return x;
}

// ---------------------------------------------------------------- parsing

Shift parse_shift(const json& spec) {
  const std::string where = "shift";
  if (!spec.is_object()) fail(where, "expected an object");
  if (spec.contains("full_shift")) {
    check_keys(spec, {"full_shift"}, where);
    std::size_t m = as_size(spec["full_shift"], where + ".full_shift");
    if (m == 0) fail(where + ".full_shift", "alphabet must be nonempty");
    return Shift::full(m);
  }
  check_keys(spec, {"alphabet", "incidence"}, where);
  std::size_t m = as_size(require(spec, "alphabet", where), where + ".alphabet");
  const json& rows = require(spec, "incidence", where);
  if (!rows.is_array() || rows.size() != m) fail(where + ".incidence", "expected " + std::to_string(m) + " rows");
  std::vector<std::vector<int>> a;
  for (std::size_t i = 0; i < m; ++i) {
    const std::string rw = where + ".incidence[" + std::to_string(i) + "]";
    if (!rows[i].is_array() || rows[i].size() != m) fail(rw, "expected " + std::to_string(m) + " entries");
    std::vector<int> row;
    for (const auto& e : rows[i]) {
      if (!e.is_number_integer()) fail(rw, "entries must be 0 or 1");
      row.push_back(e.get<int>());
    }
    a.push_back(std::move(row));
  }
  try {
    return Shift(a);
  } catch (const InputError& e) {
    fail(where, e.what());
  }
}

Potential parse_potential(const json& spec, const Shift& shift) {
  const std::string where = "potential";
  if (!spec.is_object()) fail(where, "expected an object");
  if (spec.contains("lambda_example")) {
    check_keys(spec, {"lambda_example"}, where);
    double lam = as_double(spec["lambda_example"], where + ".lambda_example");
    if (shift.size() != 2) fail(where + ".lambda_example", "needs a two-letter shift");
    std::vector<double> v{lam, -lam};
    return Potential::from_letters(shift, v);
  }
  if (spec.contains("constant")) {
    check_keys(spec, {"constant"}, where);
    return Potential::constant(shift, as_double(spec["constant"], where + ".constant"));
  }
  if (spec.contains("letters")) {
    check_keys(spec, {"letters"}, where);
    const json& v = spec["letters"];
    if (!v.is_array() || v.size() != shift.size()) {
      fail(where + ".letters", "expected " + std::to_string(shift.size()) + " values");
    }
    std::vector<double> vals;
    for (const auto& x : v) vals.push_back(as_double(x, where + ".letters"));
    return Potential::from_letters(shift, vals);
  }
  check_keys(spec, {"memory", "values", "default"}, where);
  std::size_t k = as_size(require(spec, "memory", where), where + ".memory");
  if (k == 0) fail(where + ".memory", "must be at least 1");
  const json& values = require(spec, "values", where);
  if (!values.is_object()) fail(where + ".values", "expected an object keyed by words like \"1-2\"");
  std::map<Word, double> table;
  for (auto it = values.begin(); it != values.end(); ++it) {
    const std::string kw = where + ".values[\"" + it.key() + "\"]";
    Word w;
    try {
      w = parse_word(it.key(), shift.size());
    } catch (const InputError& e) {
      fail(kw, e.what());
    }
    if (w.size() != k) fail(kw, "word length must equal the memory " + std::to_string(k));
    if (!is_admissible(shift, w)) fail(kw, "word is not admissible");
    table[w] = as_double(it.value(), kw);
  }
  if (spec.contains("default")) {
    double d = as_double(spec["default"], where + ".default");
    for (const Word& w : enumerate_words(shift, k)) table.emplace(w, d);
  }
  try {
    return Potential::from_table(shift, k, table);
  } catch (const InputError& e) {
    fail(where + ".values", e.what());
  }
}

Group parse_group(const json& spec) {
  const std::string where = "group";
  if (!spec.is_object()) fail(where, "expected an object");
  const json& type = require(spec, "type", where);
  if (!type.is_string()) fail(where + ".type", "expected a string");
  const std::string t = type.get<std::string>();
  try {
    if (t == "free") {
      check_keys(spec, {"type", "rank"}, where);
      return Group::free(as_size(require(spec, "rank", where), where + ".rank"));
    }
    if (t == "free_abelian") {
      check_keys(spec, {"type", "rank"}, where);
      return Group::free_abelian(as_size(require(spec, "rank", where), where + ".rank"));
    }
    if (t == "trivial") {
      check_keys(spec, {"type"}, where);
      return Group::trivial();
    }
    if (t == "cyclic") {
      check_keys(spec, {"type", "order"}, where);
      return Group::cyclic(as_size(require(spec, "order", where), where + ".order"));
    }
    if (t == "finite") {
      check_keys(spec, {"type", "name", "cayley"}, where);
      if (spec.contains("cayley")) {
        const json& rows = spec["cayley"];
        if (!rows.is_array()) fail(where + ".cayley", "expected an array of rows");
        std::vector<std::vector<int>> table;
        for (const auto& r : rows) {
          if (!r.is_array()) fail(where + ".cayley", "expected an array of rows");
          std::vector<int> row;
          for (const auto& e : r) {
            if (!e.is_number_integer()) fail(where + ".cayley", "entries must be integers");
            row.push_back(e.get<int>());
          }
          table.push_back(std::move(row));
        }
        std::string name = spec.value("name", std::string("finite"));
        return Group::finite(table, name);
      }
      const json& name = require(spec, "name", where);
      if (!name.is_string()) fail(where + ".name", "expected a string");
      return Group::finite_by_name(name.get<std::string>());
    }
  } catch (const InputError& e) {
    fail(where, e.what());
  }
  fail(where + ".type", "unknown group type \"" + t + "\" (valid: free, free_abelian, finite, cyclic, trivial)");
}

Element parse_element(const json& v, const Group& group, const std::string& where) {
  try {
    if (v.is_string()) return group.parse(v.get<std::string>());
    if (v.is_number_integer()) {
      if (group.kind() == GroupKind::Free) fail(where, "free group elements are strings like \"aB\"");
      if (group.kind() == GroupKind::FreeAbelian && group.rank() != 1) {
        fail(where, "expected an array of " + std::to_string(group.rank()) + " integers");
      }
      Element g{static_cast<std::int32_t>(v.get<long long>())};
      group.validate(g);
      return g;
    }
    if (v.is_array()) {
      Element g;
      for (const auto& e : v) {
        if (!e.is_number_integer()) fail(where, "entries must be integers");
        g.push_back(static_cast<std::int32_t>(e.get<long long>()));
      }
      group.validate(g);
      return g;
    }
  } catch (const InputError& e) {
    fail(where, e.what());
  }
  fail(where, "expected a group element");
}

std::vector<Element> parse_psi(const json& spec, const Shift& shift, const Group& group) {
  const std::string where = "psi";
  if (!spec.is_object()) fail(where, "expected an object keyed by letters \"1\"..\"" + std::to_string(shift.size()) + "\"");
  std::vector<std::optional<Element>> psi(shift.size());
  for (auto it = spec.begin(); it != spec.end(); ++it) {
    char* end = nullptr;
    long letter = std::strtol(it.key().c_str(), &end, 10);
    if (it.key().empty() || *end != '\0' || letter < 1 || static_cast<std::size_t>(letter) > shift.size()) {
      fail(where, "key \"" + it.key() + "\" is not a letter in 1.." + std::to_string(shift.size()));
    }
    psi[letter - 1] = parse_element(it.value(), group, where + "[\"" + it.key() + "\"]");
  }
  std::vector<Element> out;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (!psi[i]) fail(where, "missing letter " + std::to_string(i + 1));
    out.push_back(*psi[i]);
  }
  return out;
}

void line_column(const std::string& text, std::size_t byte, std::size_t& line, std::size_t& col) {
  line = 1;
  col = 1;
  std::size_t stop = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < stop; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
}

// ---------------------------------------------------------------- params

class Params {
 public:
  Params(const json& j, std::string where) : j_(j), where_(std::move(where)) {}

  std::size_t size(const char* key, std::size_t def) const {
    return j_.contains(key) ? as_size(j_[key], at(key)) : def;
  }
  double number(const char* key, double def) const { return j_.contains(key) ? as_double(j_[key], at(key)) : def; }
  bool flag(const char* key, bool def) const {
    if (!j_.contains(key)) return def;
    if (!j_[key].is_boolean()) fail(at(key), "expected true or false");
    return j_[key].get<bool>();
  }
  std::string text(const char* key, const std::string& def) const {
    if (!j_.contains(key)) return def;
    if (!j_[key].is_string()) fail(at(key), "expected a string");
    return j_[key].get<std::string>();
  }
  std::vector<std::size_t> sizes(const char* key, std::vector<std::size_t> def) const {
    if (!j_.contains(key)) return def;
    const json& v = j_[key];
    if (!v.is_array() || v.empty()) fail(at(key), "expected a nonempty array of integers");
    std::vector<std::size_t> out;
    for (const auto& e : v) out.push_back(as_size(e, at(key)));
    return out;
  }
  std::vector<WindowSchedule> windows(const char* key) const {
    std::vector<WindowSchedule> out;
    if (!j_.contains(key)) return {WindowSchedule::zero(), WindowSchedule::sqrt()};
    const json& v = j_[key];
    if (!v.is_array() || v.empty()) fail(at(key), "expected a nonempty array like [\"zero\", \"sqrt\", 2]");
    for (const auto& e : v) {
      try {
        out.push_back(WindowSchedule::parse(e.is_string() ? e.get<std::string>() : e.dump()));
      } catch (const InputError& err) {
        fail(at(key), err.what());
      }
    }
    return out;
  }
  std::string at(const char* key) const { return where_ + "." + key; }

 private:
  const json& j_;
  std::string where_;
};

const std::map<std::string, std::vector<std::string>>& verb_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"pressure-base", {"n_check"}},
      {"pressure-ext", {"n_max", "prune_eps", "base_letter", "probe_depth", "override_probe", "allow_radial"}},
      {"spectral-radius", {"schedule", "method", "k_max", "prune_eps", "fourier_points"}},
      {"dichotomy",
       {"n_max", "prune_eps", "base_letter", "probe_depth", "override_probe", "include_extension", "schedule",
        "method", "k_max", "tolerance"}},
      {"symmetry",
       {"n_lo", "n_hi", "windows", "prune_eps", "corollary", "n_max", "base_letter", "override_probe", "schedule",
        "method", "k_max", "slack", "alpha_error"}},
      {"gibbs-audit", {"n_max", "c_max"}},
      {"lemma33-audit", {"n_max", "method", "k_max", "tolerance"}},
  };
  return keys;
}

Letter base_letter(const Params& p, const Scenario& s) {
  std::size_t a = p.size("base_letter", 1);
  if (a < 1 || a > s.shift->size()) fail(p.at("base_letter"), "must be a letter in 1.." + std::to_string(s.shift->size()));
  return static_cast<Letter>(a - 1);
}

ExtensionPressureOptions ext_options(const Params& p, std::size_t default_n) {
  ExtensionPressureOptions o;
  o.n_max = p.size("n_max", default_n);
  if (o.n_max < 2) fail(p.at("n_max"), "must be at least 2");
  o.prune_eps = p.number("prune_eps", 0.0);
  if (o.prune_eps < 0.0 || o.prune_eps >= 1.0) fail(p.at("prune_eps"), "must lie in [0, 1)");
  o.probe_depth = p.size("probe_depth", 8);
  o.override_probe = p.flag("override_probe", false);
  o.allow_radial = p.flag("allow_radial", true);
  return o;
}

NormMethod norm_method(const Params& p) {
  try {
    return parse_norm_method(p.text("method", "auto"));
  } catch (const InputError& e) {
    fail(p.at("method"), e.what());
  }
}

std::vector<std::size_t> schedule(const Params& p) {
  auto s = p.sizes("schedule", {1, 2, 3, 4, 5, 6});
  for (std::size_t n : s) {
    if (n == 0) fail(p.at("schedule"), "entries must be positive");
  }
  return s;
}

NormOptions norm_options(const Params& p, const RunOptions& run) {
  NormOptions o;
  o.k_max = p.size("k_max", 2000);
  if (o.k_max == 0) fail(p.at("k_max"), "must be positive");
  o.prune_eps = p.number("prune_eps", o.prune_eps);
  o.fourier_points = p.size("fourier_points", o.fourier_points);
  o.strict = run.strict;
  return o;
}

double task_tolerance(const Params& p, const RunOptions& run, double def) {
  double t = run.tolerance ? *run.tolerance : p.number("tolerance", def);
  if (t < 0.0) fail(p.at("tolerance"), "must be nonnegative");
  return t;
}

// ---------------------------------------------------------------- results

json sequence_json(const std::vector<std::pair<double, double>>& seq, const char* value_key) {
  json rows = json::array();
  for (const auto& [n, v] : seq) rows.push_back({{"n", static_cast<std::size_t>(n)}, {value_key, number12(v)}});
  return rows;
}

json estimate_json(const PressureEstimate& e) {
  return {{"value", number12(e.value)},
          {"method", to_string(e.method)},
          {"route", e.route},
          {"error_bar", number12(e.error_bar)},
          {"raw_rate", number12(e.raw_rate)},
          {"fit_residual", number12(e.fit_residual)},
          {"pruned_fraction", number12(e.pruned_fraction)}};
}

json probe_json(const ProbeResult& p) {
  return {{"status", p.status == ProbeResult::Status::Proven ? "proven" : "unknown"},
          {"depth_cap", p.depth_cap},
          {"radius", p.radius},
          {"required", p.required},
          {"covered", p.covered},
          {"first_missing", p.first_missing}};
}

void check_pruning(double fraction, const RunOptions& run, json& warnings) {
  if (fraction > 0.1) {
    std::string msg = "pruned fraction " + std::to_string(fraction) + " exceeds 10%";
    if (run.strict) throw ResourceError(msg + " (--strict)");
    warnings.push_back(msg);
  }
}

json run_pressure_base(const Scenario& s, const Params& p) {
  std::size_t n_check = p.size("n_check", 20);
  PressureEstimate e = pressure_base(*s.shift, *s.potential, n_check);
  json r = estimate_json(e);
  r["sequence"] = sequence_json(e.sequence, "log_z");
  return r;
}

json run_pressure_ext(const Scenario& s, const Params& p, const RunOptions& run) {
  Letter a = base_letter(p, s);
  ExtensionPressureOptions o = ext_options(p, 200);
  json r;
  if (!o.override_probe) r["probe"] = probe_json(irreducibility_probe(*s.extension, o.probe_depth));
  PressureEstimate e = pressure_extension(*s.extension, *s.potential, a, o);
  json est = estimate_json(e);
  est.update(r);
  est["warnings"] = json::array();
  check_pruning(e.pruned_fraction, run, est["warnings"]);
  est["sequence"] = sequence_json(e.sequence, "log_z");
  return est;
}

json radius_json(const SpectralRadiusEstimate& e) {
  json rows = json::array();
  json warnings = json::array();
  for (std::size_t i = 0; i < e.norms.size(); ++i) {
    const OperatorNormEstimate& n = e.norms[i];
    rows.push_back({{"n", n.n},
                    {"method", to_string(n.method)},
                    {"route", n.route},
                    {"norm", number12(n.norm)},
                    {"error_bar", number12(n.error_bar)},
                    {"k_used", n.k_used},
                    {"pruned_mass", number12(n.pruned_mass)},
                    {"log_norm_over_n", number12(e.per_n.at(i).second)}});
    for (const auto& w : n.warnings) warnings.push_back("n=" + std::to_string(n.n) + ": " + w);
  }
  return {{"log_rho", number12(e.log_rho)},
          {"normalization_offset", number12(e.normalization_offset)},
          {"error_bar", number12(e.error_bar)},
          {"fit_residual", number12(e.fit_residual)},
          {"warnings", warnings},
          {"per_n", rows}};
}

json run_spectral(const Scenario& s, const Params& p, const RunOptions& run) {
  auto e = spectral_radius(*s.extension, *s.potential, schedule(p), norm_method(p), norm_options(p, run));
  return radius_json(e);
}

json run_dichotomy(const Scenario& s, const Params& p, const RunOptions& run, bool& audit_ok, std::ostream& log) {
  double tol = task_tolerance(p, run, 1e-6);
  PressureEstimate base = pressure_base(*s.shift, *s.potential, 0);
  auto rho = spectral_radius(*s.extension, *s.potential, schedule(p), norm_method(p), norm_options(p, run));
  double gap = base.value - rho.log_rho;
  double gap_error = base.error_bar + rho.error_bar;
  std::string verdict = "INCONCLUSIVE";
  if (std::fabs(gap) <= tol) {
    verdict = "AMENABLE-CONSISTENT";
  } else if (gap - gap_error > tol) {
    verdict = "NONAMENABLE-CONSISTENT";
  }
  bool amenable = s.group->is_amenable();
  bool contradicts = (verdict == "AMENABLE-CONSISTENT" && !amenable) ||
                     (verdict == "NONAMENABLE-CONSISTENT" && amenable);
  if (contradicts) audit_ok = false;
  json r = {{"p_base", number12(base.value)},
            {"log_rho", number12(rho.log_rho)},
            {"gap", number12(gap)},
            {"gap_error", number12(gap_error)},
            {"tolerance", number12(tol)},
            {"verdict", verdict},
            {"group_amenable", amenable},
            {"consistent_with_group", !contradicts}};
  if (p.flag("include_extension", true)) {
    Letter a = base_letter(p, s);
    ExtensionPressureOptions o = ext_options(p, 400);
    try {
      PressureEstimate ext = pressure_extension(*s.extension, *s.potential, a, o);
      r["p_ext"] = number12(ext.value);
      r["p_ext_error"] = number12(ext.error_bar);
      r["gap_ext_to_rho"] = number12(ext.value - rho.log_rho);
    } catch (const PreconditionError& e) {
      r["p_ext"] = nullptr;
      r["p_ext_note"] = e.what();
    }
  }
  r["spectral"] = radius_json(rho);
  char line[256];
  std::snprintf(line, sizeof line, "  gap P - log rho = %.12g (+/- %.3g), verdict %s\n", gap, gap_error,
                verdict.c_str());
  log << line;
  return r;
}

json certificate_json(const Group& group, const AlphaCertificate& c) {
  json rows = json::array();
  for (const AlphaRow& row : c.rows) {
    rows.push_back({{"n", row.n},
                    {"window", row.window},
                    {"log_c", number12(row.log_c)},
                    {"c", number12(std::exp(row.log_c))},
                    {"argmax", group.format(row.argmax)},
                    {"log_ratio_at_identity", number12(row.log_ratio_at_identity)}});
  }
  return {{"window", c.window.describe()},
          {"n_lo", c.n_lo},
          {"n_hi", c.n_hi},
          {"alpha_hat", number12(c.alpha_hat)},
          {"alpha_raw", number12(c.alpha_raw)},
          {"obstructed", c.obstructed},
          {"obstruction", c.obstruction},
          {"rows", rows}};
}

json run_symmetry(const Scenario& s, const Params& p, const RunOptions& run, bool& audit_ok) {
  std::size_t n_lo = p.size("n_lo", 2);
  std::size_t n_hi = p.size("n_hi", 10);
  double prune = p.number("prune_eps", 0.0);
  json certs = json::array();
  std::optional<AlphaCertificate> first;
  for (const WindowSchedule& w : p.windows("windows")) {
    AlphaCertificate c = alpha_estimate(*s.extension, *s.potential, n_lo, n_hi, w, prune);
    certs.push_back(certificate_json(*s.group, c));
    if (!first) first = c;
  }
  json r = {{"certificates", certs}};
  if (!p.flag("corollary", true)) return r;

  Letter a = base_letter(p, s);
  ExtensionPressureOptions o = ext_options(p, 400);
  PressureEstimate base = pressure_base(*s.shift, *s.potential, 0);
  PressureEstimate ext = pressure_extension(*s.extension, *s.potential, a, o);
  auto rho = spectral_radius(*s.extension, *s.potential, schedule(p), norm_method(p), norm_options(p, run));
  CorollaryInputs in;
  in.base = base.value;
  in.base_error = base.error_bar;
  in.extension = ext.value;
  in.extension_error = ext.error_bar;
  in.log_rho = rho.log_rho;
  in.log_rho_error = rho.error_bar;
  in.log_alpha = first->obstructed ? INFINITY : std::log(first->alpha_hat);
  in.log_alpha_error = p.number("alpha_error", 0.0);
  in.tolerance = run.tolerance ? *run.tolerance : p.number("slack", 0.01);
  json rows = json::array();
  for (const CorollaryRow& row : corollary_check(*s.group, in)) {
    if (row.status == CorollaryRow::Status::Fail) audit_ok = false;
    rows.push_back({{"name", row.name},
                    {"lhs", number12(row.lhs)},
                    {"rhs", number12(row.rhs)},
                    {"margin", number12(row.margin)},
                    {"slack", number12(row.slack)},
                    {"status", to_string(row.status)}});
  }
  r["p_base"] = number12(base.value);
  r["p_ext"] = number12(ext.value);
  r["log_rho"] = number12(rho.log_rho);
  r["log_alpha"] = number12(in.log_alpha);
  r["corollary"] = rows;
  return r;
}

json run_gibbs_audit(const Scenario& s, const Params& p, bool& audit_ok) {
  std::size_t n_max = p.size("n_max", 10);
  RpfData rpf = rpf_solve(*s.shift, *s.potential);
  GibbsAudit g = gibbs_audit(rpf, *s.potential, n_max);
  json depths = json::array();
  for (std::size_t n = 0; n < g.per_depth.size(); ++n) {
    depths.push_back({{"n", n + 1}, {"c_hat", number12(g.per_depth[n])}});
  }
  json r = {{"n_max", g.n_max},
            {"c_hat", number12(g.c_hat)},
            {"worst_word", format_word(g.worst_word)},
            {"pressure", number12(rpf.pressure)},
            {"per_depth", depths}};
  double c_max = p.number("c_max", INFINITY);
  if (std::isfinite(c_max)) {
    r["c_max"] = number12(c_max);
    if (!(g.c_hat <= c_max)) audit_ok = false;
  }
  return r;
}

json run_return_audit(const Scenario& s, const Params& p, const RunOptions& run, bool& audit_ok) {
  ReturnAuditOptions o;
  o.norm = norm_options(p, run);
  o.tolerance = task_tolerance(p, run, 1e-9);
  NormMethod method = norm_method(p);
  if (method != NormMethod::Auto) fail(p.at("method"), "the audit chooses the norm method itself");
  ReturnAuditReport rep = return_audit(*s.extension, *s.potential, p.size("n_max", 6), o);
  if (!rep.passed()) audit_ok = false;
  json rows = json::array();
  for (const ReturnAuditRow& row : rep.rows) {
    json jr = {{"n", row.n},
               {"norm", number12(row.norm)},
               {"norm_error", number12(row.norm_error)},
               {"norm_route", row.norm_route},
               {"test_lower_bound", number12(row.test_lower_bound)},
               {"return_value", number12(row.return_value)},
               {"sandwich_lo", number12(row.sandwich_lo)},
               {"sandwich_hi", number12(row.sandwich_hi)},
               {"log_return_rate", number12(row.log_return_rate)},
               {"log_sup_rate", number12(row.log_sup_rate)},
               {"lower_ok", row.lower_ok},
               {"upper_ok", row.upper_ok},
               {"sandwich_ok", row.sandwich_ok},
               {"rate_ok", row.rate_ok},
               {"enumeration_ok", row.enumeration_ok}};
    jr["enumerated"] = row.enumerated ? number12(*row.enumerated) : json(nullptr);
    rows.push_back(jr);
  }
  return {{"c_hat", number12(rep.c_hat)},
          {"gibbs_depth", rep.gibbs_depth},
          {"passed", rep.passed()},
          {"failures", rep.failures},
          {"rows", rows}};
}

// ---------------------------------------------------------------- output

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return v.dump();
  if (v.is_number()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v.get<double>());
    return buf;
  }
  std::string s;
  if (v.is_string()) {
    s = v.get<std::string>();
  } else if (v.is_array()) {
    std::vector<std::string> parts;
    for (const auto& e : v) parts.push_back(e.is_string() ? e.get<std::string>() : csv_cell(e));
    s = join(parts, ";");
  } else {
    s = v.dump();
  }
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }
  return s;
}

bool is_table(const json& v) {
  return v.is_array() && !v.empty() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_object(); });
}

void flatten(const json& obj, const std::string& prefix, std::vector<std::pair<std::string, json>>& scalars,
             std::vector<std::pair<std::string, const json*>>& tables) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it.value().is_object()) {
      flatten(it.value(), key, scalars, tables);
    } else if (is_table(it.value())) {
      tables.emplace_back(key, &it.value());
    } else {
      scalars.emplace_back(key, it.value());
    }
  }
}

void write_file(const fs::path& path, const std::string& body, std::vector<fs::path>& files) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << body;
  files.push_back(path);
}

void write_csv(const json& obj, const fs::path& dir, const std::string& stem, std::vector<fs::path>& files) {
  std::vector<std::pair<std::string, json>> scalars;
  std::vector<std::pair<std::string, const json*>> tables;
  flatten(obj, "", scalars, tables);
  std::ostringstream s;
  s << "key,value\n";
  for (const auto& [k, v] : scalars) s << k << "," << csv_cell(v) << "\n";
  write_file(dir / (stem + ".csv"), s.str(), files);
  for (const auto& [k, rows] : tables) {
    std::string sub = stem + "_" + k;
    std::replace(sub.begin(), sub.end(), '.', '_');
    std::vector<std::string> columns;
    std::vector<std::vector<std::pair<std::string, json>>> flat;
    for (std::size_t i = 0; i < rows->size(); ++i) {
      std::vector<std::pair<std::string, json>> cells;
      std::vector<std::pair<std::string, const json*>> nested;
      flatten((*rows)[i], "", cells, nested);
      for (const auto& [nk, nrows] : nested) {
        json wrap = json::object();
        wrap[nk] = *nrows;
        write_csv(wrap, dir, sub + "_" + std::to_string(i + 1), files);
      }
      for (const auto& c : cells) {
        if (std::find(columns.begin(), columns.end(), c.first) == columns.end()) columns.push_back(c.first);
      }
      flat.push_back(std::move(cells));
    }
    std::ostringstream t;
    t << join(columns, ",") << "\n";
    for (const auto& cells : flat) {
      std::vector<std::string> line;
      for (const auto& col : columns) {
        auto it = std::find_if(cells.begin(), cells.end(), [&](const auto& c) { return c.first == col; });
        line.push_back(it == cells.end() ? "" : csv_cell(it->second));
      }
      t << join(line, ",") << "\n";
    }
    write_file(dir / (sub + ".csv"), t.str(), files);
  }
}

std::string summary(const std::string& verb, const json& r) {
  auto num = [&](const char* k) { return r.contains(k) ? csv_cell(r[k]) : std::string("-"); };
  if (verb == "pressure-base" || verb == "pressure-ext") return "value " + num("value") + " (" + num("route") + ")";
  if (verb == "spectral-radius") return "log_rho " + num("log_rho");
  if (verb == "dichotomy") return "p_base " + num("p_base") + " log_rho " + num("log_rho");
  if (verb == "gibbs-audit") return "c_hat " + num("c_hat");
  if (verb == "lemma33-audit") return "c_hat " + num("c_hat") + " passed " + num("passed");
  if (verb == "symmetry" && r.contains("certificates") && !r["certificates"].empty()) {
    return "alpha_hat " + csv_cell(r["certificates"][0]["alpha_hat"]);
  }
  return "";
}

}  // namespace

json number12(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

const std::vector<std::string>& valid_verbs() {
  static const std::vector<std::string> verbs = {"pressure-base", "pressure-ext", "spectral-radius", "dichotomy",
                                                 "symmetry",      "gibbs-audit",  "lemma33-audit"};
  return verbs;
}

void validate_tasks(const Scenario& scenario) {
  // Every read below is the one the runner performs, so a scenario that
  // validates cannot fail later on a parameter type.
  RunOptions run;
  for (std::size_t i = 0; i < scenario.tasks.size(); ++i) {
    const TaskSpec& t = scenario.tasks[i];
    const std::string where = "tasks[" + std::to_string(i) + "]";
    auto keys = verb_keys().find(t.verb);
    if (keys == verb_keys().end()) {
      fail(where + ".verb", "unknown verb \"" + t.verb + "\" (valid verbs: " + join(valid_verbs()) + ")");
    }
    check_keys(t.params, keys->second, where + ".params");
    Params p(t.params, where + ".params");
    const std::string& v = t.verb;
    if (v == "pressure-base") p.size("n_check", 0);
    if (v == "pressure-ext" || v == "dichotomy" || v == "symmetry") {
      base_letter(p, scenario);
      ext_options(p, 400);
      p.flag("include_extension", true);
    }
    if (v == "spectral-radius" || v == "dichotomy" || v == "symmetry" || v == "lemma33-audit") {
      norm_method(p);
      norm_options(p, run);
      if (v != "lemma33-audit") schedule(p);
      p.number("tolerance", 0.0);
    }
    if (v == "symmetry") {
      std::size_t lo = p.size("n_lo", 2);
      std::size_t hi = p.size("n_hi", 10);
      if (lo < 1 || lo > hi) fail(where + ".params", "need 1 <= n_lo <= n_hi");
      p.windows("windows");
      p.flag("corollary", true);
      p.number("slack", 0.0);
      p.number("alpha_error", 0.0);
    }
    if (v == "gibbs-audit") {
      std::size_t n = p.size("n_max", 10);
      if (n < 1 || n > 14) fail(p.at("n_max"), "must lie in [1, 14]");
      p.number("c_max", 0.0);
    }
    if (v == "lemma33-audit") {
      std::size_t n = p.size("n_max", 6);
      if (n < 1 || n > 12) fail(p.at("n_max"), "must lie in [1, 12]");
      if (norm_method(p) != NormMethod::Auto) fail(p.at("method"), "the audit chooses the norm method itself");
    }
  }
}

Scenario parse_scenario(const std::string& text, const std::string& default_name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 0, col = 0;
    line_column(text, e.byte, line, col);
    std::string what = e.what();
    auto pos = what.find("syntax error");
    throw InputError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                     (pos == std::string::npos ? what : what.substr(pos)));
  }
  const std::string where = "scenario";
  check_keys(doc, {"name", "description", "shift", "potential", "group", "psi", "tasks", "output"}, where);
  Scenario s;
  s.name = default_name;
  if (doc.contains("name")) {
    if (!doc["name"].is_string() || doc["name"].get<std::string>().empty()) fail("name", "expected a nonempty string");
    s.name = doc["name"].get<std::string>();
  }
  if (s.name.find_first_of("/\\") != std::string::npos || s.name == "." || s.name == "..") {
    fail("name", "must be usable as a directory name");
  }
  s.shift = parse_shift(require(doc, "shift", where));
  s.potential = parse_potential(require(doc, "potential", where), *s.shift);
  s.group = parse_group(require(doc, "group", where));
  std::vector<Element> psi = parse_psi(require(doc, "psi", where), *s.shift, *s.group);
  s.extension = GroupExtension(*s.shift, *s.group, psi);
  const json& tasks = require(doc, "tasks", where);
  if (!tasks.is_array() || tasks.empty()) fail("tasks", "expected a nonempty array");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string tw = "tasks[" + std::to_string(i) + "]";
    check_keys(tasks[i], {"verb", "params"}, tw);
    const json& verb = require(tasks[i], "verb", tw);
    if (!verb.is_string()) fail(tw + ".verb", "expected a string");
    TaskSpec t;
    t.verb = verb.get<std::string>();
    if (tasks[i].contains("params")) t.params = tasks[i]["params"];
    if (!t.params.is_object()) fail(tw + ".params", "expected an object");
    s.tasks.push_back(std::move(t));
  }
  if (doc.contains("output")) {
    const json& o = doc["output"];
    if (!o.is_string() || (o != "csv" && o != "json")) fail("output", "expected \"csv\" or \"json\"");
    s.output = o.get<std::string>();
  }
  validate_tasks(s);
  return s;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str(), path.stem().string());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::vector<fs::path> list_scenarios(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) throw InputError("scenario directory " + dir.string() + " does not exist");
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

json run_task(const Scenario& scenario, const TaskSpec& task, const RunOptions& options, bool& audit_ok) {
  std::ostringstream sink;
  Params p(task.params, "params");
  const std::string& v = task.verb;
  if (v == "pressure-base") return run_pressure_base(scenario, p);
  if (v == "pressure-ext") return run_pressure_ext(scenario, p, options);
  if (v == "spectral-radius") return run_spectral(scenario, p, options);
  if (v == "dichotomy") return run_dichotomy(scenario, p, options, audit_ok, sink);
  if (v == "symmetry") return run_symmetry(scenario, p, options, audit_ok);
  if (v == "gibbs-audit") return run_gibbs_audit(scenario, p, audit_ok);
  if (v == "lemma33-audit") return run_return_audit(scenario, p, options, audit_ok);
  fail("verb", "unknown verb \"" + v + "\" (valid verbs: " + join(valid_verbs()) + ")");
}

RunReport run_scenario(const Scenario& scenario, const RunOptions& options, std::ostream& log) {
  set_thread_budget(options.threads);
  const std::string ext = options.output ? *options.output : scenario.output;
  if (ext != "csv" && ext != "json") throw InputError("output format must be csv or json");
  const fs::path dir = options.out_dir / scenario.name;
  fs::create_directories(dir);

  RunReport report;
  std::map<std::string, int> seen;
  json manifest_tasks = json::array();
  const auto start = std::chrono::steady_clock::now();
  for (const TaskSpec& task : scenario.tasks) {
    TaskOutcome out;
    out.verb = task.verb;
    int count = ++seen[task.verb];
    std::string stem = count == 1 ? task.verb : task.verb + "_" + std::to_string(count);
    bool audit_ok = true;
    const auto t0 = std::chrono::steady_clock::now();
    log << "[" << scenario.name << "] " << stem << "\n";
    try {
      if (task.verb == "dichotomy") {
        Params p(task.params, "params");
        out.result = run_dichotomy(scenario, p, options, audit_ok, log);
      } else {
        out.result = run_task(scenario, task, options, audit_ok);
      }
      out.status = audit_ok ? "ok" : "audit-failed";
    } catch (const std::exception& e) {
      out.status = "error";
      out.message = e.what();
      out.result = {{"error", out.message}};
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ext == "json") {
      write_file(dir / (stem + ".json"), out.result.dump(2) + "\n", out.files);
    } else {
      write_csv(out.result, dir, stem, out.files);
    }
    std::string line = out.status == "error" ? "error: " + out.message : summary(task.verb, out.result);
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.2f", out.seconds);
    log << "  " << out.status << " " << line << " [" << secs << " s]\n";

    json files = json::array();
    for (const auto& f : out.files) files.push_back(fs::relative(f, dir).string());
    manifest_tasks.push_back({{"task", stem},
                              {"verb", task.verb},
                              {"params", task.params},
                              {"status", out.status},
                              {"message", out.message},
                              {"wall_seconds", number12(out.seconds)},
                              {"files", files}});
    if (out.status != "ok") report.exit_code = 1;
    report.tasks.push_back(std::move(out));
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest = {{"tool", "gxm"},
                   {"version", kVersion},
                   {"scenario", scenario.name},
                   {"source", options.source},
                   {"output", ext},
                   {"threads", options.threads},
                   {"strict", options.strict},
                   {"tolerance", options.tolerance ? number12(*options.tolerance) : json(nullptr)},
                   {"tasks", manifest_tasks},
                   {"wall_seconds", number12(total)},
                   {"exit_code", report.exit_code}};
  std::vector<fs::path> ignored;
  write_file(dir / "run-manifest.json", manifest.dump(2) + "\n", ignored);
  return report;
}

}  // namespace gxm
