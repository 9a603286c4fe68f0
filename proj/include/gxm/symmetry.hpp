#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gxm/extension.hpp"
#include "gxm/group.hpp"
#include "gxm/potential.hpp"

namespace gxm {

/// Window N_n of word lengths admitted on the right-hand side.
struct WindowSchedule {
  enum class Kind { Zero, Sqrt, Fixed };
  Kind kind = Kind::Zero;
  std::size_t fixed = 0;

  static WindowSchedule zero() { return {}; }
  static WindowSchedule sqrt() { return {Kind::Sqrt, 0}; }
  static WindowSchedule constant(std::size_t n) { return {Kind::Fixed, n}; }
  /// "zero", "sqrt", or a nonnegative integer.
  static WindowSchedule parse(const std::string& text);
  std::size_t at(std::size_t n) const;
  std::string describe() const;
};

struct AlphaRow {
  std::size_t n = 0;
  std::size_t window = 0;
  /// log c_n: the largest log LHS(g, n) - log RHS(g^-1) over reached g.
  double log_c = 0.0;
  Element argmax;
  /// The same ratio at g = id.
  double log_ratio_at_identity = 0.0;
};

struct AlphaCertificate {
  std::size_t n_lo = 0;
  std::size_t n_hi = 0;
  WindowSchedule window;
  std::vector<AlphaRow> rows;
  /// max(1, exp(A)) where log(c_n) / (2n) ~ A + B / n on the last third.
  double alpha_hat = 1.0;
  /// exp(A) before clamping at 1.
  double alpha_raw = 1.0;
  /// Certificate fails: some g has LHS > 0 while the window for g^-1 is empty.
  bool obstructed = false;
  std::string obstruction;
};

/// Throws InputError unless 1 <= n_lo <= n_hi and N_n < n on the range.
AlphaCertificate alpha_estimate(const GroupExtension& ext, const Potential& pot, std::size_t n_lo, std::size_t n_hi,
                                WindowSchedule window = {}, double prune_eps = 0.0);

struct CorollaryInputs {
  double base = 0.0;
  double base_error = 0.0;
  double extension = 0.0;
  double extension_error = 0.0;
  double log_rho = 0.0;
  double log_rho_error = 0.0;
  double log_alpha = 0.0;
  double log_alpha_error = 0.0;
  double tolerance = 1e-3;
};

struct CorollaryRow {
  enum class Status { Pass, Fail, Inconclusive, NotApplicable };
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // lhs - rhs
  double slack = 0.0;
  Status status = Status::Pass;
};
const char* to_string(CorollaryRow::Status s);

/// Evaluates, with error-bar slack:
///   ext_ge_base_minus_log_alpha   P_ext >= P_base - log alpha (amenable G only)
///   ext_ge_rho_minus_log_alpha    P_ext >= log rho - log alpha
///   ext_le_rho                    P_ext <= log rho
///   rho_le_base                   log rho <= P_base
/// Pass when margin >= -slack, Inconclusive down to -3 slack, else Fail.
std::vector<CorollaryRow> corollary_check(const Group& group, const CorollaryInputs& in);

struct CompactAlphaEntry {
  std::vector<Letter> letters;
  bool subgroup_ok = false;
  std::string subgroup_note;
  std::optional<AlphaCertificate> certificate;
  std::string diagnostic;
};

/// Certificates for the restrictions to each sub-alphabet; each level also
/// checks that every psi(i)^-1, i in the sub-alphabet, is the image of some
/// word over the sub-alphabet of length <= search_depth.
std::vector<CompactAlphaEntry> compact_alpha(const GroupExtension& ext, const Potential& pot,
                                             const std::vector<std::vector<Letter>>& sub_alphabets, std::size_t n_lo,
                                             std::size_t n_hi, WindowSchedule window = {},
                                             std::size_t search_depth = 6);

}  // namespace gxm
