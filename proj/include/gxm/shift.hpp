#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gxm {

/// Letters are stored 0-based; every external format (scenario files, word
/// strings, CSV output) uses 1-based labels.
using Letter = std::uint32_t;
using Word = std::vector<Letter>;

/// One-sided subshift of finite type over the alphabet {0, ..., m-1}.
///
/// Incidence rows are bitsets; successor and predecessor lists are cached so
/// that the dynamic-programming loops never scan a full row.
class Shift {
 public:
  /// Throws InputError on a non-square matrix, entries outside {0,1}, an empty
  /// alphabet, or any all-zero row or column.
  explicit Shift(const std::vector<std::vector<int>>& incidence);

  static Shift full(std::size_t alphabet_size);
  /// Two letters, a(2,2) = 0 and every other transition allowed.
  static Shift golden_mean();

  std::size_t size() const { return size_; }
  bool allowed(Letter from, Letter to) const {
    return (bits_[from * words_per_row_ + (to >> 6)] >> (to & 63)) & 1u;
  }
  std::span<const Letter> successors(Letter from) const { return successors_[from]; }
  std::span<const Letter> predecessors(Letter to) const { return predecessors_[to]; }
  bool is_full() const;
  std::vector<std::vector<int>> incidence() const;

  /// Subshift on the given letters (ascending, distinct). New letter i is old
  /// letter `letters[i]`. Throws InputError if the restriction leaves a letter
  /// without successor or predecessor.
  Shift restrict_to(std::span<const Letter> letters) const;

  friend bool operator==(const Shift& a, const Shift& b) {
    return a.size_ == b.size_ && a.bits_ == b.bits_;
  }

 private:
  std::size_t size_ = 0;
  std::size_t words_per_row_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<std::vector<Letter>> successors_;
  std::vector<std::vector<Letter>> predecessors_;
};

/// True iff every consecutive pair is allowed. Empty and one-letter sequences
/// are admissible. Throws InputError on a letter outside the alphabet.
bool is_admissible(const Shift& shift, std::span<const Letter> letters);
void require_admissible(const Shift& shift, std::span<const Letter> letters);

/// Exact number of admissible words of length n >= 1. Throws ResourceError on
/// 64-bit overflow.
std::uint64_t count_words(const Shift& shift, std::size_t n);

/// Visits every admissible word of length n once, in lexicographic order.
void for_each_word(const Shift& shift, std::size_t n,
                   const std::function<void(std::span<const Letter>)>& visit);
std::vector<Word> enumerate_words(const Shift& shift, std::size_t n);

struct MixingReport {
  bool irreducible = false;
  std::size_t period = 0;
  bool topologically_mixing = false;
  /// Finite alphabets always have big images and preimages; the witness set
  /// is the whole alphabet.
  std::vector<Letter> bip_witness;
};

MixingReport mixing_report(const Shift& shift);
bool is_mixing(const Shift& shift);

/// Length of the longest common initial block.
std::size_t common_prefix_length(std::span<const Letter> a, std::span<const Letter> b);
/// The metric exp(-beta * |a ^ b|) evaluated on the given prefixes.
double prefix_distance(std::span<const Letter> a, std::span<const Letter> b, double beta);

/// "1-2-1" style rendering with 1-based labels.
std::string format_word(std::span<const Letter> word);
/// Parses "1-2-1" (1-based labels); throws InputError on malformed input or a
/// letter outside [1, alphabet_size].
Word parse_word(const std::string& text, std::size_t alphabet_size);

}  // namespace gxm
