#include "gxm/word_index.hpp"

#include <cmath>
#include <limits>

#include "gxm/error.hpp"

namespace gxm {

namespace {
constexpr std::size_t kMaxIndexedWords = std::size_t{1} << 24;
}

WordIndex::WordIndex(const Shift& shift, std::size_t length) : alphabet_(shift.size()), length_(length) {
  if (length == 0) throw InputError("word index: length must be at least 1");
  const double bits = static_cast<double>(length) * std::log2(static_cast<double>(alphabet_) + 1.0);
  if (bits > 63.0) throw ResourceError("word index: words of this length cannot be encoded in 64 bits");
  const std::uint64_t total = count_words(shift, length);
  if (total > kMaxIndexedWords) {
    throw ResourceError("word index: " + std::to_string(total) + " admissible words of length " +
                        std::to_string(length) + " exceed the table guard");
  }
  letters_.reserve(total * length);
  lookup_.reserve(total);
  for_each_word(shift, length, [&](std::span<const Letter> w) {
    lookup_.emplace(encode(w), static_cast<std::uint32_t>(count_));
    letters_.insert(letters_.end(), w.begin(), w.end());
    ++count_;
  });
}

std::uint64_t WordIndex::encode(std::span<const Letter> word) const {
  std::uint64_t code = 0;
  for (Letter l : word) code = code * (alphabet_ + 1) + (l + 1);
  return code;
}

std::optional<std::size_t> WordIndex::find(std::span<const Letter> word) const {
  if (word.size() != length_) return std::nullopt;
  for (Letter l : word) {
    if (l >= alphabet_) return std::nullopt;
  }
  const auto it = lookup_.find(encode(word));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t WordIndex::at(std::span<const Letter> word) const {
  const auto idx = find(word);
  if (!idx) throw InputError("word " + format_word(word) + " is not an admissible word of length " +
                             std::to_string(length_));
  return *idx;
}

}  // namespace gxm
