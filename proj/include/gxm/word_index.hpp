#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "gxm/shift.hpp"

namespace gxm {

/// Dense index over the admissible words of one fixed length, in
/// lexicographic order. Used for potential tables and for the block states
/// of recoded transfer matrices.
class WordIndex {
 public:
  WordIndex() = default;
  WordIndex(const Shift& shift, std::size_t length);

  std::size_t size() const { return count_; }
  std::size_t length() const { return length_; }
  std::span<const Letter> word(std::size_t index) const {
    return {letters_.data() + index * length_, length_};
  }
  std::optional<std::size_t> find(std::span<const Letter> word) const;
  std::size_t at(std::span<const Letter> word) const;  // throws InputError if absent

 private:
  std::uint64_t encode(std::span<const Letter> word) const;

  std::size_t alphabet_ = 0;
  std::size_t length_ = 0;
  std::size_t count_ = 0;
  std::vector<Letter> letters_;
  std::unordered_map<std::uint64_t, std::uint32_t> lookup_;
};

}  // namespace gxm
