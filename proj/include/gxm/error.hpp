#pragma once

#include <stdexcept>
#include <string>

namespace gxm {

/// Malformed or out-of-range caller input (bad letters, inadmissible words,
/// unknown group elements, schema violations).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A mathematical precondition of an operation does not hold, e.g. a
/// non-mixing shift handed to the Perron-Frobenius solver.
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

/// A configured size guard (support size, ball size, enumeration size,
/// counter overflow) was exceeded.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gxm
