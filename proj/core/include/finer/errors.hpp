#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace finer {

/// A precondition of a public operation was violated (bad shape, bad range).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative routine hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double off_diagonal_norm)
      : std::runtime_error(what), off_diagonal_norm_(off_diagonal_norm) {}

  double off_diagonal_norm() const noexcept { return off_diagonal_norm_; }

 private:
  double off_diagonal_norm_;
};

/// A NaN or infinity showed up where finite values are required.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, std::ptrdiff_t layer = -1)
      : std::runtime_error(what), layer_(layer) {}

  /// Offending layer index, or -1 when not tied to a layer.
  std::ptrdiff_t layer() const noexcept { return layer_; }

 private:
  std::ptrdiff_t layer_;
};

/// Reading or writing an artifact failed (missing file, bad magic, bad format).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FINER_REQUIRE(cond, msg)                  \
  do {                                            \
    if (!(cond)) throw ::finer::ContractViolation(msg); \
  } while (0)

}  // namespace finer
