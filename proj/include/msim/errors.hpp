#pragma once

#include <stdexcept>
#include <string>

namespace msim {

/// Bad input: out-of-domain arguments, malformed configs, dimension mismatches.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to reach its tolerance (quadrature, step control,
/// truncated correlation tails).
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A density matrix left the physical set by more than the abort threshold.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Image-model population escaped the {|g>,|s>} subspace.
class LeakageError : public std::runtime_error {
 public:
  LeakageError(const std::string& what, double max_leakage)
      : std::runtime_error(what), max_leakage_(max_leakage) {}
  double max_leakage() const noexcept { return max_leakage_; }

 private:
  double max_leakage_;
};

}  // namespace msim
