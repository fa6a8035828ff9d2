#pragma once

#include <stdexcept>
#include <string>

namespace vpatch {

// Bad input to an operation (wrong sizes, out-of-range parameters).
class invalid_argument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical invariant failed at run time. The message names the invariant.
class invariant_violation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// R(theta) = sqrt(b^2 + 2 r) is not safely positive.
class degenerate_patch : public invariant_violation {
 public:
  using invariant_violation::invariant_violation;
};

// The patch reaches (or nearly reaches) the unit circle.
class boundary_contact : public invariant_violation {
 public:
  using invariant_violation::invariant_violation;
};

// Frequency analysis found no spectral peak above the noise floor.
class no_frequency : public invariant_violation {
 public:
  using invariant_violation::invariant_violation;
};

}  // namespace vpatch
