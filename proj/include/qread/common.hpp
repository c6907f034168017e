#pragma once

#include <stdexcept>
#include <string>

namespace qread {

// Tolerance policy: structural identities (completeness, round trips,
// normalization) are checked at 1e-12; physical properties (positivity,
// purity, Bloch-ball membership) at 1e-10.
inline constexpr double structural_tol = 1e-12;
inline constexpr double physical_tol = 1e-10;

class validation_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Kraus branch with probability zero was requested.
class impossible_outcome_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Every prior element assigns zero likelihood to the record.
class degenerate_record_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Exhaustive enumeration would exceed the configured budget.
class capacity_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// SME step left the Bloch ball by far more than discretization noise allows.
class integrator_blowup_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace qread
