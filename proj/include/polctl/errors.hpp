#pragma once

#include <stdexcept>
#include <string>

namespace polctl {

/// Configuration file / scenario validation failure.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical solver failed to converge within its iteration budget.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// DGD measurement hit the eigenvalue-argument wrap boundary.
struct AliasingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// QBER requested from a record pair with zero total clicks.
struct UndefinedQberError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace polctl
