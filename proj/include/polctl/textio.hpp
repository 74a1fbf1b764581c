#pragma once

#include <string>

namespace polctl {

/// Shortest decimal form that parses back to exactly the same double.
/// All file output goes through this so reruns are byte identical.
std::string format_double(double v);

}  // namespace polctl
