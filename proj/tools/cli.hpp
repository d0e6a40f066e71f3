#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flatgrid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDiverged = 3;

/// Entry point shared by the `flatgrid` executable and the tests.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "lo:hi:step" into an inclusive, evenly spaced axis.
std::vector<double> parse_range(const std::string& spec);

}  // namespace flatgrid::cli
