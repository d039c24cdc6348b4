#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace docenh::cli {

inline constexpr int kOk = 0;
inline constexpr int kOperationalError = 1;
inline constexpr int kUsageError = 2;

/// Runs one command line (without the program name).
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace docenh::cli
