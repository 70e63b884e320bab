// Command-line front end. Exit codes: 0 success, 1 configuration or usage
// error, 2 runtime simulation error.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace leowb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace leowb::cli
