#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ou::cli {

/// Exit-code contract shared by every subcommand.
enum Exit : int {
  ok = 0,
  invariant_breach = 1,
  non_convergence = 2,
  regime_rejected = 3,
  config_error = 4,
};

/// Environment variable consulted when --out is not given.
inline constexpr const char* kOutDirEnv = "OUSPEC_OUT_DIR";

/// Full command line without the program name, e.g. {"basis-check", "-d", "2"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ou::cli
