#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dtlstm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitMissingInput = 2;
inline constexpr int kExitInvalid = 3;

/// Runs one subcommand. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_main(int argc, char** argv);

}  // namespace dtlstm::cli
