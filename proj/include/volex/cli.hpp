#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace volex {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

// Runs one `volex` invocation; args excludes the program name. Domain errors
// print a single `error: <code>: <message>` line to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace volex
