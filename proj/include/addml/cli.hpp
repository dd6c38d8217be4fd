#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace addml::cli {

constexpr int kExitOk = 0;
constexpr int kExitEngineError = 1;
constexpr int kExitUsageError = 2;

/// Runs one invocation. args excludes the program name. Results go to `out`,
/// progress and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace addml::cli
