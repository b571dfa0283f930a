#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace siv {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitPhaseConflict = 3;

/// Entry point of the `siv` tool. Subcommands: gen-set, check, sample,
/// reconstruct, phi-inv-norm, bench, lcp-check.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_dispatch(int argc, char** argv);

}  // namespace siv
