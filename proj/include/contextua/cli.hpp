// Command dispatch for the contextua tool. Reports go to `out`, diagnostics
// to `err`; the return value is the process exit code.
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace contextua::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNegative = 2;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool color = false);

/// FNV-1a 64, lower-case hex.
std::string digest(std::string_view bytes);

const std::vector<std::string>& commands();

}  // namespace contextua::cli
