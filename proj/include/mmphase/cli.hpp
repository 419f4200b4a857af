#pragma once

#include <iosfwd>
#include <string_view>

namespace mmphase::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// Runs one subcommand. Returns 0 on success, 1 on a computation error (a
/// JSON error object goes to `err`) and 2 on bad arguments.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mmphase::cli
