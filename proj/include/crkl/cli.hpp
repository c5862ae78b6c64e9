#pragma once

#include <filesystem>
#include <iosfwd>

namespace crkl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitRuntimeError = 3;

/// Entry point of the `crkl` tool. Subcommands: run, validate, report, compare.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// trace.csv -> trace_x.csv
std::filesystem::path iterate_sidecar(const std::filesystem::path& trace_path);

}  // namespace crkl::cli
