#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crkl/linalg.hpp"
#include "crkl/optimizer.hpp"

namespace crkl {

/// Malformed trace or iterate file; the message names the line.
class TraceFormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

/// Header plus one row per record:
/// k,f,f_gap,grad_norm,lambda_min,step_norm,mu,model_decrease,cum_path_length,dist_omega
/// Absent optional values are empty fields.
std::string trace_to_csv(const Trace& trace);

/// Records only; cum_path_length is checked against the step norms.
Trace trace_from_csv(std::string_view text);

/// One comma-separated row per iterate. Requires every record to carry x.
std::string iterates_to_csv(const Trace& trace);
std::vector<Vector> iterates_from_csv(std::string_view text);

/// Attaches iterates to records (sizes must agree).
void attach_iterates(Trace& trace, std::vector<Vector> xs);

std::string read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace crkl
