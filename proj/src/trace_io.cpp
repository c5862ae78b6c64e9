#include "crkl/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace crkl {

namespace {

constexpr std::string_view kHeader =
    "k,f,f_gap,grad_norm,lambda_min,step_norm,mu,model_decrease,cum_path_length,dist_omega";
constexpr std::size_t kColumns = 10;

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines)
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  return lines;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw TraceFormatError("line " + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view field, std::size_t line, std::string_view column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    fail(line, "bad number '" + std::string(field) + "' in column " + std::string(column));
  }
  return v;
}

std::optional<double> parse_optional(std::string_view field, std::size_t line, std::string_view column) {
  if (field.empty()) return std::nullopt;
  return parse_double(field, line, column);
}

void append_optional(std::string& out, const std::optional<double>& v) {
  if (v) out += format_double(*v);
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trace_to_csv(const Trace& trace) {
  std::string out(kHeader);
  out += '\n';
  double cum = 0.0;
  for (const IterateRecord& r : trace.records) {
    cum += r.step_norm;
    out += std::to_string(r.k);
    out += ',';
    out += format_double(r.f);
    out += ',';
    append_optional(out, r.f_gap);
    out += ',';
    out += format_double(r.grad_norm);
    out += ',';
    out += format_double(r.lambda_min);
    out += ',';
    out += format_double(r.step_norm);
    out += ',';
    out += format_double(r.mu);
    out += ',';
    append_optional(out, r.model_decrease);
    out += ',';
    out += format_double(cum);
    out += ',';
    append_optional(out, r.dist_omega);
    out += '\n';
  }
  return out;
}

Trace trace_from_csv(std::string_view text) {
  const std::vector<std::string_view> lines = lines_of(text);
  if (lines.empty() || lines[0] != kHeader) fail(1, "expected header '" + std::string(kHeader) + "'");

  static constexpr std::string_view names[kColumns] = {"k",         "f",  "f_gap",          "grad_norm",
                                                       "lambda_min", "step_norm", "mu", "model_decrease",
                                                       "cum_path_length", "dist_omega"};
  Trace trace;
  double cum = 0.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    const std::vector<std::string_view> f = split(lines[i], ',');
    if (f.size() != kColumns) {
      fail(line, "expected " + std::to_string(kColumns) + " fields, got " + std::to_string(f.size()));
    }
    IterateRecord r;
    int k = -1;
    const auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), k);
    if (ec != std::errc() || ptr != f[0].data() + f[0].size() || f[0].empty()) {
      fail(line, "bad iteration index '" + std::string(f[0]) + "'");
    }
    if (k != static_cast<int>(i - 1)) fail(line, "iteration index " + std::to_string(k) + " out of sequence");
    r.k = k;
    r.f = parse_double(f[1], line, names[1]);
    r.f_gap = parse_optional(f[2], line, names[2]);
    r.grad_norm = parse_double(f[3], line, names[3]);
    r.lambda_min = parse_double(f[4], line, names[4]);
    r.step_norm = parse_double(f[5], line, names[5]);
    r.mu = parse_double(f[6], line, names[6]);
    r.model_decrease = parse_optional(f[7], line, names[7]);
    const double cum_read = parse_double(f[8], line, names[8]);
    r.dist_omega = parse_optional(f[9], line, names[9]);
    if (!std::isfinite(r.f)) fail(line, "f is not finite");
    if (!(r.grad_norm >= 0.0) || !(r.step_norm >= 0.0) || !(r.mu >= 0.0)) {
      fail(line, "grad_norm, step_norm and mu must be >= 0");
    }
    cum += r.step_norm;
    if (std::abs(cum_read - cum) > 1e-12 * std::max(1.0, cum)) {
      fail(line, "cum_path_length does not match the running sum of step_norm");
    }
    trace.records.push_back(r);
  }
  return trace;
}

std::string iterates_to_csv(const Trace& trace) {
  std::string out;
  for (const IterateRecord& r : trace.records) {
    if (!r.x) throw std::invalid_argument("iterates_to_csv: record " + std::to_string(r.k) + " has no iterate");
    for (std::size_t i = 0; i < r.x->size(); ++i) {
      if (i > 0) out += ',';
      out += format_double((*r.x)[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<Vector> iterates_from_csv(std::string_view text) {
  std::vector<Vector> xs;
  const std::vector<std::string_view> lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    Vector x;
    for (std::string_view field : split(lines[i], ',')) x.push_back(parse_double(field, i + 1, "x"));
    if (!xs.empty() && x.size() != xs.front().size()) fail(i + 1, "iterate dimension changes");
    xs.push_back(std::move(x));
  }
  return xs;
}

void attach_iterates(Trace& trace, std::vector<Vector> xs) {
  if (xs.size() != trace.records.size()) {
    throw TraceFormatError("iterate file has " + std::to_string(xs.size()) + " rows, trace has " +
                           std::to_string(trace.records.size()));
  }
  for (std::size_t i = 0; i < xs.size(); ++i) trace.records[i].x = std::move(xs[i]);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace crkl
