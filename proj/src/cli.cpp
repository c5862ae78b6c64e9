#include "crkl/cli.hpp"

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crkl/diagnostics.hpp"
#include "crkl/experiment.hpp"
#include "crkl/trace_io.hpp"

namespace crkl::cli {

using nlohmann::json;

std::filesystem::path iterate_sidecar(const std::filesystem::path& trace_path) {
  std::filesystem::path p = trace_path;
  p.replace_filename(trace_path.stem().string() + "_x" + trace_path.extension().string());
  return p;
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string estimate_text(const RateEstimate& e) {
  std::string s(to_string(e.regime));
  if (e.order_q) s += " q=" + fmt("%.4g", *e.order_q);
  if (e.ratio_c) s += " c=" + fmt("%.6g", *e.ratio_c);
  if (e.exponent_alpha) s += " alpha=" + fmt("%.4g", *e.exponent_alpha);
  return s;
}

std::string predicted_text(const std::optional<TheoreticalRate>& p) {
  if (!p) return "-";
  std::string s(to_string(p->regime));
  if (p->order) s += " q=" + fmt("%.4g", *p->order);
  if (p->exponent) s += " alpha=" + fmt("%.4g", *p->exponent);
  return s;
}

std::string verdict_text(const MeasureReport& r) {
  if (!r.verdict) return r.note.empty() ? "-" : "n/a (" + r.note + ")";
  std::string s = r.verdict->within_tolerance ? "match" : (r.verdict->regime_match ? "regime match, off" : "mismatch");
  if (r.verdict->deviation) s += " (dev " + fmt("%.3g", *r.verdict->deviation) + ")";
  return s;
}

void print_rate_table(std::ostream& out, const std::vector<MeasureReport>& rows) {
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-28s %-28s %s\n", "measure", "estimated", "predicted", "verdict");
  out << line;
  for (const MeasureReport& r : rows) {
    std::snprintf(line, sizeof line, "%-12s %-28s %-28s ", std::string(to_string(r.measure)).c_str(),
                  estimate_text(r.estimate).c_str(), predicted_text(r.predicted).c_str());
    out << line << verdict_text(r) << '\n';
  }
}

void print_inequality(std::ostream& out, const char* name, const InequalityStats& s) {
  out << "  " << name << ": " << s.checked << " checked, " << s.violations << " violations";
  if (s.checked > 0) out << ", worst slack " << format_double(s.worst_slack) << " at k=" << s.worst_index;
  out << '\n';
}

Trace load_trace(const std::string& path) {
  Trace trace = trace_from_csv(read_file(path));
  const std::filesystem::path side = iterate_sidecar(path);
  if (std::filesystem::exists(side)) attach_iterates(trace, iterates_from_csv(read_file(side)));
  return trace;
}

std::vector<Measure> parse_measures(const std::string& list) {
  std::vector<Measure> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    const std::string item = list.substr(pos, comma - pos);
    if (!item.empty()) out.push_back(parse_measure(item));
    pos = comma + 1;
  }
  return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, std::ostream& out) {
  ExperimentConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  const ExperimentResult res = run_experiment(cfg);
  write_outputs(res, cfg.output_dir);
  const RunSummary& s = res.summary;
  out << s.objective << " / " << to_string(s.algorithm) << ": " << to_string(s.termination) << " after "
      << s.iterations << " iterations, f=" << format_double(s.final_f) << ", mu=" << format_double(s.final_mu)
      << '\n';
  print_rate_table(out, s.rates);
  out << "dynamics: " << (s.dynamics.pass ? "pass" : "FAIL") << '\n';
  out << "wrote " << (cfg.output_dir / "trace.csv").string() << '\n';
  return kExitOk;
}

struct ValidateArgs {
  std::string trace;
  std::string objective;
  std::string params;
  double L = 0.0;
  double M = 0.0;
  std::string algorithm = "CR";
  double step_size = 0.0;
  double tol = 1e-10;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  Trace trace = load_trace(a.trace);
  trace.algorithm = parse_algorithm(a.algorithm);
  if (trace.algorithm == Algorithm::GD) {
    if (!(a.step_size > 0.0)) throw ConfigError("--step-size", "required (> 0) for GD traces");
    trace.config.step_size = a.step_size;
  }
  const ObjectiveSpec spec = parse_objective_spec(a.objective, a.params);
  const bool has_x = !trace.records.empty() && trace.records.front().x.has_value();
  const Vector x0 = has_x ? *trace.records.front().x : canonical_start(spec);
  Objective obj;
  try {
    obj = make_objective(spec, x0);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }

  const DynamicsReport rep = check_dynamics(trace, a.L, a.M, a.tol);
  out << "dynamics (L=" << format_double(a.L) << ", M=" << format_double(a.M) << "): "
      << (rep.pass ? "pass" : "FAIL") << '\n';
  print_inequality(out, "descent", rep.descent);
  if (trace.algorithm != Algorithm::GD) {
    print_inequality(out, "gradient bound", rep.gradient);
    print_inequality(out, "curvature bound", rep.curvature);
    print_inequality(out, "mu bound", rep.mu);
  }

  // Recorded values must match the objective at the stored iterates.
  bool consistent = true;
  if (has_x) {
    int mismatches = 0;
    for (const IterateRecord& r : trace.records) {
      const double f = obj.value(*r.x);
      if (std::abs(f - r.f) > 1e-12 * std::max(1.0, std::abs(f))) ++mismatches;
    }
    consistent = mismatches == 0;
    out << "record consistency: " << mismatches << " of " << trace.records.size() << " f values disagree\n";
  }

  const PathLength pl = path_length(trace);
  bool tails_monotone = true;
  for (std::size_t k = 1; k < pl.tail_sums.size(); ++k)
    if (pl.tail_sums[k] > pl.tail_sums[k - 1]) tails_monotone = false;
  out << "path length: " << format_double(pl.total) << ", tail sums " << (tails_monotone ? "non-increasing" : "NOT monotone")
      << '\n';

  return rep.pass && consistent && tails_monotone ? kExitOk : kExitValidationFailed;
}

struct ReportArgs {
  std::string trace;
  std::optional<double> theta;
  std::string measures;
  std::string algorithm = "CR";
  std::string objective;
  std::string params;
  double burn_in = 0.2;
  bool as_json = false;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  Trace trace = load_trace(a.trace);
  trace.algorithm = parse_algorithm(a.algorithm);
  std::optional<double> theta = a.theta;
  std::optional<Objective> obj;
  if (!a.objective.empty()) {
    const ObjectiveSpec spec = parse_objective_spec(a.objective, a.params);
    const bool has_x = !trace.records.empty() && trace.records.front().x.has_value();
    try {
      obj = make_objective(spec, has_x ? *trace.records.front().x : canonical_start(spec));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("", e.what());
    }
    if (!theta && obj->kl) theta = obj->kl->theta;
  }
  if (theta && !(*theta > 0.0 && *theta <= 1.0)) throw ConfigError("--theta", "must be in (0, 1]");
  const std::vector<Measure> measures =
      a.measures.empty() ? default_measures(trace.algorithm) : parse_measures(a.measures);
  const SolutionOracle* oracle = obj && obj->solution_set ? &*obj->solution_set : nullptr;
  const std::vector<MeasureReport> rows = rate_report(trace, theta, measures, oracle, a.burn_in);

  if (a.as_json) {
    json arr = json::array();
    for (const MeasureReport& r : rows) arr.push_back(to_json(r));
    out << json{{"theta", theta ? json(*theta) : json(nullptr)}, {"rates", arr}}.dump(2) << '\n';
  } else {
    print_rate_table(out, rows);
  }
  return kExitOk;
}

int cmd_compare(const std::string& path_a, const std::string& path_b, std::ostream& out) {
  const ExperimentConfig ca = load_config(path_a);
  const ExperimentConfig cb = load_config(path_b);
  if (!(ca.objective == cb.objective)) throw ConfigError("objective", "the two configs use different objectives");
  if (resolve_start(ca) != resolve_start(cb)) throw ConfigError("x0", "the two configs start from different points");

  const ExperimentResult ra = run_experiment(ca);
  const ExperimentResult rb = run_experiment(cb);
  const std::string name_a = "A:" + std::string(to_string(ca.algorithm.kind));
  const std::string name_b = "B:" + std::string(to_string(cb.algorithm.kind));

  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-14s %-28s %-28s\n", "measure", "algorithm", "estimated", "predicted");
  out << line;
  const auto find = [](const RunSummary& s, Measure m) -> const MeasureReport* {
    for (const MeasureReport& r : s.rates)
      if (r.measure == m) return &r;
    return nullptr;
  };
  for (Measure m : {Measure::FGap, Measure::IterateDist, Measure::Mu, Measure::DistToSet}) {
    for (const auto& [name, res] : {std::pair{name_a, &ra}, std::pair{name_b, &rb}}) {
      const MeasureReport* r = find(res->summary, m);
      if (!r) continue;
      std::snprintf(line, sizeof line, "%-12s %-14s %-28s %-28s\n", std::string(to_string(m)).c_str(),
                    name.c_str(), estimate_text(r->estimate).c_str(), predicted_text(r->predicted).c_str());
      out << line;
    }
  }
  out << name_a << ": " << to_string(ra.summary.termination) << " after " << ra.summary.iterations << " iterations\n";
  out << name_b << ": " << to_string(rb.summary.termination) << " after " << rb.summary.iterations << " iterations\n";
  return kExitOk;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cubic-regularized Newton experiments and rate diagnostics", "crkl"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  CLI::App* run = app.add_subcommand("run", "Run one experiment config; writes trace.csv and summary.json");
  run->add_option("--config", config_path, "Experiment JSON")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");

  ValidateArgs va;
  CLI::App* validate = app.add_subcommand("validate", "Check per-step inequalities on a saved trace");
  validate->add_option("--trace", va.trace)->required();
  validate->add_option("--objective", va.objective)->required();
  validate->add_option("--params", va.params, "Objective parameters as a JSON object");
  validate->add_option("--L", va.L)->required();
  validate->add_option("--M", va.M)->required();
  validate->add_option("--algorithm", va.algorithm)->check(CLI::IsMember({"CR", "InexactCR", "GD"}));
  validate->add_option("--step-size", va.step_size, "GD step size");
  validate->add_option("--tol", va.tol, "Relative tolerance");

  ReportArgs ra;
  CLI::App* report = app.add_subcommand("report", "Fit decay regimes of a saved trace");
  report->add_option("--trace", ra.trace)->required();
  report->add_option("--theta", ra.theta, "KL exponent");
  report->add_option("--measures", ra.measures, "Comma list of FGap,IterateDist,Mu,DistToSet");
  report->add_option("--algorithm", ra.algorithm)->check(CLI::IsMember({"CR", "InexactCR", "GD"}));
  report->add_option("--objective", ra.objective, "Objective name (for theta and the solution set)");
  report->add_option("--params", ra.params, "Objective parameters as a JSON object");
  report->add_option("--burn-in", ra.burn_in)->check(CLI::Range(0.0, 0.99));
  report->add_flag("--json", ra.as_json);

  std::string cfg_a, cfg_b;
  CLI::App* cmp = app.add_subcommand("compare", "Run two configs on the same problem and tabulate rates");
  cmp->add_option("--config-a", cfg_a)->required();
  cmp->add_option("--config-b", cfg_b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, out);
    if (*validate) return cmd_validate(va, out);
    if (*report) return cmd_report(ra, out);
    if (*cmp) return cmd_compare(cfg_a, cfg_b, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const TraceFormatError& e) {
    err << "trace error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitInputError;
}

}  // namespace crkl::cli
