#include "crkl/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "crkl/random.hpp"
#include "crkl/trace_io.hpp"

namespace crkl {

using nlohmann::json;

namespace {

// Random streams derived from the config seed.
constexpr std::uint64_t kStartStream = 1;
constexpr std::uint64_t kPerturbationStream = 2;

void reject_unknown_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
    }
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "expected a finite number");
  return d;
}

double positive_number(const json& v, const std::string& path) {
  const double d = as_number(v, path);
  if (!(d > 0.0)) throw ConfigError(path, "must be > 0");
  return d;
}

std::int64_t as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t as_seed(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const std::int64_t s = as_integer(v, path);
  if (s < 0) throw ConfigError(path, "must be >= 0");
  return static_cast<std::uint64_t>(s);
}

std::optional<double> auto_or_positive(const json& v, const std::string& path) {
  if (v.is_string()) {
    if (v.get<std::string>() == "auto") return std::nullopt;
    throw ConfigError(path, "expected \"auto\" or a number");
  }
  return positive_number(v, path);
}

Vector number_array(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a non-empty array of numbers");
  Vector out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

ObjectiveSpec parse_objective(const json& j) {
  const std::string path = "objective";
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  reject_unknown_keys(j, path, {"name", "params"});
  const json& name = require(j, path, "name");
  if (!name.is_string()) throw ConfigError(path + ".name", "expected a string");
  ObjectiveSpec spec;
  spec.name = name.get<std::string>();
  if (auto it = j.find("params"); it != j.end()) {
    if (!it->is_object()) throw ConfigError(path + ".params", "expected an object");
    for (const auto& [key, value] : it->items()) {
      const std::string p = path + ".params." + key;
      spec.params[key] = value.is_array() ? number_array(value, p) : Vector{as_number(value, p)};
    }
  }
  return spec;
}

AlgorithmConfig parse_algorithm_config(const json& j) {
  const std::string path = "algorithm";
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  reject_unknown_keys(j, path,
                      {"kind", "M", "mu_tol", "max_iter", "record_x", "c1", "c2", "retry_shrink", "step_size",
                       "grad_tol"});
  AlgorithmConfig a;
  const json& kind = require(j, path, "kind");
  if (!kind.is_string()) throw ConfigError(path + ".kind", "expected a string");
  try {
    a.kind = parse_algorithm(kind.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ".kind", e.what());
  }
  if (auto it = j.find("M"); it != j.end()) a.m = auto_or_positive(*it, path + ".M");
  if (auto it = j.find("mu_tol"); it != j.end()) a.mu_tol = positive_number(*it, path + ".mu_tol");
  if (auto it = j.find("max_iter"); it != j.end()) {
    const std::int64_t n = as_integer(*it, path + ".max_iter");
    if (n < 1 || n > 100'000'000) throw ConfigError(path + ".max_iter", "must be in [1, 1e8]");
    a.max_iter = static_cast<int>(n);
  }
  if (auto it = j.find("record_x"); it != j.end()) {
    if (!it->is_boolean()) throw ConfigError(path + ".record_x", "expected a boolean");
    a.record_x = it->get<bool>();
  }
  if (auto it = j.find("c1"); it != j.end()) {
    a.c1 = as_number(*it, path + ".c1");
    if (a.c1 < 0.0) throw ConfigError(path + ".c1", "must be >= 0");
  }
  if (auto it = j.find("c2"); it != j.end()) {
    a.c2 = as_number(*it, path + ".c2");
    if (a.c2 < 0.0) throw ConfigError(path + ".c2", "must be >= 0");
  }
  if (auto it = j.find("retry_shrink"); it != j.end()) {
    a.retry_shrink = as_number(*it, path + ".retry_shrink");
    if (!(a.retry_shrink > 0.0 && a.retry_shrink < 1.0)) throw ConfigError(path + ".retry_shrink", "must be in (0, 1)");
  }
  if (auto it = j.find("step_size"); it != j.end()) a.step_size = auto_or_positive(*it, path + ".step_size");
  if (auto it = j.find("grad_tol"); it != j.end()) a.grad_tol = positive_number(*it, path + ".grad_tol");
  return a;
}

StartSpec parse_start(const json& j) {
  const std::string path = "x0";
  StartSpec s;
  if (j.is_array()) {
    s.kind = StartSpec::Kind::Explicit;
    s.x = number_array(j, path);
    return s;
  }
  if (j.is_string()) {
    if (j.get<std::string>() != "canonical") throw ConfigError(path, "expected \"canonical\", an array or an object");
    s.kind = StartSpec::Kind::Canonical;
    return s;
  }
  if (!j.is_object()) throw ConfigError(path, "expected \"canonical\", an array or an object");
  reject_unknown_keys(j, path, {"random_sphere"});
  const json& rs = require(j, path, "random_sphere");
  const std::string rp = path + ".random_sphere";
  if (!rs.is_object()) throw ConfigError(rp, "expected an object");
  reject_unknown_keys(rs, rp, {"radius", "seed"});
  s.kind = StartSpec::Kind::RandomSphere;
  if (auto it = rs.find("radius"); it != rs.end()) s.radius = positive_number(*it, rp + ".radius");
  if (auto it = rs.find("seed"); it != rs.end()) s.seed = as_seed(*it, rp + ".seed");
  return s;
}

std::string field_of(const std::string& message) {
  const std::size_t colon = message.find(": ");
  return colon == std::string::npos ? std::string() : message.substr(0, colon);
}

std::string message_after_field(const std::string& message) {
  const std::size_t colon = message.find(": ");
  return colon == std::string::npos ? message : message.substr(colon + 2);
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, json_text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (json_text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("", "JSON syntax error at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
  if (!doc.is_object()) throw ConfigError("", "top level must be a JSON object");
  reject_unknown_keys(doc, "", {"objective", "algorithm", "x0", "output_dir", "seed", "burn_in"});

  ExperimentConfig cfg;
  cfg.objective = parse_objective(require(doc, "", "objective"));
  cfg.algorithm = parse_algorithm_config(require(doc, "", "algorithm"));
  if (auto it = doc.find("x0"); it != doc.end()) cfg.x0 = parse_start(*it);
  if (auto it = doc.find("output_dir"); it != doc.end()) {
    if (!it->is_string() || it->get<std::string>().empty()) throw ConfigError("output_dir", "expected a path string");
    cfg.output_dir = it->get<std::string>();
  }
  if (auto it = doc.find("seed"); it != doc.end()) cfg.seed = as_seed(*it, "seed");
  if (auto it = doc.find("burn_in"); it != doc.end()) {
    cfg.burn_in = as_number(*it, "burn_in");
    if (!(cfg.burn_in >= 0.0 && cfg.burn_in < 1.0)) throw ConfigError("burn_in", "must be in [0, 1)");
  }

  // Objective parameters and the start point are checked before any run.
  try {
    const Vector x0 = resolve_start(cfg);
    make_objective(cfg.objective, x0);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field_of(e.what()), message_after_field(e.what()));
  }
  if (cfg.algorithm.kind == Algorithm::GD && !cfg.algorithm.step_size) {
    const Objective obj = make_objective(cfg.objective, resolve_start(cfg));
    if (!obj.gradient_lipschitz || !(*obj.gradient_lipschitz > 0.0)) {
      throw ConfigError("algorithm.step_size", "\"auto\" needs a gradient Lipschitz constant; give a number");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return parse_config(text);
}

ObjectiveSpec parse_objective_spec(const std::string& name, std::string_view params_json) {
  json params;
  try {
    params = params_json.empty() ? json::object() : json::parse(params_json);
  } catch (const json::parse_error&) {
    throw ConfigError("objective.params", "not valid JSON");
  }
  return parse_objective(json{{"name", name}, {"params", params}});
}

Vector resolve_start(const ExperimentConfig& cfg) {
  switch (cfg.x0.kind) {
    case StartSpec::Kind::Explicit: return cfg.x0.x;
    case StartSpec::Kind::Canonical: return canonical_start(cfg.objective);
    case StartSpec::Kind::RandomSphere: {
      const std::size_t d = objective_dimension(cfg.objective);
      CounterRng rng = cfg.x0.seed ? CounterRng(*cfg.x0.seed) : CounterRng(cfg.seed).split(kStartStream);
      return rng.point_on_sphere(d, cfg.x0.radius);
    }
  }
  return {};
}

Vector measure_series(const Trace& trace, Measure m, const SolutionOracle* oracle) {
  Vector out;
  out.reserve(trace.records.size());
  switch (m) {
    case Measure::FGap:
      for (const IterateRecord& r : trace.records) {
        if (!r.f_gap) throw std::invalid_argument("trace has no f_gap column");
        out.push_back(*r.f_gap);
      }
      break;
    case Measure::Mu:
      for (const IterateRecord& r : trace.records) out.push_back(r.mu);
      break;
    case Measure::DistToSet:
      for (const IterateRecord& r : trace.records) {
        if (r.x && oracle) {
          out.push_back(oracle->distance_to_set(*r.x));
        } else if (r.dist_omega) {
          out.push_back(*r.dist_omega);
        } else {
          throw std::invalid_argument("trace has no dist_omega column");
        }
      }
      break;
    case Measure::IterateDist: {
      if (trace.records.empty()) break;
      for (const IterateRecord& r : trace.records)
        if (!r.x) throw std::invalid_argument("trace has no stored iterates");
      const Vector& last = *trace.records.back().x;
      const Vector xbar = oracle ? oracle->nearest_point(last) : last;
      for (const IterateRecord& r : trace.records) out.push_back(distance(*r.x, xbar));
      break;
    }
  }
  return out;
}

std::vector<Measure> default_measures(Algorithm a) {
  if (a == Algorithm::GD) return {Measure::FGap, Measure::IterateDist};
  return {Measure::FGap, Measure::IterateDist, Measure::Mu, Measure::DistToSet};
}

std::vector<MeasureReport> rate_report(const Trace& trace, std::optional<double> theta,
                                       const std::vector<Measure>& measures, const SolutionOracle* oracle,
                                       double burn_in, const RateTolerances& tol) {
  const RateAlgorithm alg = trace.algorithm == Algorithm::GD ? RateAlgorithm::GD : RateAlgorithm::CR;
  std::vector<MeasureReport> out;
  for (Measure m : measures) {
    MeasureReport row;
    row.measure = m;
    try {
      row.estimate = classify_rate(measure_series(trace, m, oracle), burn_in);
    } catch (const std::invalid_argument& e) {
      row.note = e.what();
      out.push_back(row);
      continue;
    }
    if (theta) {
      try {
        row.predicted = theoretical_rate(*theta, m, alg);
        row.verdict = compare(row.estimate, *row.predicted, tol);
      } catch (const std::invalid_argument& e) {
        row.note = e.what();
      }
    } else {
      row.note = "no KL exponent available";
    }
    out.push_back(row);
  }
  return out;
}

RunSummary summarize(const Trace& trace, const Objective& obj, double burn_in) {
  RunSummary s;
  s.objective = obj.name;
  s.algorithm = trace.algorithm;
  s.termination = trace.termination;
  s.iterations = static_cast<int>(trace.records.size()) - 1;
  const IterateRecord& last = trace.records.back();
  s.final_f = last.f;
  s.final_grad_norm = last.grad_norm;
  s.final_lambda_min = last.lambda_min;
  s.final_mu = last.mu;
  s.path_length = path_length(trace).total;
  s.L = trace.config.L;
  s.M = trace.config.M;
  s.step_size = trace.config.step_size;
  if (obj.kl) s.theta = obj.kl->theta;
  const SolutionOracle* oracle = obj.solution_set ? &*obj.solution_set : nullptr;
  s.rates = rate_report(trace, s.theta, default_measures(trace.algorithm), oracle, burn_in);
  s.dynamics = check_dynamics(trace, s.L, s.M);
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult res{.objective = {}, .x0 = resolve_start(cfg), .trace = {}, .summary = {}};
  res.objective = make_objective(cfg.objective, res.x0);
  const AlgorithmConfig& a = cfg.algorithm;
  const bool record_x = a.record_x.value_or(res.objective.dim <= 50);

  CRConfig cr{.m = a.m, .mu_tol = a.mu_tol, .max_iter = a.max_iter, .record_x = record_x};
  switch (a.kind) {
    case Algorithm::CR: res.trace = run_cr(res.objective, res.x0, cr); break;
    case Algorithm::InexactCR: {
      InexactConfig ic{.base = cr,
                       .c1 = a.c1,
                       .c2 = a.c2,
                       .seed = CounterRng(cfg.seed).split(kPerturbationStream).next_u64(),
                       .retry_shrink = a.retry_shrink};
      res.trace = run_inexact_cr(res.objective, res.x0, ic);
      break;
    }
    case Algorithm::GD: {
      GDConfig gd{.step_size = a.step_size ? *a.step_size : 1.0 / res.objective.gradient_lipschitz.value_or(1.0),
                  .grad_tol = a.grad_tol,
                  .max_iter = a.max_iter,
                  .record_x = record_x,
                  .m = a.m};
      res.trace = run_gd(res.objective, res.x0, gd);
      break;
    }
  }
  res.summary = summarize(res.trace, res.objective, cfg.burn_in);
  return res;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json to_json(const InequalityStats& s) {
  return json{{"checked", s.checked},
              {"violations", s.violations},
              {"worst_slack", s.checked > 0 ? json(s.worst_slack) : json(nullptr)},
              {"worst_index", s.worst_index}};
}

}  // namespace

json to_json(const DynamicsReport& r) {
  return json{{"pass", r.pass},
              {"descent", to_json(r.descent)},
              {"gradient_bound", to_json(r.gradient)},
              {"curvature_bound", to_json(r.curvature)},
              {"mu_bound", to_json(r.mu)}};
}

json to_json(const MeasureReport& r) {
  json est{{"regime", to_string(r.estimate.regime)},
           {"order_q", optional_number(r.estimate.order_q)},
           {"ratio_c", optional_number(r.estimate.ratio_c)},
           {"exponent_alpha", optional_number(r.estimate.exponent_alpha)},
           {"fit_r2", r.estimate.fit_r2},
           {"n_points_used", r.estimate.n_points_used}};
  json out{{"measure", to_string(r.measure)}, {"estimate", est}};
  if (r.predicted) {
    out["predicted"] = json{{"regime", to_string(r.predicted->regime)},
                            {"order", optional_number(r.predicted->order)},
                            {"exponent", optional_number(r.predicted->exponent)}};
  } else {
    out["predicted"] = nullptr;
  }
  if (r.verdict) {
    out["verdict"] = json{{"regime_match", r.verdict->regime_match},
                          {"deviation", optional_number(r.verdict->deviation)},
                          {"within_tolerance", r.verdict->within_tolerance}};
  } else {
    out["verdict"] = nullptr;
  }
  if (!r.note.empty()) out["note"] = r.note;
  return out;
}

json to_json(const RunSummary& s) {
  json rates = json::array();
  for (const MeasureReport& r : s.rates) rates.push_back(to_json(r));
  return json{{"objective", s.objective},
              {"algorithm", to_string(s.algorithm)},
              {"termination", to_string(s.termination)},
              {"iterations", s.iterations},
              {"final", {{"f", s.final_f}, {"grad_norm", s.final_grad_norm}, {"lambda_min", s.final_lambda_min}, {"mu", s.final_mu}}},
              {"path_length", s.path_length},
              {"L", s.L},
              {"M", s.M},
              {"step_size", optional_number(s.step_size)},
              {"theta", optional_number(s.theta)},
              {"rates", rates},
              {"dynamics", to_json(s.dynamics)}};
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string csv = trace_to_csv(result.trace);
  const bool has_x = !result.trace.records.empty() && result.trace.records.front().x.has_value();
  const std::string xs = has_x ? iterates_to_csv(result.trace) : std::string();
  const std::string summary = to_json(result.summary).dump(2) + "\n";

  if (has_x) write_file_atomic(dir / "trace_x.csv", xs);
  write_file_atomic(dir / "trace.csv", csv);
  write_file_atomic(dir / "summary.json", summary);
}

}  // namespace crkl
