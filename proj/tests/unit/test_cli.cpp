#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "crkl/cli.hpp"
#include "crkl/experiment.hpp"
#include "crkl/trace_io.hpp"
#include "doctest.h"

using namespace crkl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "crkl");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("crkl_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kNormPower = R"({
  "objective": {"name": "norm_power", "params": {"p": 4, "dim": 3}},
  "algorithm": {"kind": "CR", "mu_tol": 1e-12, "max_iter": 300},
  "x0": [0.6, -0.48, 0.64],
  "seed": 1
})";

}  // namespace

TEST_CASE("config parsing names the offending field") {
  CHECK_NOTHROW(parse_config(kNormPower));
  auto field_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of(R"({"objective": {"name": "rosenbrock"}, "algorithm": {"kind": "CR"}, "x0": "canonical"})") ==
        "objective.name");
  CHECK(field_of(R"({"objective": {"name": "norm_power", "params": {"p": 4, "dim": 2}},
                     "algorithm": {"kind": "CR", "mu_tol": -1}, "x0": "canonical"})") == "algorithm.mu_tol");
  CHECK(field_of(R"({"objective": {"name": "norm_power", "params": {"p": 4, "dim": 2}},
                     "algorithm": {"kind": "CR"}, "x0": "canonical", "colour": 1})") == "colour");
  CHECK(field_of(R"({"objective": )") == "");
}

TEST_CASE("random sphere start is reproducible") {
  const ExperimentConfig cfg = parse_config(R"({
    "objective": {"name": "norm_power", "params": {"p": 2, "dim": 10}},
    "algorithm": {"kind": "CR"},
    "x0": {"random_sphere": {"radius": 2.0, "seed": 7}}})");
  const Vector a = resolve_start(cfg);
  CHECK(norm(a) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(resolve_start(cfg) == a);
}

TEST_CASE("run writes deterministic outputs that validate and report") {
  const fs::path dir = scratch("run");
  write_file_atomic(dir / "cfg.json", kNormPower);
  const Outcome first = invoke({"run", "--config", (dir / "cfg.json").string(), "--out", (dir / "a").string()});
  REQUIRE(first.code == cli::kExitOk);
  const Outcome second = invoke({"run", "--config", (dir / "cfg.json").string(), "--out", (dir / "b").string()});
  REQUIRE(second.code == cli::kExitOk);
  CHECK(read_file(dir / "a" / "trace.csv") == read_file(dir / "b" / "trace.csv"));
  CHECK(read_file(dir / "a" / "trace_x.csv") == read_file(dir / "b" / "trace_x.csv"));
  CHECK(fs::exists(dir / "a" / "summary.json"));

  const std::string trace = (dir / "a" / "trace.csv").string();
  const Outcome ok = invoke({"validate", "--trace", trace, "--objective", "norm_power", "--params",
                             R"({"p": 4, "dim": 3})", "--L", "26.5", "--M", "26.5"});
  CHECK(ok.code == cli::kExitOk);

  const Outcome rep = invoke({"report", "--trace", trace, "--objective", "norm_power", "--params",
                              R"({"p": 4, "dim": 3})", "--measures", "FGap,IterateDist"});
  CHECK(rep.code == cli::kExitOk);
  CHECK(rep.out.find("Sublinear") != std::string::npos);
  const Outcome rep_json = invoke({"report", "--trace", trace, "--theta", "0.25", "--json"});
  CHECK(rep_json.code == cli::kExitOk);
  CHECK(nlohmann::json::parse(rep_json.out).at("rates").is_array());
  fs::remove_all(dir);
}

TEST_CASE("validate flags a tampered trace") {
  const fs::path dir = scratch("tamper");
  write_file_atomic(dir / "cfg.json", kNormPower);
  REQUIRE(invoke({"run", "--config", (dir / "cfg.json").string(), "--out", dir.string()}).code == cli::kExitOk);
  Trace t = trace_from_csv(read_file(dir / "trace.csv"));
  t.records[3].f = t.records[2].f * 2.0;
  write_file_atomic(dir / "bad.csv", trace_to_csv(t));
  const Outcome v = invoke({"validate", "--trace", (dir / "bad.csv").string(), "--objective", "norm_power",
                            "--params", R"({"p": 4, "dim": 3})", "--L", "26.5", "--M", "26.5"});
  CHECK(v.code == cli::kExitValidationFailed);
  fs::remove_all(dir);
}

TEST_CASE("input errors exit with code 2") {
  const fs::path dir = scratch("errors");
  write_file_atomic(dir / "bad.json",
                    R"({"objective": {"name": "rosenbrock"}, "algorithm": {"kind": "CR"}, "x0": "canonical"})");
  const Outcome unknown = invoke({"run", "--config", (dir / "bad.json").string()});
  CHECK(unknown.code == cli::kExitInputError);
  CHECK(unknown.err.find("objective.name") != std::string::npos);

  write_file_atomic(dir / "bad.csv", "k,f\n0,1\n");
  CHECK(invoke({"report", "--trace", (dir / "bad.csv").string()}).code == cli::kExitInputError);
  CHECK(invoke({"run"}).code == cli::kExitInputError);
  CHECK(invoke({"frobnicate"}).code == cli::kExitInputError);

  write_file_atomic(dir / "a.json", kNormPower);
  write_file_atomic(dir / "b.json", R"({
    "objective": {"name": "norm_power", "params": {"p": 3, "dim": 3}},
    "algorithm": {"kind": "CR"}, "x0": [0.6, -0.48, 0.64]})");
  CHECK(invoke({"compare", "--config-a", (dir / "a.json").string(), "--config-b", (dir / "b.json").string()}).code ==
        cli::kExitInputError);
  fs::remove_all(dir);
}

TEST_CASE("compare tabulates CR against GD") {
  const fs::path dir = scratch("compare");
  write_file_atomic(dir / "a.json", R"({
    "objective": {"name": "norm_power", "params": {"p": 4, "dim": 1}},
    "algorithm": {"kind": "CR", "mu_tol": 1e-12}, "x0": [1.0], "output_dir": ")" +
                                        (dir / "a").string() + R"("})");
  write_file_atomic(dir / "b.json", R"({
    "objective": {"name": "norm_power", "params": {"p": 4, "dim": 1}},
    "algorithm": {"kind": "GD", "step_size": "auto", "max_iter": 2000}, "x0": [1.0], "output_dir": ")" +
                                        (dir / "b").string() + R"("})");
  const Outcome c =
      invoke({"compare", "--config-a", (dir / "a.json").string(), "--config-b", (dir / "b.json").string()});
  CHECK(c.code == cli::kExitOk);
  CHECK(c.out.find("FGap") != std::string::npos);
  fs::remove_all(dir);
}
