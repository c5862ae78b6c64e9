#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crkl/linalg.hpp"
#include "crkl/objectives.hpp"

namespace crkl {

enum class Algorithm { CR, InexactCR, GD };
enum class Termination { MuTol, GradTol, MaxIter, FiniteStop };

std::string_view to_string(Algorithm a);
std::string_view to_string(Termination t);
Algorithm parse_algorithm(std::string_view s);
Termination parse_termination(std::string_view s);

/// Raised by run_gd when f increases on 10 consecutive steps.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CRConfig {
  std::optional<double> m;  // unset: objective hessian_lipschitz if > 0, else 1
  double mu_tol = 1e-10;
  int max_iter = 1000;
  bool record_x = true;
  double subproblem_tol = 1e-10;
};

struct InexactConfig {
  CRConfig base;
  double c1 = 0.0;
  double c2 = 0.0;
  std::uint64_t seed = 0;
  double retry_shrink = 0.01;
  int max_retries = 20;
};

struct GDConfig {
  double step_size = 0.0;
  double grad_tol = 1e-10;
  int max_iter = 10000;
  bool record_x = true;
  std::optional<double> m;  // only used to report mu; same default as CRConfig
};

/// Parameters a trace was produced with.
struct ConfigSnapshot {
  double L = 0.0;
  double M = 1.0;
  std::optional<double> step_size;
  std::optional<double> mu_tol;
  std::optional<double> grad_tol;
  int max_iter = 0;
  std::optional<double> c1;
  std::optional<double> c2;
  std::optional<std::uint64_t> seed;
};

struct IterateRecord {
  int k = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double lambda_min = 0.0;
  double step_norm = 0.0;  // ||x_k - x_{k-1}||, 0 at k = 0
  double mu = 0.0;
  std::optional<double> model_decrease;  // of the step that produced x_k
  std::optional<double> f_gap;
  std::optional<double> dist_omega;
  std::optional<Vector> x;
  // Inexact CR only: ||dg|| / ||s||^2 and ||dH s|| / ||s||^2 for the accepted step.
  std::optional<double> grad_error_ratio;
  std::optional<double> hess_error_ratio;
  int retries = 0;
};

struct Trace {
  std::vector<IterateRecord> records;
  std::string objective_name;
  Algorithm algorithm = Algorithm::CR;
  ConfigSnapshot config;
  Termination termination = Termination::MaxIter;
};

/// max{ sqrt(2 ||g|| / (L + M)), -2 lambda_min / (2L + M) }, clamped at 0.
double mu(double grad_norm, double lambda_min, double L, double M);

/// M used for a run: the configured value, else hessian_lipschitz if positive, else 1.
double resolve_m(const Objective& obj, std::optional<double> m);

Trace run_cr(const Objective& obj, std::span<const double> x0, const CRConfig& cfg);

/// CR on perturbed derivatives. Iteration k draws fixed random directions
/// from (seed, k) and perturbs the gradient by a vector of norm
/// c1 * shrink^j * prev^2 and the Hessian by a rank-one term of operator norm
/// c2 * shrink^j * prev, where prev is the previous step length and j the
/// retry count. A step is accepted once ||dg|| <= c1 ||s||^2 and
/// ||dH s|| <= c2 ||s||^2 hold for the step s actually taken.
Trace run_inexact_cr(const Objective& obj, std::span<const double> x0, const InexactConfig& cfg);

Trace run_gd(const Objective& obj, std::span<const double> x0, const GDConfig& cfg);

}  // namespace crkl
