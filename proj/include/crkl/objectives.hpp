#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crkl/linalg.hpp"

namespace crkl {

using ScalarFn = std::function<double(std::span<const double>)>;
using VectorFn = std::function<Vector(std::span<const double>)>;
using HessianFn = std::function<SymmetricMatrix(std::span<const double>)>;

/// KL exponent theta in (0, 1], with the constant C of
/// f(x) - f_omega <= C ||grad f(x)||^{1/(1-theta)} when it is known in closed form.
struct KLSpec {
  double theta = 0.5;
  std::optional<double> c_hint;
};

/// Set of second-order stationary points the iterates converge to.
struct SolutionOracle {
  ScalarFn distance_to_set;
  VectorFn nearest_point;
  double f_omega = 0.0;
};

/// f, grad f and Hess f plus the metadata the diagnostics need.
///
/// `hessian_lipschitz` is valid in Frobenius norm (hence also in operator
/// norm) on the level set the objective was built for; `gradient_lipschitz`
/// likewise bounds the Hessian spectrum there and sets the GD step size.
struct Objective {
  std::string name;
  std::size_t dim = 0;
  ScalarFn value;
  VectorFn gradient;
  HessianFn hessian;
  double hessian_lipschitz = 0.0;
  std::optional<double> gradient_lipschitz;
  std::optional<KLSpec> kl;
  std::optional<double> f_star;
  std::optional<SolutionOracle> solution_set;
};

/// f(x) = ||x||^p. Lipschitz constants hold on the ball ||x|| <= level_radius.
/// p must be 2 or at least 3: for 2 < p < 3 the Hessian is not Lipschitz at 0.
Objective norm_power(double p, std::size_t dim, double level_radius = 1.0);

/// f(x) = 1/2 x^T A x - b^T x with A positive definite.
Objective quadratic(const SymmetricMatrix& a, Vector b);

/// f(x) = 1/4 (x_1^2 - 1)^2 + 1/2 sum_{i>=2} x_i^2. Strict saddle at 0,
/// minimizers at +-e_1. Lipschitz constants hold on {f <= level_value}.
Objective double_well(std::size_t dim, double level_value = 0.25);

/// Name plus numeric parameter lists, as read from an experiment config.
struct ObjectiveSpec {
  std::string name;
  std::map<std::string, std::vector<double>> params;

  bool operator==(const ObjectiveSpec&) const = default;
};

/// Registry entry point: builds the named objective with constants valid on
/// the initial level set of x0. Throws std::invalid_argument naming the
/// offending field on unknown names or bad parameters.
Objective make_objective(const ObjectiveSpec& spec, std::span<const double> x0);

/// Dimension implied by a spec, without building the objective.
std::size_t objective_dimension(const ObjectiveSpec& spec);

/// Natural starting point for the named objective.
Vector canonical_start(const ObjectiveSpec& spec);

/// Max over coordinates of |central difference - analytic gradient|.
double check_gradient(const Objective& obj, std::span<const double> x, double h);

/// Max over entries of |central difference of the analytic gradient - analytic Hessian|.
double check_hessian(const Objective& obj, std::span<const double> x, double h);

}  // namespace crkl
