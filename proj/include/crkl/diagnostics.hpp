#pragma once

#include "crkl/objectives.hpp"
#include "crkl/optimizer.hpp"

namespace crkl {

struct InequalityStats {
  int checked = 0;
  int violations = 0;
  double worst_slack = 0.0;  // min over pairs of (bound + tolerance - observed); < 0 on violation
  int worst_index = -1;      // k of x_{k+1} at the worst slack
};

struct DynamicsReport {
  InequalityStats descent;
  InequalityStats gradient;
  InequalityStats curvature;
  InequalityStats mu;
  bool pass = true;
};

/// Per-step inequalities for every consecutive pair (x_k, x_{k+1}), s = ||x_{k+1} - x_k||:
///   CR   f_{k+1} - f_k <= -(M/12) s^3
///        ||g_{k+1}||    <= (L+M)/2 s^2
///        -lambda_{k+1}  <= (2L+M)/2 s
///        mu(x_{k+1})    <= s
///   GD   f_{k+1} - f_k <= -s^2 / (2 step_size)   (step_size from the trace config)
/// Each bound is relaxed by tol * max(1, |reference|), the reference being
/// f_k for descent and the bound itself otherwise. mu is recomputed from L, M.
DynamicsReport check_dynamics(const Trace& trace, double L, double M, double tol = 1e-10);

struct PathLength {
  double total = 0.0;
  Vector tail_sums;  // tail_sums[k] = sum_{i >= k} ||x_{i+1} - x_i||
};

PathLength path_length(const Trace& trace);

struct KLInequalityFit {
  double c_hat = 0.0;
  int worst_index = -1;
  int n_used = 0;
};

/// C = max over the tail of (f - f_star) / ||grad f||^{1/(1-theta)}.
/// Iterates with f - f_star <= 1e2 eps max(1, |f_star|) or ||grad f|| <= 1e2 eps
/// are skipped; std::domain_error if nothing is left.
KLInequalityFit kl_inequality_fit(const Trace& trace, double theta, double f_star, double burn_in = 0.2);

struct KLErrorBoundFit {
  double kappa_hat = 0.0;
  int worst_ratio_index = -1;
  double theta_used = 0.0;
  int n_used = 0;
};

/// kappa = max over the tail of dist(x_k, Omega) / ||grad f||^{theta/(1-theta)}.
/// Distances come from the oracle when iterates are stored, else from the
/// recorded dist_omega column.
KLErrorBoundFit kl_error_bound_fit(const Trace& trace, const SolutionOracle& oracle, double theta,
                                   double burn_in = 0.2);

struct StepDistFit {
  double c_hat = 0.0;
  int worst_index = -1;
  int n_used = 0;
};

/// max over the tail of ||x_{k+1} - x_k|| / dist(x_k, Omega); 0 when no step was taken.
StepDistFit step_vs_dist_check(const Trace& trace, const SolutionOracle& oracle, double burn_in = 0.2);

}  // namespace crkl
