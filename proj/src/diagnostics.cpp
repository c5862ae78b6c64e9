#include "crkl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace crkl {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void record_check(InequalityStats& st, double observed, double bound, double allowance, int k) {
  const double slack = bound + allowance - observed;
  if (st.checked == 0 || slack < st.worst_slack) {
    st.worst_slack = slack;
    st.worst_index = k;
  }
  ++st.checked;
  if (!(slack >= 0.0)) ++st.violations;
}

std::size_t tail_start(const Trace& trace, double burn_in) {
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw std::invalid_argument("burn_in must be in [0, 1)");
  return static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(trace.records.size())));
}

std::optional<double> distance_at(const IterateRecord& r, const SolutionOracle& oracle) {
  if (r.x) return oracle.distance_to_set(*r.x);
  return r.dist_omega;
}

}  // namespace

DynamicsReport check_dynamics(const Trace& trace, double L, double M, double tol) {
  DynamicsReport rep;
  const bool gd = trace.algorithm == Algorithm::GD;
  if (gd && !trace.config.step_size) {
    throw std::invalid_argument("check_dynamics: GD trace carries no step size");
  }
  if (!gd && (!(L >= 0.0) || !(M > 0.0))) throw std::invalid_argument("check_dynamics: need L >= 0, M > 0");

  for (std::size_t i = 0; i + 1 < trace.records.size(); ++i) {
    const IterateRecord& a = trace.records[i];
    const IterateRecord& b = trace.records[i + 1];
    const double s = b.step_norm;
    const int k = b.k;

    const double descent_bound = gd ? -s * s / (2.0 * *trace.config.step_size) : -(M / 12.0) * s * s * s;
    record_check(rep.descent, b.f - a.f, descent_bound, tol * std::max(1.0, std::abs(a.f)), k);
    if (gd) continue;

    const double g_bound = 0.5 * (L + M) * s * s;
    record_check(rep.gradient, b.grad_norm, g_bound, tol * std::max(1.0, g_bound), k);
    const double c_bound = 0.5 * (2.0 * L + M) * s;
    record_check(rep.curvature, -b.lambda_min, c_bound, tol * std::max(1.0, c_bound), k);
    record_check(rep.mu, mu(b.grad_norm, b.lambda_min, L, M), s, tol * std::max(1.0, s), k);
  }
  rep.pass = rep.descent.violations == 0 && rep.gradient.violations == 0 &&
             rep.curvature.violations == 0 && rep.mu.violations == 0;
  return rep;
}

PathLength path_length(const Trace& trace) {
  PathLength out;
  const std::size_t n = trace.records.size();
  out.tail_sums.assign(n, 0.0);
  for (std::size_t k = n; k-- > 1;) out.tail_sums[k - 1] = out.tail_sums[k] + trace.records[k].step_norm;
  out.total = n > 0 ? out.tail_sums[0] : 0.0;
  return out;
}

KLInequalityFit kl_inequality_fit(const Trace& trace, double theta, double f_star, double burn_in) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("kl_inequality_fit: theta must be in (0, 1)");
  const double f_floor = 1e2 * kEps * std::max(1.0, std::abs(f_star));
  const double power = 1.0 / (1.0 - theta);
  KLInequalityFit fit;
  for (std::size_t i = tail_start(trace, burn_in); i < trace.records.size(); ++i) {
    const IterateRecord& r = trace.records[i];
    const double gap = r.f - f_star;
    if (gap <= f_floor || r.grad_norm <= 1e2 * kEps) continue;
    const double ratio = gap / std::pow(r.grad_norm, power);
    if (fit.n_used == 0 || ratio > fit.c_hat) {
      fit.c_hat = ratio;
      fit.worst_index = r.k;
    }
    ++fit.n_used;
  }
  if (fit.n_used == 0) throw std::domain_error("kl_inequality_fit: no iterate left after burn-in and floors");
  return fit;
}

KLErrorBoundFit kl_error_bound_fit(const Trace& trace, const SolutionOracle& oracle, double theta,
                                   double burn_in) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("kl_error_bound_fit: theta must be in (0, 1)");
  const double power = theta / (1.0 - theta);
  KLErrorBoundFit fit;
  fit.theta_used = theta;
  for (std::size_t i = tail_start(trace, burn_in); i < trace.records.size(); ++i) {
    const IterateRecord& r = trace.records[i];
    const std::optional<double> dist = distance_at(r, oracle);
    if (!dist) throw std::invalid_argument("kl_error_bound_fit: trace has neither iterates nor dist_omega");
    if (r.grad_norm <= 1e2 * kEps) continue;
    const double ratio = *dist / std::pow(r.grad_norm, power);
    if (fit.n_used == 0 || ratio > fit.kappa_hat) {
      fit.kappa_hat = ratio;
      fit.worst_ratio_index = r.k;
    }
    ++fit.n_used;
  }
  if (fit.n_used == 0) throw std::domain_error("kl_error_bound_fit: no iterate left after burn-in and floors");
  return fit;
}

StepDistFit step_vs_dist_check(const Trace& trace, const SolutionOracle& oracle, double burn_in) {
  StepDistFit fit;
  for (std::size_t i = tail_start(trace, burn_in); i + 1 < trace.records.size(); ++i) {
    const IterateRecord& r = trace.records[i];
    const std::optional<double> dist = distance_at(r, oracle);
    if (!dist) throw std::invalid_argument("step_vs_dist_check: trace has neither iterates nor dist_omega");
    if (*dist <= 1e2 * kEps) continue;
    const double ratio = trace.records[i + 1].step_norm / *dist;
    if (fit.n_used == 0 || ratio > fit.c_hat) {
      fit.c_hat = ratio;
      fit.worst_index = r.k;
    }
    ++fit.n_used;
  }
  return fit;
}

}  // namespace crkl
