#include "crkl/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "crkl/cubic_subproblem.hpp"
#include "crkl/random.hpp"

namespace crkl {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::CR: return "CR";
    case Algorithm::InexactCR: return "InexactCR";
    case Algorithm::GD: return "GD";
  }
  return "?";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::MuTol: return "MuTol";
    case Termination::GradTol: return "GradTol";
    case Termination::MaxIter: return "MaxIter";
    case Termination::FiniteStop: return "FiniteStop";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "CR") return Algorithm::CR;
  if (s == "InexactCR") return Algorithm::InexactCR;
  if (s == "GD") return Algorithm::GD;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

Termination parse_termination(std::string_view s) {
  if (s == "MuTol") return Termination::MuTol;
  if (s == "GradTol") return Termination::GradTol;
  if (s == "MaxIter") return Termination::MaxIter;
  if (s == "FiniteStop") return Termination::FiniteStop;
  throw std::invalid_argument("unknown termination '" + std::string(s) + "'");
}

double mu(double grad_norm, double lambda_min, double L, double M) {
  if (!(L >= 0.0) || !(M > 0.0) || !(grad_norm >= 0.0)) {
    throw std::invalid_argument("mu: need L >= 0, M > 0, grad_norm >= 0");
  }
  const double first = std::sqrt(2.0 / (L + M) * grad_norm);
  const double second = -2.0 / (2.0 * L + M) * lambda_min;
  return std::max({0.0, first, second});
}

double resolve_m(const Objective& obj, std::optional<double> m) {
  if (m) {
    if (!(*m > 0.0) || !std::isfinite(*m)) throw std::invalid_argument("M must be a finite value > 0");
    return *m;
  }
  return obj.hessian_lipschitz > 0.0 ? obj.hessian_lipschitz : 1.0;
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Evaluation {
  IterateRecord record;
  Vector g;
  SymmetricMatrix h;
};

Evaluation evaluate(const Objective& obj, const Vector& x, int k, double step_norm, double L,
                    double M, bool record_x) {
  Evaluation ev;
  IterateRecord& r = ev.record;
  r.k = k;
  r.f = obj.value(x);
  if (!std::isfinite(r.f)) {
    throw std::runtime_error("non-finite objective value at iteration " + std::to_string(k));
  }
  ev.g = obj.gradient(x);
  ev.h = obj.hessian(x);
  r.grad_norm = norm(ev.g);
  r.lambda_min = min_eigenvalue(ev.h);
  r.step_norm = step_norm;
  r.mu = mu(r.grad_norm, r.lambda_min, L, M);
  if (obj.f_star) r.f_gap = r.f - *obj.f_star;
  if (obj.solution_set) r.dist_omega = obj.solution_set->distance_to_set(x);
  if (record_x) r.x = x;
  return ev;
}

void check_start(const Objective& obj, std::span<const double> x0) {
  if (x0.size() != obj.dim) {
    throw std::invalid_argument("x0 has dimension " + std::to_string(x0.size()) + ", objective " +
                                obj.name + " expects " + std::to_string(obj.dim));
  }
  for (double v : x0)
    if (!std::isfinite(v)) throw std::invalid_argument("x0 has a non-finite entry");
}

void check_cr_config(const CRConfig& cfg) {
  if (!(cfg.mu_tol > 0.0)) throw std::invalid_argument("mu_tol must be > 0");
  if (cfg.max_iter < 0) throw std::invalid_argument("max_iter must be >= 0");
}

SubproblemSolution solve_step(const Evaluation& ev, double M, double tol, int k) {
  try {
    return solve_exact(CubicModel(ev.g, ev.h, M), tol);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("iteration " + std::to_string(k) + ": " + e.what());
  }
}

// Solve the perturbed model, shrinking the perturbation until the
// a-posteriori criteria hold for the step it produced.
SubproblemSolution solve_inexact_step(const Evaluation& ev, double M, const InexactConfig& cfg,
                                      int k, double prev, IterateRecord& accepted) {
  const std::size_t d = ev.g.size();
  CounterRng rng = CounterRng(cfg.seed).split(static_cast<std::uint64_t>(k));
  const Vector ug = rng.unit_vector(d);
  const Vector uh = rng.unit_vector(d);
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;

  double scale = 1.0;
  for (int retry = 0; retry <= cfg.max_retries; ++retry, scale *= cfg.retry_shrink) {
    const double g_mag = cfg.c1 * scale * prev * prev;
    const double h_mag = cfg.c2 * scale * prev;
    Vector g = ev.g;
    if (g_mag > 0.0)
      for (std::size_t i = 0; i < d; ++i) g[i] += g_mag * ug[i];
    const SymmetricMatrix h = h_mag > 0.0 ? ev.h.plus_rank_one(sign * h_mag, uh) : ev.h;

    SubproblemSolution sol;
    try {
      sol = solve_exact(CubicModel(std::move(g), h, M), cfg.base.subproblem_tol);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("iteration " + std::to_string(k) + ": " + e.what());
    }

    const double s2 = sol.radius * sol.radius;
    const double g_err = g_mag;
    const double h_err = h_mag * std::abs(dot(uh, sol.step));
    if (g_err <= cfg.c1 * s2 && h_err <= cfg.c2 * s2) {
      accepted.grad_error_ratio = s2 > 0.0 ? g_err / s2 : 0.0;
      accepted.hess_error_ratio = s2 > 0.0 ? h_err / s2 : 0.0;
      accepted.retries = retry;
      return sol;
    }
  }
  throw ConvergenceError("iteration " + std::to_string(k) + ": inexactness criteria still violated after " +
                         std::to_string(cfg.max_retries) + " retries");
}

Trace cr_loop(const Objective& obj, std::span<const double> x0, const CRConfig& cfg,
              const InexactConfig* inexact) {
  check_start(obj, x0);
  check_cr_config(cfg);
  const double L = obj.hessian_lipschitz;
  const double M = resolve_m(obj, cfg.m);

  Trace trace;
  trace.objective_name = obj.name;
  trace.algorithm = inexact ? Algorithm::InexactCR : Algorithm::CR;
  trace.config.L = L;
  trace.config.M = M;
  trace.config.mu_tol = cfg.mu_tol;
  trace.config.max_iter = cfg.max_iter;
  if (inexact) {
    trace.config.c1 = inexact->c1;
    trace.config.c2 = inexact->c2;
    trace.config.seed = inexact->seed;
  }

  Vector x(x0.begin(), x0.end());
  Evaluation ev = evaluate(obj, x, 0, 0.0, L, M, cfg.record_x);
  trace.records.push_back(ev.record);

  for (int k = 0;; ++k) {
    const IterateRecord& cur = trace.records.back();
    if (cur.mu <= cfg.mu_tol) {
      trace.termination = Termination::MuTol;
      return trace;
    }
    if (k >= cfg.max_iter) {
      trace.termination = Termination::MaxIter;
      return trace;
    }

    IterateRecord inexact_info;
    const SubproblemSolution sol =
        inexact ? solve_inexact_step(ev, M, *inexact, k, cur.step_norm, inexact_info)
                : solve_step(ev, M, cfg.subproblem_tol, k);
    if (sol.radius <= 1e2 * kEps * std::max(1.0, norm(x))) {
      trace.termination = Termination::FiniteStop;
      return trace;
    }

    for (std::size_t i = 0; i < x.size(); ++i) x[i] += sol.step[i];
    ev = evaluate(obj, x, k + 1, sol.radius, L, M, cfg.record_x);
    ev.record.model_decrease = sol.model_decrease;
    if (inexact) {
      ev.record.grad_error_ratio = inexact_info.grad_error_ratio;
      ev.record.hess_error_ratio = inexact_info.hess_error_ratio;
      ev.record.retries = inexact_info.retries;
    }
    trace.records.push_back(ev.record);
  }
}

}  // namespace

Trace run_cr(const Objective& obj, std::span<const double> x0, const CRConfig& cfg) {
  return cr_loop(obj, x0, cfg, nullptr);
}

Trace run_inexact_cr(const Objective& obj, std::span<const double> x0, const InexactConfig& cfg) {
  if (!(cfg.c1 >= 0.0) || !(cfg.c2 >= 0.0)) throw std::invalid_argument("c1 and c2 must be >= 0");
  if (!(cfg.retry_shrink > 0.0 && cfg.retry_shrink < 1.0)) {
    throw std::invalid_argument("retry_shrink must be in (0, 1)");
  }
  if (cfg.max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  return cr_loop(obj, x0, cfg.base, &cfg);
}

Trace run_gd(const Objective& obj, std::span<const double> x0, const GDConfig& cfg) {
  check_start(obj, x0);
  if (!(cfg.step_size > 0.0) || !std::isfinite(cfg.step_size)) {
    throw std::invalid_argument("step_size must be a finite value > 0");
  }
  if (!(cfg.grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be > 0");
  if (cfg.max_iter < 0) throw std::invalid_argument("max_iter must be >= 0");
  const double L = obj.hessian_lipschitz;
  const double M = resolve_m(obj, cfg.m);

  Trace trace;
  trace.objective_name = obj.name;
  trace.algorithm = Algorithm::GD;
  trace.config.L = L;
  trace.config.M = M;
  trace.config.step_size = cfg.step_size;
  trace.config.grad_tol = cfg.grad_tol;
  trace.config.max_iter = cfg.max_iter;

  Vector x(x0.begin(), x0.end());
  Evaluation ev = evaluate(obj, x, 0, 0.0, L, M, cfg.record_x);
  trace.records.push_back(ev.record);

  int increases = 0;
  for (int k = 0;; ++k) {
    const IterateRecord& cur = trace.records.back();
    if (cur.grad_norm <= cfg.grad_tol) {
      trace.termination = Termination::GradTol;
      return trace;
    }
    if (k >= cfg.max_iter) {
      trace.termination = Termination::MaxIter;
      return trace;
    }
    const double f_prev = cur.f;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= cfg.step_size * ev.g[i];
    ev = evaluate(obj, x, k + 1, cfg.step_size * norm(ev.g), L, M, cfg.record_x);
    trace.records.push_back(ev.record);

    increases = ev.record.f > f_prev ? increases + 1 : 0;
    if (increases >= 10) {
      throw DivergenceError("gradient descent diverging: f increased on 10 consecutive steps (iteration " +
                            std::to_string(k + 1) + ")");
    }
  }
}

}  // namespace crkl
