#include <cmath>

#include "crkl/diagnostics.hpp"
#include "crkl/optimizer.hpp"
#include "crkl/random.hpp"
#include "doctest.h"

using namespace crkl;

namespace {

Objective unit_quadratic(std::size_t d) { return quadratic(SymmetricMatrix::identity(d), Vector(d, 0.0)); }

bool same_records(const Trace& a, const Trace& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const IterateRecord& x = a.records[i];
    const IterateRecord& y = b.records[i];
    if (x.f != y.f || x.grad_norm != y.grad_norm || x.lambda_min != y.lambda_min || x.step_norm != y.step_norm ||
        x.mu != y.mu || x.model_decrease != y.model_decrease || x.x != y.x)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("mu examples") {
  CHECK(mu(0.0, 0.7, 1.0, 1.0) == 0.0);
  CHECK(mu(0.0, 0.7, 5.0, 0.1) == 0.0);
  CHECK(mu(0.5, 1.0, 1.0, 1.0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(mu(0.0, -0.3, 1.0, 1.0) == doctest::Approx(0.2));
  CHECK(mu(1e-3, -1e-5, 2.0, 3.0) > 0.0);
  CHECK_THROWS_AS(mu(1.0, 0.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(mu(1.0, 0.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("CR on x^2/2 from 1 with M=1 lands at 2 - sqrt(3)") {
  const Objective q = unit_quadratic(1);
  CRConfig cfg;
  cfg.m = 1.0;
  cfg.max_iter = 1;
  const Trace t = run_cr(q, Vector{1.0}, cfg);
  REQUIRE(t.records.size() == 2);
  CHECK((*t.records[1].x)[0] == doctest::Approx(2.0 - std::sqrt(3.0)).epsilon(1e-14));
  CHECK(t.termination == Termination::MaxIter);
}

TEST_CASE("stationary start stops at k=0") {
  const Objective q = unit_quadratic(3);
  const Trace t = run_cr(q, Vector(3, 0.0), CRConfig{});
  CHECK(t.records.size() == 1);
  CHECK(t.termination == Termination::MuTol);
  GDConfig gd;
  gd.step_size = 0.5;
  const Trace g = run_gd(q, Vector(3, 0.0), gd);
  CHECK(g.records.size() == 1);
  CHECK(g.termination == Termination::GradTol);
}

TEST_CASE("CR on |x|^3 is an exact geometric sequence") {
  // f = |x|^3, L = M = 6: r^2 + 2 x r - x^2 = 0, so x_{k+1} = x_k (2 - sqrt 2).
  const Objective obj = norm_power(3.0, 1, 1.0);
  CHECK(obj.hessian_lipschitz == doctest::Approx(6.0));
  const double c = 1.0 - (-1.0 + std::sqrt(2.0));
  CRConfig cfg;
  cfg.mu_tol = 1e-12;
  const Trace t = run_cr(obj, Vector{1.0}, cfg);
  CHECK(t.termination == Termination::MuTol);
  for (std::size_t k = 1; k < t.records.size(); ++k) {
    const double ratio = (*t.records[k].x)[0] / (*t.records[k - 1].x)[0];
    CHECK(std::abs(ratio - c) <= 1e-12);
  }
  const PathLength pl = path_length(t);
  // Monotone iterates: the tail sum telescopes to x_k - x_N.
  const double x_last = (*t.records.back().x)[0];
  for (std::size_t k = 0; k < pl.tail_sums.size(); ++k) {
    CHECK(pl.tail_sums[k] == doctest::Approx((*t.records[k].x)[0] - x_last).epsilon(1e-12));
  }
  const StepDistFit sd = step_vs_dist_check(t, *obj.solution_set, 0.0);
  CHECK(sd.c_hat == doctest::Approx(1.0 - c).epsilon(1e-10));
}

TEST_CASE("CR traces satisfy the per-step inequalities") {
  CounterRng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(trial % 5);
    const Vector x0 = rng.point_on_sphere(d, 0.5 + rng.uniform());
    for (double p : {2.0, 3.0, 4.0}) {
      const Objective obj = norm_power(p, d, norm(x0));
      CRConfig cfg;
      cfg.max_iter = 300;
      cfg.mu_tol = 1e-12;
      const Trace t = run_cr(obj, x0, cfg);
      const DynamicsReport rep = check_dynamics(t, obj.hessian_lipschitz, t.config.M);
      CHECK(rep.pass);
      for (std::size_t k = 1; k < t.records.size(); ++k) CHECK(t.records[k].f <= t.records[k - 1].f);
    }
    const Objective dw = double_well(d + 1, 0.25 + 0.5 * d);
    Vector y0 = rng.point_on_sphere(d + 1, 0.5);
    const Objective dwl = double_well(d + 1, dw.value(y0));
    const Trace t = run_cr(dwl, y0, CRConfig{});
    CHECK(check_dynamics(t, dwl.hessian_lipschitz, t.config.M).pass);
  }
}

TEST_CASE("CR escapes the double-well saddle") {
  Vector x0(5, 1.0);
  x0[0] = 1e-3;
  const Objective probe = double_well(5);
  const Objective dw = double_well(5, probe.value(x0));
  CRConfig cfg;
  cfg.mu_tol = 1e-8;
  const Trace t = run_cr(dw, x0, cfg);
  CHECK(t.termination == Termination::MuTol);
  CHECK(t.records.back().lambda_min >= 0.9);
  CHECK(std::abs((*t.records.back().x)[0]) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("inexact CR with zero constants reproduces CR bitwise") {
  const Objective obj = norm_power(4.0, 3, 1.0);
  const Vector x0{0.6, -0.5, 0.2};
  CRConfig base;
  base.max_iter = 200;
  InexactConfig ic;
  ic.base = base;
  ic.seed = 99;
  const Trace a = run_cr(obj, x0, base);
  const Trace b = run_inexact_cr(obj, x0, ic);
  CHECK(same_records(a, b));
  CHECK(a.termination == b.termination);
}

TEST_CASE("inexact CR accepted steps satisfy the a-posteriori criteria") {
  const Objective q = unit_quadratic(4);
  InexactConfig ic;
  ic.base.m = 1.0;
  ic.base.mu_tol = 1e-9;
  ic.c1 = 0.1;
  ic.c2 = 0.1;
  ic.seed = 5;
  const Trace t = run_inexact_cr(q, Vector{1.0, -1.0, 0.5, 0.2}, ic);
  CHECK(t.termination == Termination::MuTol);
  for (std::size_t k = 1; k < t.records.size(); ++k) {
    REQUIRE(t.records[k].grad_error_ratio.has_value());
    CHECK(*t.records[k].grad_error_ratio <= 0.1);
    CHECK(*t.records[k].hess_error_ratio <= 0.1);
  }
  const Trace again = run_inexact_cr(q, Vector{1.0, -1.0, 0.5, 0.2}, ic);
  CHECK(same_records(t, again));
}

TEST_CASE("GD on the identity quadratic halves the iterate") {
  const Objective q = unit_quadratic(2);
  GDConfig cfg;
  cfg.step_size = 0.5;
  cfg.max_iter = 30;
  const Trace t = run_gd(q, Vector{1.0, 0.0}, cfg);
  for (std::size_t k = 0; k < t.records.size(); ++k) {
    CHECK((*t.records[k].x)[0] == std::ldexp(1.0, -static_cast<int>(k)));
    CHECK((*t.records[k].x)[1] == 0.0);
  }
  CHECK(check_dynamics(t, 0.0, 1.0).pass);
}

TEST_CASE("GD descent inequality holds with step 1/L_grad") {
  const Objective obj = norm_power(4.0, 3, 1.0);
  GDConfig cfg;
  cfg.step_size = 1.0 / *obj.gradient_lipschitz;
  cfg.max_iter = 500;
  const Trace t = run_gd(obj, Vector{0.6, 0.0, -0.8}, cfg);
  CHECK(check_dynamics(t, obj.hessian_lipschitz, 1.0).pass);
}

TEST_CASE("GD divergence is detected") {
  const Objective q = unit_quadratic(1);
  GDConfig cfg;
  cfg.step_size = 3.0;
  CHECK_THROWS_AS(run_gd(q, Vector{1.0}, cfg), DivergenceError);
}

TEST_CASE("configuration and input checks") {
  const Objective q = unit_quadratic(2);
  CHECK_THROWS_AS(run_cr(q, Vector{1.0}, CRConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(run_cr(q, Vector{1.0, NAN}, CRConfig{}), std::invalid_argument);
  CRConfig bad;
  bad.mu_tol = 0.0;
  CHECK_THROWS_AS(run_cr(q, Vector{1.0, 1.0}, bad), std::invalid_argument);
  InexactConfig ic;
  ic.c1 = -1.0;
  CHECK_THROWS_AS(run_inexact_cr(q, Vector{1.0, 1.0}, ic), std::invalid_argument);
  GDConfig gd;
  CHECK_THROWS_AS(run_gd(q, Vector{1.0, 1.0}, gd), std::invalid_argument);
  CHECK(resolve_m(q, std::nullopt) == 1.0);
  CHECK(resolve_m(norm_power(3.0, 1), std::nullopt) == doctest::Approx(6.0));
  CHECK(resolve_m(q, 2.5) == 2.5);
}

TEST_CASE("runs are deterministic") {
  const Objective obj = norm_power(4.0, 5, 1.0);
  const Vector x0(5, 1.0 / std::sqrt(5.0));
  CRConfig cfg;
  cfg.max_iter = 500;
  CHECK(same_records(run_cr(obj, x0, cfg), run_cr(obj, x0, cfg)));
}
