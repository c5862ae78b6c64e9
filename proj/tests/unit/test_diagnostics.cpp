#include <cmath>

#include "crkl/diagnostics.hpp"
#include "doctest.h"

using namespace crkl;

namespace {

Trace geometric_trace(double c, int n) {
  Trace t;
  for (int k = 0; k < n; ++k) {
    IterateRecord r;
    r.k = k;
    r.x = Vector{std::pow(c, k)};
    r.f = std::pow(c, 2 * k);
    r.grad_norm = 2.0 * std::pow(c, k);
    r.step_norm = k == 0 ? 0.0 : std::pow(c, k - 1) - std::pow(c, k);
    t.records.push_back(r);
  }
  return t;
}

}  // namespace

TEST_CASE("single-record trace passes vacuously") {
  Trace t;
  t.records.push_back(IterateRecord{});
  const DynamicsReport rep = check_dynamics(t, 1.0, 1.0);
  CHECK(rep.pass);
  CHECK(rep.descent.checked == 0);
}

TEST_CASE("fabricated increase is a descent violation") {
  Trace t;
  IterateRecord a, b;
  a.f = 1.0;
  b.k = 1;
  b.f = 2.0;
  b.step_norm = 0.1;
  t.records = {a, b};
  const DynamicsReport rep = check_dynamics(t, 1.0, 1.0);
  CHECK_FALSE(rep.pass);
  CHECK(rep.descent.violations == 1);
  CHECK(rep.descent.worst_index == 1);
  CHECK(rep.descent.worst_slack < 0.0);
}

TEST_CASE("curvature and mu violations are counted") {
  Trace t;
  IterateRecord a, b;
  a.f = 1.0;
  b.k = 1;
  b.f = 0.0;
  b.lambda_min = -5.0;
  b.step_norm = 0.1;
  t.records = {a, b};
  const DynamicsReport rep = check_dynamics(t, 1.0, 1.0);
  CHECK(rep.curvature.violations == 1);
  CHECK(rep.mu.violations == 1);
  CHECK(rep.gradient.violations == 0);
}

TEST_CASE("path length of a geometric trace telescopes") {
  const Trace t = geometric_trace(0.5, 60);
  const PathLength pl = path_length(t);
  CHECK(pl.total == doctest::Approx(1.0 - std::pow(0.5, 59)).epsilon(1e-14));
  for (std::size_t k = 1; k < pl.tail_sums.size(); ++k) CHECK(pl.tail_sums[k] <= pl.tail_sums[k - 1]);
  const Vector& last = *t.records.back().x;
  for (std::size_t k = 0; k < pl.tail_sums.size(); ++k)
    CHECK(pl.tail_sums[k] >= distance(*t.records[k].x, last) * (1.0 - 1e-14));
  Trace still;
  still.records.assign(5, IterateRecord{});
  CHECK(path_length(still).total == 0.0);
}

TEST_CASE("KL fits on synthetic identity-quadratic data") {
  // f = x^2/2 with grad = x: C = 1/2, kappa = 1 at theta = 1/2.
  Trace t;
  for (int k = 0; k < 20; ++k) {
    IterateRecord r;
    r.k = k;
    const double x = std::pow(0.3, k);
    r.x = Vector{x};
    r.f = 0.5 * x * x;
    r.grad_norm = x;
    t.records.push_back(r);
  }
  const SolutionOracle origin{[](std::span<const double> x) { return norm(x); },
                              [](std::span<const double> x) { return Vector(x.size(), 0.0); }, 0.0};
  CHECK(kl_inequality_fit(t, 0.5, 0.0).c_hat == doctest::Approx(0.5).epsilon(1e-14));
  const KLErrorBoundFit eb = kl_error_bound_fit(t, origin, 0.5);
  CHECK(eb.kappa_hat == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eb.theta_used == 0.5);
  // Too small a theta shrinks the ratio along the trace, too large a theta grows it.
  const KLInequalityFit low = kl_inequality_fit(t, 0.1, 0.0);
  CHECK(low.worst_index == 4);
  const KLInequalityFit high = kl_inequality_fit(t, 0.9, 0.0);
  CHECK(high.worst_index == 4 + high.n_used - 1);
}

TEST_CASE("KL fits reject empty tails") {
  Trace t;
  IterateRecord r;
  r.f = 0.0;
  r.grad_norm = 0.0;
  t.records = {r};
  CHECK_THROWS_AS(kl_inequality_fit(t, 0.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(kl_inequality_fit(t, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("step-vs-distance on a stationary trace is vacuous") {
  Trace t;
  IterateRecord r;
  r.x = Vector{0.0};
  t.records = {r};
  const SolutionOracle origin{[](std::span<const double> x) { return norm(x); },
                              [](std::span<const double> x) { return Vector(x.size(), 0.0); }, 0.0};
  CHECK(step_vs_dist_check(t, origin).c_hat == 0.0);
}
