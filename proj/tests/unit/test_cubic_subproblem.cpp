#include <cmath>

#include "crkl/cubic_subproblem.hpp"
#include "crkl/random.hpp"
#include "doctest.h"

using namespace crkl;

namespace {

CubicModel random_model(CounterRng& rng, std::size_t d, double m) {
  Vector g(d);
  for (double& x : g) x = 2.0 * rng.uniform() - 1.0;
  std::vector<double> h(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) h[i * d + j] = h[j * d + i] = 2.0 * rng.uniform() - 1.0;
  return CubicModel(g, SymmetricMatrix(d, h), m);
}

// 1-D model g s + h s^2/2 + m|s|^3/6 with g > 0: the minimizer is s = -t with
// t(h + m t / 2) = g, i.e. t = (-h + sqrt(h^2 + 2 m g)) / m.
double one_d_step(double g, double h, double m) { return -(-h + std::sqrt(h * h + 2.0 * m * g)) / m; }

}  // namespace

TEST_CASE("zero gradient with PSD Hessian returns the origin") {
  const CubicModel model(Vector{0.0, 0.0}, SymmetricMatrix::identity(2), 3.0);
  const SubproblemSolution sol = solve_exact(model);
  CHECK(sol.radius == 0.0);
  CHECK(sol.model_decrease == 0.0);
  CHECK_FALSE(sol.hard_case);
}

TEST_CASE("1-D example against the quadratic formula") {
  const CubicModel model(Vector{1.0}, SymmetricMatrix::identity(1), 1.0);
  const SubproblemSolution sol = solve_exact(model);
  CHECK(sol.step[0] == doctest::Approx(-(std::sqrt(3.0) - 1.0)).epsilon(1e-13));
  CHECK(-sol.model_decrease == doctest::Approx(model.value(sol.step)).epsilon(1e-12));
  // m(-t) = -t + t^2/2 + t^3/6 at t = sqrt(3) - 1.
  const double t = std::sqrt(3.0) - 1.0;
  CHECK(model.value(sol.step) == doctest::Approx(-t + t * t / 2.0 + t * t * t / 6.0).epsilon(1e-13));
  const double sampled = brute_force_oracle(model, safe_radius_cap(model), 100'000, 3);
  CHECK(std::abs(sampled - model.value(sol.step)) < 1e-4);
  CHECK(verify_optimality(model, sol.step, 1e-8).pass);
  CHECK(verify_optimality(model, Vector{-0.7320508}, 1e-6).pass);
}

TEST_CASE("1-D random models against the quadratic formula") {
  CounterRng rng(21);
  for (int t = 0; t < 500; ++t) {
    const double g = 0.01 + rng.uniform();
    const double h = 4.0 * rng.uniform() - 2.0;
    const double m = 0.1 + 5.0 * rng.uniform();
    const SubproblemSolution sol = solve_exact(CubicModel(Vector{g}, SymmetricMatrix::diagonal(Vector{h}), m));
    CHECK(sol.step[0] == doctest::Approx(one_d_step(g, h, m)).epsilon(1e-11));
  }
}

TEST_CASE("hard case example") {
  const Vector diag{-1.0, 1.0};
  const CubicModel model(Vector{0.0, 1.0}, SymmetricMatrix::diagonal(diag), 2.0);
  const SubproblemSolution sol = solve_exact(model);
  CHECK(sol.hard_case);
  CHECK(sol.radius == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(sol.step[0]) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-14));
  CHECK(sol.step[1] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(model.value(sol.step) == doctest::Approx(-5.0 / 12.0).epsilon(1e-14));
  // The sign of the added component follows the eigenvector orientation.
  CHECK(sol.step[0] > 0.0);
  const double sampled = brute_force_oracle(model, safe_radius_cap(model), 1'000'000, 5);
  CHECK(std::abs(sampled - (-5.0 / 12.0)) < 1e-3);
  CHECK(sampled >= -5.0 / 12.0 - 1e-12);
}

TEST_CASE("pure hard case with zero gradient") {
  const Vector diag{-2.0, 3.0, 1.0};
  const CubicModel model(Vector{0.0, 0.0, 0.0}, SymmetricMatrix::diagonal(diag), 4.0);
  const SubproblemSolution sol = solve_exact(model);
  CHECK(sol.hard_case);
  CHECK(sol.radius == doctest::Approx(1.0));  // -2 lambda_min / M
  CHECK(std::abs(sol.step[0]) == doctest::Approx(1.0));
  CHECK(sol.shifted_min_eig == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("verify_optimality rejects a non-stationary step") {
  const CubicModel model(Vector{1.0, 0.0}, SymmetricMatrix::identity(2), 1.0);
  const OptimalityCertificate cert = verify_optimality(model, Vector{0.0, 0.0}, 1e-8);
  CHECK_FALSE(cert.pass);
  CHECK(cert.residual == doctest::Approx(1.0));
}

TEST_CASE("random models: certificate invariants and brute-force comparison") {
  CounterRng rng(77);
  const double ms[] = {0.5, 1.0, 5.0};
  for (int t = 0; t < 60; ++t) {
    const std::size_t d = 1 + static_cast<std::size_t>(t % 5);
    const CubicModel model = random_model(rng, d, ms[t % 3]);
    const SubproblemSolution sol = solve_exact(model);
    CHECK(sol.radius == doctest::Approx(norm(sol.step)).epsilon(1e-12));
    CHECK(sol.stationarity_residual <= 1e-10 * std::max(1.0, norm(model.g())));
    CHECK(sol.shifted_min_eig >= -1e-10);
    CHECK(sol.model_decrease >= 0.0);
    CHECK(-sol.model_decrease == doctest::Approx(model.value(sol.step)).epsilon(1e-9).scale(1.0));
    const double oracle = brute_force_oracle(model, safe_radius_cap(model), 20'000, static_cast<std::uint64_t>(t));
    CHECK(model.value(sol.step) <= oracle + 1e-6 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("scale covariance") {
  CounterRng rng(9);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 1 + static_cast<std::size_t>(t % 6);
    const CubicModel model = random_model(rng, d, 0.5 + rng.uniform());
    const double alpha = std::exp(4.0 * rng.uniform() - 2.0);
    Vector g = model.g();
    for (double& x : g) x *= alpha;
    const CubicModel scaled(g, model.h().scaled(alpha), alpha * model.m());
    const SubproblemSolution a = solve_exact(model);
    const SubproblemSolution b = solve_exact(scaled);
    CHECK(distance(a.step, b.step) <= 1e-9 * std::max(1.0, a.radius));
  }
}

TEST_CASE("easy-case radius is a fixed point of the secular map") {
  CounterRng rng(31);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 1 + static_cast<std::size_t>(t % 5);
    const CubicModel model = random_model(rng, d, 1.0);
    const SubproblemSolution sol = solve_exact(model);
    if (sol.hard_case) continue;
    const EigenDecomposition e = eigh(model.h());
    const Vector s = solve_shifted(e, 0.5 * model.m() * sol.radius, model.g());
    CHECK(std::abs(norm(s) - sol.radius) <= 1e-10 * std::max(1.0, sol.radius));
  }
}

TEST_CASE("near-hard-case gradients stay accurate") {
  for (double eps : {1e-3, 1e-6, 1e-9, 1e-11, 1e-13}) {
    const Vector diag{-1.0, 1.0};
    const CubicModel model(Vector{eps, 1.0}, SymmetricMatrix::diagonal(diag), 2.0);
    const SubproblemSolution sol = solve_exact(model);
    CHECK(verify_optimality(model, sol.step, 1e-9).pass);
    CHECK(model.value(sol.step) <= -5.0 / 12.0 + 1e-9);
  }
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(CubicModel(Vector{1.0}, SymmetricMatrix::identity(2), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(CubicModel(Vector{1.0}, SymmetricMatrix::identity(1), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(CubicModel(Vector{NAN}, SymmetricMatrix::identity(1), 1.0), std::invalid_argument);
  const CubicModel model(Vector{1.0}, SymmetricMatrix::identity(1), 1.0);
  CHECK_THROWS_AS(solve_exact(model, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(solve_exact(model, 0.0), std::invalid_argument);
  const CubicModel big(Vector(6, 1.0), SymmetricMatrix::identity(6), 1.0);
  CHECK_THROWS_AS(brute_force_oracle(big, 1.0, 10, 0), std::invalid_argument);
}

TEST_CASE("brute-force oracle on a zero-gradient PSD model") {
  const CubicModel model(Vector{0.0, 0.0, 0.0}, SymmetricMatrix::identity(3), 1.0);
  const double v = brute_force_oracle(model, 2.0, 50'000, 1);
  CHECK(v >= 0.0);
  CHECK(v < 1e-2);
  CHECK(brute_force_oracle(model, 2.0, 1000, 4) == brute_force_oracle(model, 2.0, 1000, 4));
}
