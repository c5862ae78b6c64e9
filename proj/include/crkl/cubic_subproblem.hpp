#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "crkl/linalg.hpp"

namespace crkl {

/// m(s) = <g, s> + 1/2 s^T H s + (M/6) ||s||^3.
class CubicModel {
 public:
  CubicModel(Vector g, SymmetricMatrix h, double m);

  const Vector& g() const { return g_; }
  const SymmetricMatrix& h() const { return h_; }
  double m() const { return m_; }
  std::size_t dim() const { return g_.size(); }

  double value(std::span<const double> s) const;

 private:
  Vector g_;
  SymmetricMatrix h_;
  double m_;
};

struct SubproblemSolution {
  Vector step;
  double radius = 0.0;           // ||step||
  double shifted_min_eig = 0.0;  // lambda_min(H) + (M/2) radius
  double stationarity_residual = 0.0;
  bool hard_case = false;
  double model_decrease = 0.0;  // -m(step)
  int iterations = 0;           // secular-equation iterations
};

/// Global minimizer of the cubic model.
///
/// H is diagonalized once; the step radius r then solves the secular equation
/// ||(Lambda + (M/2) r I)^{-1} g_hat|| = r on r > max(0, -2 lambda_min / M),
/// found by safeguarded Newton on 1/||s(r)|| - 1/r (increasing in r) with
/// bisection fallback. When g has no component along the lambda_min
/// eigenspace and the shifted system cannot reach the boundary radius, the
/// step is completed along the first lambda_min eigenvector (hard case).
///
/// The returned step satisfies (H + (M/2)||s|| I) s = -g to within
/// tol * max(1, ||g||) with H + (M/2)||s|| I PSD, which certifies global
/// optimality. Throws ConvergenceError if the root finder stalls or the
/// certificate fails; std::invalid_argument if tol is outside (0, 1e-6].
SubproblemSolution solve_exact(const CubicModel& model, double tol = 1e-10);

struct OptimalityCertificate {
  double residual = 0.0;
  double shifted_min_eig = 0.0;
  bool pass = false;
};

OptimalityCertificate verify_optimality(const CubicModel& model, std::span<const double> step,
                                        double tol);

/// Enclosing radius for the global minimizer: 4 sqrt(||g||/M) + 4 ||H||_F / M.
double safe_radius_cap(const CubicModel& model);

/// Minimum of m over `samples` low-discrepancy points of the ball of radius
/// `radius_cap` (test oracle; d <= 5). Deterministic in `seed`.
double brute_force_oracle(const CubicModel& model, double radius_cap, std::size_t samples,
                          std::uint64_t seed);

}  // namespace crkl
