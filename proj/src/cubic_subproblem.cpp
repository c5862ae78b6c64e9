#include "crkl/cubic_subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "crkl/random.hpp"

namespace crkl {

CubicModel::CubicModel(Vector g, SymmetricMatrix h, double m)
    : g_(std::move(g)), h_(std::move(h)), m_(m) {
  if (g_.empty()) throw std::invalid_argument("CubicModel: empty gradient");
  if (h_.dim() != g_.size()) throw std::invalid_argument("CubicModel: dimension mismatch");
  if (!(m_ > 0.0) || !std::isfinite(m_)) throw std::invalid_argument("CubicModel: M must be > 0");
  for (double x : g_)
    if (!std::isfinite(x)) throw std::invalid_argument("CubicModel: non-finite gradient");
}

double CubicModel::value(std::span<const double> s) const {
  const Vector hs = h_.multiply(s);
  const double r = norm(s);
  return dot(g_, s) + 0.5 * dot(s, hs) + m_ / 6.0 * r * r * r;
}

namespace {

constexpr int kMaxIterations = 200;
constexpr double kRootRelTol = 1e-12;
constexpr double kHardCaseTol = 1e-12;

// Eigenbasis data with the secular equation written in the pole distance
// u = lambda_min + (M/2) r, so that shifted eigenvalues gap_i + u keep full
// relative accuracy when the root sits close to the pole.
struct Secular {
  Vector gap;   // lambda_i - lambda_min
  Vector ghat;  // Q^T g
  double lmin;
  double m;

  double radius(double u) const { return 2.0 * (u - lmin) / m; }

  // ||s(u)||, +inf on a pole.
  double step_norm(double u) const {
    Vector s(gap.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (ghat[i] == 0.0) {
        s[i] = 0.0;
        continue;
      }
      const double denom = gap[i] + u;
      if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
      s[i] = ghat[i] / denom;
    }
    return norm(s);
  }

  // d||s||/du = -(1/||s||) sum ghat_i^2 / (gap_i + u)^3
  double step_norm_derivative(double u, double n) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < gap.size(); ++i) {
      if (ghat[i] == 0.0) continue;
      const double q = ghat[i] / (gap[i] + u);
      acc += q * q / (gap[i] + u);
    }
    return -acc / n;
  }
};

struct Root {
  double u;
  int iterations;
};

// Root of h(u) = 1/||s(u)|| - 1/r(u), increasing on (u_lo, u_hi].
Root solve_secular(const Secular& sec, double u_lo, double u_hi) {
  double a = u_lo;
  double b = u_hi;
  double u = u_hi;
  for (int it = 1; it <= kMaxIterations; ++it) {
    const double r = sec.radius(u);
    const double n = sec.step_norm(u);
    if (std::abs(n - r) <= kRootRelTol * r) return {u, it};
    const double h = 1.0 / n - 1.0 / r;
    if (h < 0.0) {
      a = u;
    } else {
      b = u;
    }
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(b)) return {b, it};

    double next = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(n)) {
      const double dn = sec.step_norm_derivative(u, n);
      const double dh = -dn / (n * n) + (2.0 / sec.m) / (r * r);
      if (std::isfinite(dh) && dh > 0.0) next = u - h / dh;
    }
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    u = next;
  }
  throw ConvergenceError("solve_exact: secular equation did not converge in " +
                         std::to_string(kMaxIterations) + " iterations");
}

}  // namespace

SubproblemSolution solve_exact(const CubicModel& model, double tol) {
  if (!(tol > 0.0 && tol <= 1e-6)) throw std::invalid_argument("solve_exact: tol must be in (0, 1e-6]");
  const std::size_t n = model.dim();
  const double m = model.m();
  const double gnorm = norm(model.g());

  const EigenDecomposition e = eigh(model.h());
  const Vector& lambda = e.eigenvalues;
  const Vector ghat = e.eigenvectors.multiply_transposed(model.g());
  const double lmin = lambda.front();

  SubproblemSolution out;
  Vector shat(n, 0.0);

  if (gnorm == 0.0 && lmin >= 0.0) {
    out.step = Vector(n, 0.0);
    out.shifted_min_eig = lmin;
    return out;
  }

  const double r_lo = lmin < 0.0 ? -2.0 * lmin / m : 0.0;
  bool solved = false;

  if (lmin < 0.0) {
    // Hard case: gradient orthogonal to the lambda_min eigenspace and the
    // remaining components cannot reach radius r_lo on their own.
    double lscale = 1.0;
    for (double l : lambda) lscale = std::max(lscale, std::abs(l));
    const double g_tol = kHardCaseTol * std::max(1.0, gnorm);
    std::size_t k_space = 0;
    bool orthogonal = true;
    while (k_space < n && lambda[k_space] - lmin <= kHardCaseTol * lscale) {
      if (std::abs(ghat[k_space]) > g_tol) orthogonal = false;
      ++k_space;
    }
    if (orthogonal) {
      Vector perp(n, 0.0);
      for (std::size_t i = k_space; i < n; ++i) perp[i] = -ghat[i] / (lambda[i] - lmin);
      const double perp_norm = norm(perp);
      if (perp_norm <= r_lo) {
        shat = perp;
        shat[0] = std::sqrt(std::max(0.0, r_lo * r_lo - perp_norm * perp_norm));
        out.hard_case = true;
        solved = true;
      }
    }
  }

  if (!solved) {
    // ||s(u)|| <= ||g|| / u, so u_hi with u_hi (u_hi - lmin) = (M/2) ||g||
    // satisfies ||s(u_hi)|| <= r(u_hi). Written without cancellation.
    const double disc = std::sqrt(lmin * lmin + 2.0 * m * gnorm);
    const double u_hi = lmin >= 0.0 ? lmin + m * gnorm / (lmin + disc) : m * gnorm / (disc - lmin);
    Secular sec{Vector(n), ghat, lmin, m};
    for (std::size_t i = 0; i < n; ++i) sec.gap[i] = lambda[i] - lmin;
    const double u_lo = std::max(0.0, lmin);
    const Root root = solve_secular(sec, u_lo, std::max(u_hi, u_lo));
    out.iterations = root.iterations;
    for (std::size_t i = 0; i < n; ++i) shat[i] = ghat[i] == 0.0 ? 0.0 : -ghat[i] / (sec.gap[i] + root.u);
  }

  out.step = e.eigenvectors.multiply(shat);
  out.radius = norm(out.step);
  const double sigma = 0.5 * m * out.radius;
  out.shifted_min_eig = lmin + sigma;

  // -m(s) = 1/2 s^T (H + sigma I) s + (M/12) r^3 at a stationary point;
  // every term is non-negative in the eigenbasis.
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) quad += std::max(0.0, lambda[i] + sigma) * shat[i] * shat[i];
  out.model_decrease = 0.5 * quad + m / 12.0 * out.radius * out.radius * out.radius;

  Vector res = model.h().multiply(out.step);
  for (std::size_t i = 0; i < n; ++i) res[i] += sigma * out.step[i] + model.g()[i];
  out.stationarity_residual = norm(res);

  if (out.stationarity_residual > tol * std::max(1.0, gnorm) || out.shifted_min_eig < -tol) {
    throw ConvergenceError("solve_exact: optimality certificate failed (residual " +
                           std::to_string(out.stationarity_residual) + ", shifted eigenvalue " +
                           std::to_string(out.shifted_min_eig) + ")");
  }
  return out;
}

OptimalityCertificate verify_optimality(const CubicModel& model, std::span<const double> step,
                                        double tol) {
  if (step.size() != model.dim()) throw std::invalid_argument("verify_optimality: dimension mismatch");
  const double r = norm(step);
  const double sigma = 0.5 * model.m() * r;
  Vector res = model.h().multiply(step);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] += sigma * step[i] + model.g()[i];

  OptimalityCertificate cert;
  cert.residual = norm(res);
  cert.shifted_min_eig = min_eigenvalue(model.h()) + sigma;
  cert.pass = cert.residual <= tol * std::max(1.0, norm(model.g())) && cert.shifted_min_eig >= -tol;
  return cert;
}

double safe_radius_cap(const CubicModel& model) {
  return 4.0 * std::sqrt(norm(model.g()) / model.m()) + 4.0 * model.h().frobenius_norm() / model.m();
}

double brute_force_oracle(const CubicModel& model, double radius_cap, std::size_t samples,
                          std::uint64_t seed) {
  const std::size_t d = model.dim();
  if (d > 5) throw std::invalid_argument("brute_force_oracle: supported for d <= 5 only");
  if (!(radius_cap > 0.0)) throw std::invalid_argument("brute_force_oracle: radius_cap must be > 0");
  if (samples == 0) throw std::invalid_argument("brute_force_oracle: samples must be positive");

  // Per point: 2 * ceil(d/2) coordinates feed Box-Muller directions, one the radius.
  const std::size_t pairs = (d + 1) / 2;
  const KroneckerSequence seq(2 * pairs + 1, seed);
  Vector u(seq.dim());
  Vector dir(2 * pairs);
  Vector s(d);
  const double inv_d = 1.0 / static_cast<double>(d);

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < samples; ++n) {
    seq.point(n, u);
    for (std::size_t k = 0; k < pairs; ++k) {
      const double rad = std::sqrt(-2.0 * std::log(1.0 - u[2 * k]));
      const double ang = 2.0 * std::numbers::pi * u[2 * k + 1];
      dir[2 * k] = rad * std::cos(ang);
      dir[2 * k + 1] = rad * std::sin(ang);
    }
    double dn = 0.0;
    for (std::size_t i = 0; i < d; ++i) dn += dir[i] * dir[i];
    if (dn == 0.0) continue;
    const double scale = radius_cap * std::pow(u[2 * pairs], inv_d) / std::sqrt(dn);
    for (std::size_t i = 0; i < d; ++i) s[i] = dir[i] * scale;
    best = std::min(best, model.value(s));
  }
  return best;
}

}  // namespace crkl
