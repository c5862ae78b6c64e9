#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace crkl {

enum class Regime { Finite, Superlinear, Linear, Sublinear, Inconclusive };
enum class Measure { FGap, IterateDist, Mu, DistToSet };
enum class RateAlgorithm { CR, GD };

std::string_view to_string(Regime r);
std::string_view to_string(Measure m);
Measure parse_measure(std::string_view s);

struct RateEstimate {
  Regime regime = Regime::Inconclusive;
  std::optional<double> order_q;         // Superlinear
  std::optional<double> ratio_c;         // Linear
  std::optional<double> exponent_alpha;  // Sublinear
  double fit_r2 = 0.0;                   // Linear / Sublinear regressions
  int n_points_used = 0;
};

/// Values at or below this are treated as converged when no floor is given.
inline constexpr double kDefaultRateFloor = 1e2 * 2.2250738585072014e-308;

/// Regime of a positive sequence e_k (index k = 1, 2, ... for the log-log fit).
///
/// The first `burn_in` fraction is dropped. Precedence:
///   Finite       the tail reaches `floor` and stays there, with fewer than
///                3 points above it;
///   Superlinear  median of q_k = log(e_{k+1}/e_k) / log(e_k/e_{k-1}) over the
///                points above the floor exceeds 1.05 (needs >= 3 points);
///   Linear       log e_k vs k has r^2 >= 0.99 and slope < -1e-3 (>= 8 points);
///   Sublinear    log e_k vs log k has r^2 >= 0.99 with negative slope (>= 8 points);
///   otherwise Inconclusive.
RateEstimate classify_rate(std::span<const double> seq, double burn_in = 0.2,
                           double floor = kDefaultRateFloor);

struct TheoreticalRate {
  Regime regime = Regime::Inconclusive;
  std::optional<double> order;     // Superlinear
  std::optional<double> exponent;  // Sublinear
};

/// Predicted regime for KL exponent theta in (0, 1]. Throws
/// std::invalid_argument for (GD, Mu), (GD, DistToSet) or theta out of range.
TheoreticalRate theoretical_rate(double theta, Measure measure, RateAlgorithm algorithm);

struct RateTolerances {
  double order = 0.3;
  double exponent = 0.3;
};

struct RateVerdict {
  bool regime_match = false;
  std::optional<double> deviation;  // |estimated - predicted| when both carry a number
  bool within_tolerance = false;    // regime match and deviation (if any) within tolerance
};

RateVerdict compare(const RateEstimate& est, const TheoreticalRate& pred,
                    const RateTolerances& tol = {});

}  // namespace crkl
