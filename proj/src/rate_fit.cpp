#include "crkl/rate_fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace crkl {

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Finite: return "Finite";
    case Regime::Superlinear: return "Superlinear";
    case Regime::Linear: return "Linear";
    case Regime::Sublinear: return "Sublinear";
    case Regime::Inconclusive: return "Inconclusive";
  }
  return "?";
}

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::FGap: return "FGap";
    case Measure::IterateDist: return "IterateDist";
    case Measure::Mu: return "Mu";
    case Measure::DistToSet: return "DistToSet";
  }
  return "?";
}

Measure parse_measure(std::string_view s) {
  if (s == "FGap" || s == "fgap") return Measure::FGap;
  if (s == "IterateDist" || s == "iterate") return Measure::IterateDist;
  if (s == "Mu" || s == "mu") return Measure::Mu;
  if (s == "DistToSet" || s == "dist") return Measure::DistToSet;
  throw std::invalid_argument("unknown measure '" + std::string(s) + "'");
}

namespace {

constexpr int kMinRegressionPoints = 8;
constexpr int kMinSuperlinearPoints = 3;

struct Fit {
  double slope = 0.0;
  double r2 = 0.0;
};

Fit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  Fit fit;
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  if (syy > 0.0) fit.r2 = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return fit;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

RateEstimate classify_rate(std::span<const double> seq, double burn_in, double floor) {
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw std::invalid_argument("classify_rate: burn_in must be in [0, 1)");
  if (!(floor >= 0.0)) throw std::invalid_argument("classify_rate: floor must be >= 0");
  for (double v : seq)
    if (std::isnan(v)) throw std::invalid_argument("classify_rate: NaN in sequence");

  const std::size_t start = static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(seq.size())));
  RateEstimate est;
  if (start >= seq.size()) return est;

  // Points above the floor, with their 1-based indices; `first_floor`
  // marks where the tail first reaches the floor.
  std::size_t first_floor = seq.size();
  for (std::size_t i = start; i < seq.size(); ++i) {
    if (seq[i] <= floor) {
      first_floor = i;
      break;
    }
  }
  const bool stays = first_floor < seq.size() &&
                     std::all_of(seq.begin() + static_cast<std::ptrdiff_t>(first_floor), seq.end(),
                                 [floor](double v) { return v <= floor; });

  std::vector<std::size_t> idx;
  const std::size_t end = stays ? first_floor : seq.size();
  for (std::size_t i = start; i < end; ++i)
    if (seq[i] > floor) idx.push_back(i);
  est.n_points_used = static_cast<int>(idx.size());

  if (stays && idx.size() < static_cast<std::size_t>(kMinSuperlinearPoints)) {
    est.regime = Regime::Finite;
    return est;
  }

  if (idx.size() >= static_cast<std::size_t>(kMinSuperlinearPoints)) {
    std::vector<double> orders;
    for (std::size_t j = 1; j + 1 < idx.size(); ++j) {
      if (idx[j] != idx[j - 1] + 1 || idx[j + 1] != idx[j] + 1) continue;
      const double d1 = std::log(seq[idx[j]]) - std::log(seq[idx[j - 1]]);
      const double d2 = std::log(seq[idx[j + 1]]) - std::log(seq[idx[j]]);
      if (!(d1 < 0.0) || !std::isfinite(d2)) continue;
      orders.push_back(d2 / d1);
    }
    if (!orders.empty()) {
      const double q = median(orders);
      if (q > 1.05) {
        est.regime = Regime::Superlinear;
        est.order_q = q;
        return est;
      }
    }
  }

  if (idx.size() < static_cast<std::size_t>(kMinRegressionPoints)) return est;

  std::vector<double> ks, logks, loge;
  for (std::size_t i : idx) {
    const double k = static_cast<double>(i + 1);
    ks.push_back(k);
    logks.push_back(std::log(k));
    loge.push_back(std::log(seq[i]));
  }

  const Fit lin = least_squares(ks, loge);
  if (lin.r2 >= 0.99 && lin.slope < -1e-3) {
    est.regime = Regime::Linear;
    est.ratio_c = std::exp(lin.slope);
    est.fit_r2 = lin.r2;
    return est;
  }
  const Fit pow = least_squares(logks, loge);
  if (pow.r2 >= 0.99 && pow.slope < 0.0) {
    est.regime = Regime::Sublinear;
    est.exponent_alpha = -pow.slope;
    est.fit_r2 = pow.r2;
    return est;
  }
  est.fit_r2 = std::max(lin.r2, pow.r2);
  return est;
}

TheoreticalRate theoretical_rate(double theta, Measure measure, RateAlgorithm algorithm) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theoretical_rate: theta must be in (0, 1]");
  TheoreticalRate out;
  if (algorithm == RateAlgorithm::GD) {
    if (measure != Measure::FGap && measure != Measure::IterateDist) {
      throw std::invalid_argument("theoretical_rate: gradient descent has predictions for FGap and IterateDist only");
    }
    if (theta == 1.0) {
      out.regime = Regime::Finite;
    } else if (theta >= 0.5) {
      out.regime = Regime::Linear;
    } else {
      out.regime = Regime::Sublinear;
      out.exponent = measure == Measure::FGap ? 1.0 / (1.0 - 2.0 * theta) : theta / (1.0 - 2.0 * theta);
    }
    return out;
  }

  if (theta == 1.0) {
    out.regime = Regime::Finite;
  } else if (std::abs(theta - 1.0 / 3.0) <= 1e-12) {
    out.regime = Regime::Linear;
  } else if (theta > 1.0 / 3.0) {
    out.regime = Regime::Superlinear;
    switch (measure) {
      case Measure::FGap: out.order = 2.0 / (3.0 * (1.0 - theta)); break;
      case Measure::IterateDist: out.order = 2.0 * theta / (3.0 * (1.0 - theta)) + 2.0 / 3.0; break;
      case Measure::Mu:
      case Measure::DistToSet: out.order = 2.0 * theta / (1.0 - theta); break;
    }
  } else {
    out.regime = Regime::Sublinear;
    out.exponent = measure == Measure::FGap ? 2.0 / (1.0 - 3.0 * theta) : 2.0 * theta / (1.0 - 3.0 * theta);
  }
  return out;
}

RateVerdict compare(const RateEstimate& est, const TheoreticalRate& pred, const RateTolerances& tol) {
  RateVerdict v;
  v.regime_match = est.regime == pred.regime;
  double limit = 0.0;
  if (est.order_q && pred.order) {
    v.deviation = std::abs(*est.order_q - *pred.order);
    limit = tol.order;
  } else if (est.exponent_alpha && pred.exponent) {
    v.deviation = std::abs(*est.exponent_alpha - *pred.exponent);
    limit = tol.exponent;
  }
  v.within_tolerance = v.regime_match && (!v.deviation || *v.deviation <= limit);
  return v;
}

}  // namespace crkl
