#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "crkl/linalg.hpp"

namespace crkl {

/// Counter-based generator: draw i of stream (key) is mix(key, i), so a
/// stream can be split or replayed without carrying hidden state. Only
/// integer mixing and IEEE arithmetic are used, so uniform draws are
/// reproducible across platforms.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  /// Independent child stream identified by `stream`.
  CounterRng split(std::uint64_t stream) const;

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double normal();   // standard normal (Box-Muller)
  Vector unit_vector(std::size_t dim);
  Vector point_on_sphere(std::size_t dim, double radius);

  static std::uint64_t mix(std::uint64_t z);

 private:
  struct FromKey {};
  CounterRng(std::uint64_t key, FromKey) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Additive-recurrence low-discrepancy sequence in [0,1)^dim:
/// u_n = frac(shift + n * alpha), alpha_j = phi^-(j+1), where phi is the
/// positive root of x^(dim+1) = x + 1. The shift gives a seeded
/// (Cranley-Patterson) randomization.
class KroneckerSequence {
 public:
  KroneckerSequence(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const { return alpha_.size(); }
  /// Writes point n into `out` (size dim()).
  void point(std::uint64_t n, std::span<double> out) const;

 private:
  Vector alpha_;
  Vector shift_;
};

}  // namespace crkl
