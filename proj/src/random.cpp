#include "crkl/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace crkl {

std::uint64_t CounterRng::mix(std::uint64_t z) {
  // SplitMix64 finalizer.
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CounterRng CounterRng::split(std::uint64_t stream) const {
  return CounterRng(mix(key_ ^ mix(stream + 0x3c6ef372fe94f82bULL)), FromKey{});
}

std::uint64_t CounterRng::next_u64() { return mix(key_ ^ mix(counter_++)); }

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vector CounterRng::unit_vector(std::size_t dim) {
  for (;;) {
    Vector v(dim);
    for (double& x : v) x = normal();
    const double n = norm(v);
    if (n > 1e-12) {
      for (double& x : v) x /= n;
      return v;
    }
  }
}

Vector CounterRng::point_on_sphere(std::size_t dim, double radius) {
  Vector v = unit_vector(dim);
  for (double& x : v) x *= radius;
  return v;
}

KroneckerSequence::KroneckerSequence(std::size_t dim, std::uint64_t seed)
    : alpha_(dim), shift_(dim) {
  if (dim == 0) throw std::invalid_argument("KroneckerSequence: dim must be positive");
  double phi = 2.0;
  for (int it = 0; it < 200; ++it) phi = std::pow(1.0 + phi, 1.0 / static_cast<double>(dim + 1));
  double a = 1.0;
  CounterRng rng(seed);
  for (std::size_t j = 0; j < dim; ++j) {
    a /= phi;
    alpha_[j] = a;
    shift_[j] = rng.uniform();
  }
}

void KroneckerSequence::point(std::uint64_t n, std::span<double> out) const {
  const double nd = static_cast<double>(n);
  for (std::size_t j = 0; j < alpha_.size(); ++j) {
    const double v = shift_[j] + nd * alpha_[j];
    out[j] = v - std::floor(v);
  }
}

}  // namespace crkl
