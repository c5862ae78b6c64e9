#include "crkl/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crkl {

namespace {

void require_dim(std::span<const double> x, std::size_t dim, const char* who) {
  if (x.size() != dim) {
    throw std::invalid_argument(std::string(who) + ": expected dimension " + std::to_string(dim) +
                                ", got " + std::to_string(x.size()));
  }
}

}  // namespace

Objective norm_power(double p, std::size_t dim, double level_radius) {
  if (!(p >= 2.0)) throw std::invalid_argument("norm_power: p must be >= 2");
  if (p > 2.0 && p < 3.0) {
    throw std::invalid_argument("norm_power: Hessian is not Lipschitz at 0 for 2 < p < 3");
  }
  if (dim == 0) throw std::invalid_argument("norm_power: dim must be positive");
  if (!(level_radius >= 0.0)) throw std::invalid_argument("norm_power: level radius must be >= 0");

  Objective obj;
  obj.name = "norm_power";
  obj.dim = dim;
  obj.value = [p, dim](std::span<const double> x) {
    require_dim(x, dim, "norm_power");
    return std::pow(norm(x), p);
  };
  obj.gradient = [p, dim](std::span<const double> x) {
    require_dim(x, dim, "norm_power");
    const double r = norm(x);
    Vector g(x.begin(), x.end());
    const double coeff = r == 0.0 ? (p == 2.0 ? 2.0 : 0.0) : p * std::pow(r, p - 2.0);
    for (double& gi : g) gi *= coeff;
    return g;
  };
  obj.hessian = [p, dim](std::span<const double> x) {
    require_dim(x, dim, "norm_power");
    const double r = norm(x);
    std::vector<double> h(dim * dim, 0.0);
    if (r == 0.0) {
      if (p == 2.0)
        for (std::size_t i = 0; i < dim; ++i) h[i * dim + i] = 2.0;
      return SymmetricMatrix(dim, std::move(h));
    }
    const double rp2 = std::pow(r, p - 2.0);
    const double outer = p * (p - 2.0) * rp2;
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        h[i * dim + j] = outer * (x[i] / r) * (x[j] / r);
      }
      h[i * dim + i] += p * rp2;
    }
    return SymmetricMatrix(dim, std::move(h));
  };

  // sup_{||v||=1} ||D Hess[v]||_F = p(p-2) r^{p-3} sqrt((p-1)^2 + d - 1) for p >= 3.
  obj.hessian_lipschitz =
      p == 2.0 ? 0.0
               : p * (p - 2.0) * std::pow(level_radius, p - 3.0) *
                     std::sqrt((p - 1.0) * (p - 1.0) + static_cast<double>(dim) - 1.0);
  obj.gradient_lipschitz = p * (p - 1.0) * std::pow(level_radius, p - 2.0);
  obj.kl = KLSpec{1.0 / p, std::pow(p, -p / (p - 1.0))};
  obj.f_star = 0.0;
  obj.solution_set = SolutionOracle{
      [](std::span<const double> x) { return norm(x); },
      [dim](std::span<const double>) { return Vector(dim, 0.0); },
      0.0,
  };
  return obj;
}

Objective quadratic(const SymmetricMatrix& a, Vector b) {
  const std::size_t dim = a.dim();
  if (b.size() != dim) throw std::invalid_argument("quadratic: b has wrong dimension");
  const EigenDecomposition e = eigh(a);
  const double lmin = e.eigenvalues.front();
  const double lmax = e.eigenvalues.back();
  if (!(lmin > 0.0)) throw std::invalid_argument("quadratic: A must be positive definite");
  const Vector xstar = solve_shifted(e, 0.0, b);
  const double fstar = -0.5 * dot(b, xstar);

  Objective obj;
  obj.name = "quadratic";
  obj.dim = dim;
  obj.value = [a, b](std::span<const double> x) {
    require_dim(x, a.dim(), "quadratic");
    return 0.5 * dot(x, a.multiply(x)) - dot(b, x);
  };
  obj.gradient = [a, b](std::span<const double> x) {
    require_dim(x, a.dim(), "quadratic");
    Vector g = a.multiply(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= b[i];
    return g;
  };
  obj.hessian = [a](std::span<const double> x) {
    require_dim(x, a.dim(), "quadratic");
    return a;
  };
  obj.hessian_lipschitz = 0.0;
  obj.gradient_lipschitz = lmax;
  obj.kl = KLSpec{0.5, 1.0 / (2.0 * lmin)};
  obj.f_star = fstar;
  obj.solution_set = SolutionOracle{
      [xstar](std::span<const double> x) { return distance(x, xstar); },
      [xstar](std::span<const double>) { return xstar; },
      fstar,
  };
  return obj;
}

Objective double_well(std::size_t dim, double level_value) {
  if (dim < 2) throw std::invalid_argument("double_well: dim must be >= 2");
  if (!(level_value >= 0.0)) throw std::invalid_argument("double_well: level value must be >= 0");

  Objective obj;
  obj.name = "double_well";
  obj.dim = dim;
  obj.value = [dim](std::span<const double> x) {
    require_dim(x, dim, "double_well");
    const double w = x[0] * x[0] - 1.0;
    double s = 0.25 * w * w;
    double q = 0.0;
    for (std::size_t i = 1; i < dim; ++i) q += x[i] * x[i];
    return s + 0.5 * q;
  };
  obj.gradient = [dim](std::span<const double> x) {
    require_dim(x, dim, "double_well");
    Vector g(x.begin(), x.end());
    g[0] = x[0] * (x[0] * x[0] - 1.0);
    return g;
  };
  obj.hessian = [dim](std::span<const double> x) {
    require_dim(x, dim, "double_well");
    std::vector<double> h(dim * dim, 0.0);
    h[0] = 3.0 * x[0] * x[0] - 1.0;
    for (std::size_t i = 1; i < dim; ++i) h[i * dim + i] = 1.0;
    return SymmetricMatrix(dim, std::move(h));
  };
  // On {f <= c}: x_1^2 <= 1 + 2 sqrt(c), and only H_11 = 3 x_1^2 - 1 varies.
  const double x1_bound_sq = 1.0 + 2.0 * std::sqrt(level_value);
  obj.hessian_lipschitz = 6.0 * std::sqrt(x1_bound_sq);
  obj.gradient_lipschitz = std::max(3.0 * x1_bound_sq - 1.0, 1.0);
  obj.kl = KLSpec{0.5, std::nullopt};
  obj.f_star = 0.0;
  auto nearest = [dim](std::span<const double> x) {
    Vector m(dim, 0.0);
    m[0] = x[0] >= 0.0 ? 1.0 : -1.0;
    return m;
  };
  obj.solution_set = SolutionOracle{
      [nearest](std::span<const double> x) { return distance(x, nearest(x)); },
      nearest,
      0.0,
  };
  return obj;
}

namespace {

double scalar_param(const ObjectiveSpec& spec, const std::string& key) {
  auto it = spec.params.find(key);
  if (it == spec.params.end()) {
    throw std::invalid_argument("objective.params." + key + ": missing for '" + spec.name + "'");
  }
  if (it->second.size() != 1) {
    throw std::invalid_argument("objective.params." + key + ": expected a single number");
  }
  return it->second.front();
}

std::size_t dim_param(const ObjectiveSpec& spec) {
  const double d = scalar_param(spec, "dim");
  if (!(d >= 1.0) || d != std::floor(d) || d > 1e6) {
    throw std::invalid_argument("objective.params.dim: expected a positive integer");
  }
  return static_cast<std::size_t>(d);
}

SymmetricMatrix quadratic_matrix(const ObjectiveSpec& spec) {
  const auto diag = spec.params.find("diag");
  const auto mat = spec.params.find("matrix");
  if ((diag == spec.params.end()) == (mat == spec.params.end())) {
    throw std::invalid_argument("objective.params: quadratic needs exactly one of 'diag' or 'matrix'");
  }
  if (diag != spec.params.end()) {
    if (diag->second.empty()) throw std::invalid_argument("objective.params.diag: empty");
    return SymmetricMatrix::diagonal(diag->second);
  }
  const std::size_t n2 = mat->second.size();
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n2))));
  if (n == 0 || n * n != n2) {
    throw std::invalid_argument("objective.params.matrix: entry count is not a perfect square");
  }
  try {
    return SymmetricMatrix(n, mat->second);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("objective.params.matrix: ") + e.what());
  }
}

void reject_unknown(const ObjectiveSpec& spec, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : spec.params) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) ==
        allowed.end()) {
      throw std::invalid_argument("objective.params." + key + ": unknown parameter for '" +
                                  spec.name + "'");
    }
  }
}

}  // namespace

std::size_t objective_dimension(const ObjectiveSpec& spec) {
  if (spec.name == "norm_power" || spec.name == "double_well") return dim_param(spec);
  if (spec.name == "quadratic") return quadratic_matrix(spec).dim();
  throw std::invalid_argument("objective.name: unknown objective '" + spec.name + "'");
}

Objective make_objective(const ObjectiveSpec& spec, std::span<const double> x0) {
  const std::size_t dim = objective_dimension(spec);
  if (x0.size() != dim) {
    throw std::invalid_argument("x0: dimension " + std::to_string(x0.size()) +
                                " does not match objective dimension " + std::to_string(dim));
  }
  if (spec.name == "norm_power") {
    reject_unknown(spec, {"p", "dim"});
    return norm_power(scalar_param(spec, "p"), dim, norm(x0));
  }
  if (spec.name == "double_well") {
    reject_unknown(spec, {"dim"});
    Objective probe = double_well(dim);
    return double_well(dim, probe.value(x0));
  }
  reject_unknown(spec, {"diag", "matrix", "b", "dim"});
  SymmetricMatrix a = quadratic_matrix(spec);
  Vector b(a.dim(), 0.0);
  if (auto it = spec.params.find("b"); it != spec.params.end()) {
    if (it->second.size() != a.dim()) throw std::invalid_argument("objective.params.b: wrong length");
    b = it->second;
  }
  return quadratic(a, std::move(b));
}

Vector canonical_start(const ObjectiveSpec& spec) {
  const std::size_t dim = objective_dimension(spec);
  if (spec.name == "double_well") {
    Vector x(dim, 1.0);
    x[0] = 1e-3;
    return x;
  }
  if (spec.name == "norm_power") return Vector(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  return Vector(dim, 1.0);
}

double check_gradient(const Objective& obj, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("check_gradient: h must be positive");
  const Vector g = obj.gradient(x);
  Vector xp(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < xp.size(); ++i) {
    const double xi = xp[i];
    xp[i] = xi + h;
    const double fp = obj.value(xp);
    xp[i] = xi - h;
    const double fm = obj.value(xp);
    xp[i] = xi;
    worst = std::max(worst, std::abs((fp - fm) / (2.0 * h) - g[i]));
  }
  return worst;
}

double check_hessian(const Objective& obj, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("check_hessian: h must be positive");
  const SymmetricMatrix hess = obj.hessian(x);
  Vector xp(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t j = 0; j < xp.size(); ++j) {
    const double xj = xp[j];
    xp[j] = xj + h;
    const Vector gp = obj.gradient(xp);
    xp[j] = xj - h;
    const Vector gm = obj.gradient(xp);
    xp[j] = xj;
    for (std::size_t i = 0; i < xp.size(); ++i) {
      worst = std::max(worst, std::abs((gp[i] - gm[i]) / (2.0 * h) - hess(i, j)));
    }
  }
  return worst;
}

}  // namespace crkl
