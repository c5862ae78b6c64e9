#include "crkl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crkl {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> v) {
  // Scaled accumulation so tiny iterates (1e-200 and below) do not underflow.
  double scale = max_abs(v);
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double x : v) {
    const double y = x / scale;
    s += y * y;
  }
  return scale * std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("distance: dimension mismatch");
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return norm(d);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

DenseMatrix DenseMatrix::identity(std::size_t dim) {
  DenseMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

Vector DenseMatrix::column(std::size_t j) const {
  Vector c(dim_);
  for (std::size_t i = 0; i < dim_; ++i) c[i] = (*this)(i, j);
  return c;
}

Vector DenseMatrix::multiply(std::span<const double> x) const {
  Vector y(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Vector DenseMatrix::multiply_transposed(std::span<const double> x) const {
  Vector y(dim_, 0.0);
  for (std::size_t j = 0; j < dim_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) s += (*this)(i, j) * x[i];
    y[j] = s;
  }
  return y;
}

SymmetricMatrix::SymmetricMatrix(std::size_t dim, std::vector<double> row_major)
    : dim_(dim), data_(std::move(row_major)) {
  if (dim == 0) throw std::invalid_argument("SymmetricMatrix: dimension must be positive");
  if (data_.size() != dim * dim) {
    throw std::invalid_argument("SymmetricMatrix: expected " + std::to_string(dim * dim) +
                                " entries, got " + std::to_string(data_.size()));
  }
  double fro2 = 0.0;
  double asym2 = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double a = data_[i * dim + j];
      if (!std::isfinite(a)) throw std::invalid_argument("SymmetricMatrix: non-finite entry");
      fro2 += a * a;
      const double d = a - data_[j * dim + i];
      asym2 += d * d;
    }
  }
  if (asym2 == 0.0) return;
  if (std::sqrt(asym2) > 1e-12 * std::sqrt(fro2)) {
    throw std::invalid_argument("SymmetricMatrix: input is not symmetric");
  }
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i + 1; j < dim; ++j) {
      const double avg = 0.5 * (data_[i * dim + j] + data_[j * dim + i]);
      data_[i * dim + j] = avg;
      data_[j * dim + i] = avg;
    }
  }
}

SymmetricMatrix SymmetricMatrix::zeros(std::size_t dim) {
  return SymmetricMatrix(dim, std::vector<double>(dim * dim, 0.0));
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t dim) {
  std::vector<double> d(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) d[i * dim + i] = 1.0;
  return SymmetricMatrix(dim, std::move(d));
}

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> diag) {
  const std::size_t n = diag.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = diag[i];
  return SymmetricMatrix(n, std::move(d));
}

Vector SymmetricMatrix::multiply(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("SymmetricMatrix::multiply: dimension mismatch");
  Vector y(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) s += data_[i * dim_ + j] * x[j];
    y[i] = s;
  }
  return y;
}

double SymmetricMatrix::frobenius_norm() const { return norm(data_); }

SymmetricMatrix SymmetricMatrix::scaled(double alpha) const {
  std::vector<double> d(data_);
  for (double& x : d) x *= alpha;
  return SymmetricMatrix(dim_, std::move(d));
}

SymmetricMatrix SymmetricMatrix::shifted(double shift) const {
  std::vector<double> d(data_);
  for (std::size_t i = 0; i < dim_; ++i) d[i * dim_ + i] += shift;
  return SymmetricMatrix(dim_, std::move(d));
}

SymmetricMatrix SymmetricMatrix::plus_rank_one(double alpha, std::span<const double> u) const {
  if (u.size() != dim_) throw std::invalid_argument("plus_rank_one: dimension mismatch");
  std::vector<double> d(data_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) d[i * dim_ + j] += alpha * u[i] * u[j];
  return SymmetricMatrix(dim_, std::move(d));
}

double frobenius_distance(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.dim_ != b.dim_) throw std::invalid_argument("frobenius_distance: dimension mismatch");
  Vector d(a.data_.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.data_[i] - b.data_[i];
  return norm(d);
}

DenseMatrix EigenDecomposition::reconstruct() const {
  const std::size_t n = dim();
  DenseMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += eigenvectors(i, k) * eigenvalues[k] * eigenvectors(j, k);
      a(i, j) = s;
    }
  return a;
}

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagonalTol = 1e-14;

double off_diagonal_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

void rotate(DenseMatrix& a, DenseMatrix& v, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
  double t;
  if (std::abs(tau) > 1e150) {
    t = 0.5 / tau;
  } else {
    t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  }
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;
  const std::size_t n = a.dim();
  for (std::size_t k = 0; k < n; ++k) {
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double apk = a(p, k);
    const double aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

void orient(DenseMatrix& v, std::size_t col) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.dim(); ++i)
    if (std::abs(v(i, col)) > std::abs(v(best, col))) best = i;
  if (v(best, col) < 0.0)
    for (std::size_t i = 0; i < v.dim(); ++i) v(i, col) = -v(i, col);
}

}  // namespace

EigenDecomposition eigh(const SymmetricMatrix& m) {
  const std::size_t n = m.dim();
  if (n == 0) throw std::invalid_argument("eigh: empty matrix");
  if (n == 1) return {Vector{m(0, 0)}, DenseMatrix::identity(1)};

  DenseMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = m(i, j);
  DenseMatrix v = DenseMatrix::identity(n);

  const double threshold = kOffDiagonalTol * m.frobenius_norm();
  int sweep = 0;
  while (off_diagonal_norm(a) > threshold) {
    if (++sweep > kMaxSweeps) {
      throw ConvergenceError("eigh: Jacobi iteration did not converge in " +
                             std::to_string(kMaxSweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) rotate(a, v, p, q);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  EigenDecomposition out{Vector(n), DenseMatrix(n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
    orient(out.eigenvectors, k);
  }
  return out;
}

double min_eigenvalue(const SymmetricMatrix& a) { return eigh(a).eigenvalues.front(); }

Vector solve_shifted(const EigenDecomposition& e, double shift, std::span<const double> b) {
  const std::size_t n = e.dim();
  if (b.size() != n) throw std::invalid_argument("solve_shifted: dimension mismatch");
  for (double lambda : e.eigenvalues) {
    if (!(lambda + shift > 0.0)) {
      throw std::domain_error("solve_shifted: shifted system is not positive definite");
    }
  }
  Vector coeff = e.eigenvectors.multiply_transposed(b);
  for (std::size_t i = 0; i < n; ++i) coeff[i] /= e.eigenvalues[i] + shift;
  return e.eigenvectors.multiply(coeff);
}

}  // namespace crkl
