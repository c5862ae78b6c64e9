#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace crkl {

using Vector = std::vector<double>;

/// Raised when an iterative numerical routine exhausts its iteration budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);
double distance(std::span<const double> a, std::span<const double> b);
double max_abs(std::span<const double> v);

// Square dense matrix, row-major.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t dim, double fill = 0.0)
      : dim_(dim), data_(dim * dim, fill) {}

  static DenseMatrix identity(std::size_t dim);

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
  std::span<const double> data() const { return data_; }

  Vector column(std::size_t j) const;
  Vector multiply(std::span<const double> x) const;
  Vector multiply_transposed(std::span<const double> x) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Dense symmetric real matrix.
///
/// Construction checks that every entry is finite and that the input is
/// symmetric up to 1e-12 * ||A||_F. Inputs within that tolerance are
/// replaced by (A + A^T) / 2; anything further from symmetric throws
/// std::invalid_argument.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  SymmetricMatrix(std::size_t dim, std::vector<double> row_major);

  static SymmetricMatrix zeros(std::size_t dim);
  static SymmetricMatrix identity(std::size_t dim);
  static SymmetricMatrix diagonal(std::span<const double> diag);

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
  std::span<const double> data() const { return data_; }

  Vector multiply(std::span<const double> x) const;
  double frobenius_norm() const;

  SymmetricMatrix scaled(double alpha) const;
  SymmetricMatrix shifted(double shift) const;
  // A + alpha * u u^T
  SymmetricMatrix plus_rank_one(double alpha, std::span<const double> u) const;
  // A - B, Frobenius norm.
  friend double frobenius_distance(const SymmetricMatrix& a, const SymmetricMatrix& b);

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

struct EigenDecomposition {
  Vector eigenvalues;        // ascending
  DenseMatrix eigenvectors;  // column i pairs with eigenvalues[i]

  std::size_t dim() const { return eigenvalues.size(); }
  DenseMatrix reconstruct() const;
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius norm drops to 1e-14 * ||A||_F,
/// with a cap of 100 sweeps (ConvergenceError past that). Eigenvalues are
/// sorted ascending; each eigenvector is oriented so that its
/// largest-magnitude component (lowest index on ties) is positive, which
/// makes the output deterministic.
EigenDecomposition eigh(const SymmetricMatrix& a);

double min_eigenvalue(const SymmetricMatrix& a);

/// x = Q (Lambda + shift I)^{-1} Q^T b. Throws std::domain_error if any
/// shifted eigenvalue is not strictly positive.
Vector solve_shifted(const EigenDecomposition& e, double shift, std::span<const double> b);

}  // namespace crkl
