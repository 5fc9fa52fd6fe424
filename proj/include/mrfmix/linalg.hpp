// Small dense linear algebra: Cholesky factors and multivariate normal
// densities. Dimensions are tiny (d <= kMaxDim), so everything is dense and
// the hot-path density evaluator avoids heap allocation.
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "mrfmix/types.hpp"

namespace mrfmix {

class NotPositiveDefinite : public NumericalError {
 public:
  NotPositiveDefinite(int pivot, double value)
      : NumericalError("matrix not positive definite: pivot " + std::to_string(pivot) +
                       " has value " + std::to_string(value)),
        pivot_(pivot) {}
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

/// Lower-triangular L with positive diagonal such that L L' = A.
class CholFactor {
 public:
  CholFactor() = default;

  /// Factorizes the symmetric matrix A (only the lower triangle is read).
  explicit CholFactor(const Matrix& A) : L_(Matrix::Zero(A.rows(), A.cols())) {
    if (A.rows() != A.cols()) throw DataError("cholesky: matrix not square");
    const Eigen::Index d = A.rows();
    for (Eigen::Index j = 0; j < d; ++j) {
      double pivot = A(j, j);
      for (Eigen::Index k = 0; k < j; ++k) pivot -= L_(j, k) * L_(j, k);
      if (!(pivot > 0.0) || !std::isfinite(pivot))
        throw NotPositiveDefinite(static_cast<int>(j), pivot);
      const double ljj = std::sqrt(pivot);
      L_(j, j) = ljj;
      for (Eigen::Index i = j + 1; i < d; ++i) {
        double s = A(i, j);
        for (Eigen::Index k = 0; k < j; ++k) s -= L_(i, k) * L_(j, k);
        L_(i, j) = s / ljj;
      }
    }
  }

  int dim() const { return static_cast<int>(L_.rows()); }
  const Matrix& L() const { return L_; }

  double log_det() const { return 2.0 * L_.diagonal().array().log().sum(); }

  /// Solves L y = b.
  Vector solve_lower(const Vector& b) const {
    return L_.triangularView<Eigen::Lower>().solve(b);
  }

  /// Solves A x = b.
  Vector solve(const Vector& b) const {
    return L_.transpose().triangularView<Eigen::Upper>().solve(solve_lower(b));
  }

  Matrix inverse() const {
    const Matrix Linv = L_.triangularView<Eigen::Lower>().solve(Matrix::Identity(dim(), dim()));
    Matrix inv = Linv.transpose() * Linv;
    return 0.5 * (inv + inv.transpose());
  }

  Matrix reconstruct() const { return L_ * L_.transpose(); }

 private:
  Matrix L_;
};

inline CholFactor cholesky(const Matrix& A) { return CholFactor(A); }

inline constexpr double kLogTwoPi = 1.8378770664093454836;

/// log N(x; mu, L L').
inline double mvn_logpdf(const Vector& x, const Vector& mu, const CholFactor& chol) {
  if (x.size() != mu.size() || x.size() != chol.dim())
    throw DataError("mvn_logpdf: dimension mismatch");
  const Vector z = chol.solve_lower(x - mu);
  return -0.5 * static_cast<double>(x.size()) * kLogTwoPi - 0.5 * chol.log_det() -
         0.5 * z.squaredNorm();
}

/// Allocation-free normal log-density with fixed mean and covariance.
class MvnDensity {
 public:
  MvnDensity() = default;
  MvnDensity(const Vector& mu, const Matrix& sigma) : chol_(sigma), d_(static_cast<int>(mu.size())) {
    if (d_ > kMaxDim) throw DataError("mvn: dimension too large");
    for (int i = 0; i < d_; ++i) mu_[i] = mu(i);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j <= i; ++j) l_[i * kMaxDim + j] = chol_.L()(i, j);
    constant_ = -0.5 * d_ * kLogTwoPi - 0.5 * chol_.log_det();
  }

  /// Log-density at a contiguous row of d scores.
  double operator()(const double* x) const {
    std::array<double, kMaxDim> z{};
    double q = 0.0;
    for (int i = 0; i < d_; ++i) {
      double s = x[i] - mu_[i];
      for (int j = 0; j < i; ++j) s -= l_[i * kMaxDim + j] * z[j];
      z[i] = s / l_[i * kMaxDim + i];
      q += z[i] * z[i];
    }
    return constant_ - 0.5 * q;
  }

  const CholFactor& chol() const { return chol_; }

 private:
  CholFactor chol_;
  int d_ = 0;
  std::array<double, kMaxDim> mu_{};
  std::array<double, kMaxDim * kMaxDim> l_{};
  double constant_ = 0.0;
};

/// Inverse of a symmetric positive-definite matrix.
inline Matrix inverse_spd(const Matrix& A) { return CholFactor(A).inverse(); }

/// Correlation matrix of a covariance matrix.
inline Matrix to_correlation(const Matrix& S) {
  const Vector s = S.diagonal().array().sqrt();
  Matrix C = S.array() / (s * s.transpose()).array();
  C.diagonal().setOnes();
  return C;
}

}  // namespace mrfmix
