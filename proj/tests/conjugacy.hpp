// Monte Carlo checks of the conjugate full conditionals against analytic
// moments computed here with explicit inverses. Each check returns the
// largest standardized deviation (in Monte Carlo standard errors).
#pragma once

#include <Eigen/LU>

#include "mrfmix/mrfmix.hpp"

namespace conjugacy {

using namespace mrfmix;

struct Fixture {
  GeneTable table;
  Labels T;
  MixtureParams params;
  PriorSpec prior;
};

/// 40 items in 3 dimensions, 12 labelled as targets, moderate covariances.
inline Fixture make_fixture(std::uint64_t seed = 5) {
  Rng rng(seed);
  const int G = 40, d = 3;
  RowMatrix x(G, d);
  Labels T(G, 0);
  std::vector<std::string> ids;
  for (int i = 0; i < G; ++i) {
    ids.push_back("g" + std::to_string(i));
    T[i] = i % 10 < 3 ? 1 : 0;
    for (int l = 0; l < d; ++l) x(i, l) = sample_std_normal(rng) + (T[i] ? 1.0 + 0.5 * l : 0.0);
  }
  Fixture f{GeneTable(ids, {"B", "E", "S"}, x), T, {}, {}};
  f.prior = build_prior_spec(f.table);
  Matrix s0(d, d), s1(d, d);
  s0 << 1.0, 0.2, 0.0, 0.2, 0.8, 0.1, 0.0, 0.1, 1.5;
  s1 << 0.7, -0.1, 0.3, -0.1, 1.1, 0.0, 0.3, 0.0, 0.9;
  f.params = {(Vector(3) << 0.1, -0.2, 0.05).finished(), (Vector(3) << 0.2, 0.05, 0.4).finished(),
              s0, s1, CovarianceMode::kGeneral, 0.3};
  return f;
}

inline Matrix explicit_inverse(const Matrix& m) { return Eigen::FullPivLU<Matrix>(m).inverse(); }

struct VectorDraws {
  Vector mean;
  Matrix cov;
};

template <typename Draw>
VectorDraws collect(int n, int d, Draw&& draw) {
  std::vector<Vector> xs;
  xs.reserve(static_cast<std::size_t>(n));
  Vector mean = Vector::Zero(d);
  for (int i = 0; i < n; ++i) {
    xs.push_back(draw());
    mean += xs.back() / n;
  }
  Matrix cov = Matrix::Zero(d, d);
  for (const auto& x : xs) cov += (x - mean) * (x - mean).transpose() / (n - 1);
  return {mean, cov};
}

/// Standardized deviation of the sample mean and of each sample covariance
/// entry from the analytic Gaussian moments.
inline double gaussian_zmax(const VectorDraws& got, const Vector& mean, const Matrix& cov, int n) {
  double z = 0.0;
  const auto d = mean.size();
  for (Eigen::Index a = 0; a < d; ++a) {
    z = std::max(z, std::fabs(got.mean(a) - mean(a)) / std::sqrt(cov(a, a) / n));
    for (Eigen::Index b = 0; b < d; ++b) {
      // Var of the sample covariance entry for Gaussian data.
      const double se = std::sqrt((cov(a, b) * cov(a, b) + cov(a, a) * cov(b, b)) / n);
      z = std::max(z, std::fabs(got.cov(a, b) - cov(a, b)) / se);
    }
  }
  return z;
}

inline double check_mu0(const Fixture& f, int n, std::uint64_t seed) {
  const RowMatrix& x = f.table.scores();
  std::size_t n0 = 0;
  Vector sum = Vector::Zero(3);
  for (int i = 0; i < x.rows(); ++i)
    if (!f.T[i]) {
      sum += x.row(i).transpose();
      ++n0;
    }
  const Matrix s0_inv = explicit_inverse(f.params.sigma0);
  const Matrix cov = explicit_inverse(static_cast<double>(n0) * s0_inv + explicit_inverse(f.prior.C));
  const Vector mean = cov * s0_inv * sum;
  Rng rng(seed);
  const auto got = collect(n, 3, [&] { return draw_mu0(x, f.T, f.params, f.prior, rng); });
  return gaussian_zmax(got, mean, cov, n);
}

/// Theta is truncated to the positive orthant; the oracle is rejection
/// sampling from the untruncated analytic Gaussian.
inline double check_theta(const Fixture& f, int n, std::uint64_t seed) {
  const RowMatrix& x = f.table.scores();
  std::size_t n1 = 0;
  Vector sum = Vector::Zero(3);
  for (int i = 0; i < x.rows(); ++i)
    if (f.T[i]) {
      sum += x.row(i).transpose() - f.params.mu0;
      ++n1;
    }
  const Matrix s1_inv = explicit_inverse(f.params.sigma1);
  const Matrix cov = explicit_inverse(static_cast<double>(n1) * s1_inv + explicit_inverse(f.prior.C));
  const Vector mean = cov * s1_inv * sum;
  Rng rng(seed), ref_rng(seed ^ 0xABCDEFULL);
  const Eigen::LLT<Matrix> llt(cov);
  const Matrix L = llt.matrixL();
  const auto ref = collect(n, 3, [&] {
    Vector z(3);
    do {
      for (int l = 0; l < 3; ++l) z(l) = sample_std_normal(ref_rng);
      z = mean + L * z;
    } while (!(z.array() > 0.0).all());
    return z;
  });
  MixtureParams p = f.params;
  bool positive = true;
  const auto got = collect(n, 3, [&] {
    Vector t = draw_theta(x, f.T, p, f.prior, rng);
    positive = positive && (t.array() > 0.0).all();
    return t;
  });
  if (!positive) return INFINITY;
  double z = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double se = std::sqrt((got.cov(a, a) + ref.cov(a, a)) / n);
    z = std::max(z, std::fabs(got.mean(a) - ref.mean(a)) / se);
    for (int b = 0; b < 3; ++b) {
      const double se_c = std::sqrt(2.0 * (ref.cov(a, b) * ref.cov(a, b) + ref.cov(a, a) * ref.cov(b, b)) / n);
      z = std::max(z, std::fabs(got.cov(a, b) - ref.cov(a, b)) / se_c);
    }
  }
  return z;
}

/// Sigma_j^-1 ~ Wishart(V, nu): E = nu V, Var(W_ab) = nu (V_ab^2 + V_aa V_bb).
inline double check_sigma(const Fixture& f, std::uint8_t j, CovarianceMode mode, int n, std::uint64_t seed) {
  const RowMatrix& x = f.table.scores();
  const Vector mu = j == 0 ? f.params.mu0 : f.params.mu1();
  Matrix scatter = Matrix::Zero(3, 3);
  std::size_t nj = 0;
  for (int i = 0; i < x.rows(); ++i)
    if (f.T[i] == j) {
      const Vector r = x.row(i).transpose() - mu;
      scatter += r * r.transpose();
      ++nj;
    }
  const double nu = static_cast<double>(nj) + 3.0;
  Matrix V = explicit_inverse(scatter + 3.0 * f.prior.R);
  if (mode == CovarianceMode::kDiagonal) {
    V = Matrix::Zero(3, 3);
    for (int l = 0; l < 3; ++l) V(l, l) = 1.0 / (scatter(l, l) + 3.0 * f.prior.R(l, l));
  }
  Rng rng(seed);
  Matrix mean = Matrix::Zero(3, 3);
  for (int i = 0; i < n; ++i) mean += explicit_inverse(draw_sigma(x, f.T, mu, j, mode, f.prior, rng)) / n;
  double z = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      if (mode == CovarianceMode::kDiagonal && a != b) {
        if (mean(a, b) != 0.0) return INFINITY;
        continue;
      }
      const double var = mode == CovarianceMode::kDiagonal ? 2.0 * nu * V(a, a) * V(a, a)
                                                           : nu * (V(a, b) * V(a, b) + V(a, a) * V(b, b));
      z = std::max(z, std::fabs(mean(a, b) - nu * V(a, b)) / std::sqrt(var / n));
    }
  return z;
}

inline double check_pi1(std::size_t n1, std::size_t n0, int n, std::uint64_t seed) {
  const double a = 1.0 + static_cast<double>(n1), b = 1.0 + static_cast<double>(n0);
  const double mean = a / (a + b), var = a * b / ((a + b) * (a + b) * (a + b + 1.0));
  Rng rng(seed);
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = draw_pi1(n1, n0, rng);
    s += p;
    ss += p * p;
  }
  const double m = s / n, v = (ss - n * m * m) / (n - 1);
  const double z_mean = std::fabs(m - mean) / std::sqrt(var / n);
  // Fourth central moment of the Beta, for the SE of the sample variance.
  const double mu4 = 3.0 * a * b * (a * b * (a + b - 6.0) + 2.0 * (a + b) * (a + b)) /
                     ((a + b) * (a + b) * (a + b) * (a + b) * (a + b + 1.0) * (a + b + 2.0) * (a + b + 3.0));
  const double z_var = std::fabs(v - var) / std::sqrt((mu4 - var * var) / n);
  return std::max(z_mean, z_var);
}

/// Relative error of the mean prior precision against R^-1 when component
/// j is empty (dof rho, scale (rho R)^-1).
inline double prior_precision_relerr(const Fixture& f, int n, std::uint64_t seed) {
  const Labels none(f.T.size(), 0);
  Rng rng(seed);
  Matrix mean = Matrix::Zero(3, 3);
  for (int i = 0; i < n; ++i)
    mean += explicit_inverse(draw_sigma(f.table.scores(), none, f.params.mu1(), 1, CovarianceMode::kGeneral,
                                        f.prior, rng)) /
            n;
  const Matrix target = explicit_inverse(f.prior.R);
  return (mean - target).norm() / target.norm();
}

}  // namespace conjugacy
