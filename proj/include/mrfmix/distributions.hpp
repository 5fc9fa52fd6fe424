// Random variates used by the samplers. Everything draws from an explicit
// Rng so results are reproducible and streams never interfere.
#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "mrfmix/linalg.hpp"
#include "mrfmix/rng.hpp"

namespace mrfmix {

/// Standard normal quantile, Wichura's AS 241 (PPND16), ~1e-16 relative.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Upper tail 1 - Phi(x) without cancellation.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

inline double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * kLogTwoPi - std::log(sd) - 0.5 * z * z;
}

inline double sample_std_normal(Rng& rng) { return normal_quantile(rng.uniform()); }

inline double sample_normal(double mean, double sd, Rng& rng) {
  return mean + sd * sample_std_normal(rng);
}

/// Standard normal conditioned on z > lower, by inversion. The upper-tail
/// branch inverts the survival function so deep tails keep full precision;
/// past the range of erfc it uses the exponential-tail limit in log space.
inline double sample_std_normal_above(double lower, Rng& rng) {
  const double u = rng.uniform();
  if (lower <= 0.0) {
    const double lo = normal_cdf(lower);
    return std::max(lower, normal_quantile(lo + u * (1.0 - lo)));
  }
  const double tail = normal_sf(lower);
  if (tail > std::numeric_limits<double>::min() * 1e3) {
    return std::max(lower, -normal_quantile(u * tail));
  }
  return std::sqrt(lower * lower - 2.0 * std::log(u));
}

/// N(mean, sd^2) conditioned on x > lower.
inline double sample_truncated_normal_above(double mean, double sd, double lower, Rng& rng) {
  for (;;) {
    const double x = mean + sd * sample_std_normal_above((lower - mean) / sd, rng);
    if (x > lower) return x;
  }
}

/// Gamma(shape, scale=1), Marsaglia & Tsang.
inline double sample_gamma(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw DataError("gamma: shape must be positive");
  if (shape < 1.0) {
    const double g = sample_gamma(shape + 1.0, rng);
    return g * std::pow(rng.uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z, v;
    do {
      z = sample_std_normal(rng);
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) return d * v;
  }
}

inline double sample_chi_square(double dof, Rng& rng) { return 2.0 * sample_gamma(0.5 * dof, rng); }

/// Beta(a, b), strictly inside (0, 1).
inline double sample_beta(double a, double b, Rng& rng) {
  if (!(a > 0.0 && b > 0.0)) throw DataError("beta: shapes must be positive");
  for (;;) {
    const double x = sample_gamma(a, rng);
    const double y = sample_gamma(b, rng);
    const double r = x / (x + y);
    if (r > 0.0 && r < 1.0) return r;
  }
}

/// mu + L z, z ~ N(0, I).
inline Vector sample_mvn(const Vector& mu, const CholFactor& chol, Rng& rng) {
  Vector z(mu.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = sample_std_normal(rng);
  return mu + chol.L() * z;
}

struct TruncatedMvnTrace {
  int rejection_attempts = 0;
  bool used_gibbs = false;
};

/// One draw from N(mu, L L') restricted to the positive orthant.
///
/// Plain rejection is tried up to `max_rejections` times. If the orthant has
/// too little mass, one coordinate-wise Gibbs sweep over univariate truncated
/// normals is run from `start` (or from a positive point near mu). Inside an
/// MCMC sweep that fallback is a valid Metropolis-within-Gibbs move.
inline Vector sample_truncated_mvn_positive(const Vector& mu, const CholFactor& chol, Rng& rng,
                                            const Vector* start = nullptr,
                                            int max_rejections = 100,
                                            TruncatedMvnTrace* trace = nullptr) {
  const Eigen::Index d = mu.size();
  for (int attempt = 1; attempt <= max_rejections; ++attempt) {
    Vector x = sample_mvn(mu, chol, rng);
    if ((x.array() > 0.0).all()) {
      if (trace) *trace = {attempt, false};
      return x;
    }
  }
  const Matrix precision = chol.inverse();
  Vector x(d);
  const Vector sd = chol.reconstruct().diagonal().array().sqrt();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (start && start->size() == d && (*start)(i) > 0.0)
      x(i) = (*start)(i);
    else
      x(i) = std::max(mu(i), 1e-3 * sd(i));
  }
  for (Eigen::Index l = 0; l < d; ++l) {
    double shift = 0.0;
    for (Eigen::Index m = 0; m < d; ++m)
      if (m != l) shift += precision(l, m) * (x(m) - mu(m));
    const double cond_var = 1.0 / precision(l, l);
    const double cond_mean = mu(l) - cond_var * shift;
    x(l) = sample_truncated_normal_above(cond_mean, std::sqrt(cond_var), 0.0, rng);
  }
  if (trace) *trace = {max_rejections, true};
  return x;
}

/// Wishart(V, dof) with V = L L', by Bartlett decomposition. Mean dof * V.
inline Matrix sample_wishart(const CholFactor& scale, double dof, Rng& rng) {
  const int d = scale.dim();
  if (!(dof >= d)) throw DataError("wishart: degrees of freedom below dimension");
  Matrix A = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    A(i, i) = std::sqrt(sample_chi_square(dof - i, rng));
    for (int j = 0; j < i; ++j) A(i, j) = sample_std_normal(rng);
  }
  const Matrix LA = scale.L() * A;
  Matrix W = LA * LA.transpose();
  return 0.5 * (W + W.transpose());
}

}  // namespace mrfmix
