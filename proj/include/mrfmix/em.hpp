// Maximum-likelihood fit of the two-component normal mixture by EM, used as
// a frequentist cross-check of the Bayesian posterior means.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "mrfmix/distributions.hpp"
#include "mrfmix/linalg.hpp"
#include "mrfmix/mrf.hpp"
#include "mrfmix/sampler.hpp"
#include "mrfmix/types.hpp"

namespace mrfmix {

struct EmOptions {
  double tol = 1e-8;
  int max_iter = 500;
  int random_restarts = 4;
  std::uint64_t seed = 1;
};

struct EmResult {
  CovarianceMode mode = CovarianceMode::kGeneral;
  double pi1 = 0.5;
  Vector mu0, mu1;
  Matrix sigma0, sigma1;
  std::vector<double> loglik_trace;
  std::vector<double> responsibilities;  // Pr(T_i = 1 | x_i) at the fit
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;  // weight at a boundary or components merged
  std::vector<std::string> warnings;

  double loglik() const { return loglik_trace.empty() ? -INFINITY : loglik_trace.back(); }
};

/// Observed-data log-likelihood of the mixture.
inline double mixture_loglik(const RowMatrix& x, double pi1, const Vector& mu0, const Matrix& s0,
                             const Vector& mu1, const Matrix& s1) {
  const MvnDensity f0(mu0, s0), f1(mu1, s1);
  const double l0 = std::log1p(-pi1), l1 = std::log(pi1);
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double* row = x.data() + i * x.cols();
    const double a = l0 + f0(row), b = l1 + f1(row);
    total += std::max(a, b) + std::log1p(std::exp(-std::fabs(a - b)));
  }
  return total;
}

namespace detail {

/// True when `a` should be reported as the higher (target) component:
/// lexicographic comparison of the mean vectors.
inline bool lexicographically_greater(const Vector& a, const Vector& b) {
  for (Eigen::Index l = 0; l < a.size(); ++l) {
    if (a(l) > b(l)) return true;
    if (a(l) < b(l)) return false;
  }
  return false;
}

struct EmFitState {
  double pi1;
  Vector mu0, mu1;
  Matrix s0, s1;
};

inline EmFitState moments_from_split(const RowMatrix& x, const std::vector<double>& r,
                                     CovarianceMode mode, const Matrix& R,
                                     std::vector<std::string>* warnings) {
  const int d = static_cast<int>(x.cols());
  const auto G = x.rows();
  EmFitState st;
  double w1 = 0.0;
  Vector s1 = Vector::Zero(d), s0 = Vector::Zero(d);
  for (Eigen::Index i = 0; i < G; ++i) {
    const double ri = r[static_cast<std::size_t>(i)];
    w1 += ri;
    s1 += ri * x.row(i).transpose();
    s0 += (1.0 - ri) * x.row(i).transpose();
  }
  const double w0 = static_cast<double>(G) - w1;
  st.pi1 = std::clamp(w1 / static_cast<double>(G), 1e-12, 1.0 - 1e-12);
  st.mu1 = w1 > 0 ? Vector(s1 / w1) : Vector(x.colwise().mean().transpose());
  st.mu0 = w0 > 0 ? Vector(s0 / w0) : Vector(x.colwise().mean().transpose());
  Matrix c0 = Matrix::Zero(d, d), c1 = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < G; ++i) {
    const double ri = r[static_cast<std::size_t>(i)];
    const Vector e1 = x.row(i).transpose() - st.mu1;
    const Vector e0 = x.row(i).transpose() - st.mu0;
    c1.noalias() += ri * e1 * e1.transpose();
    c0.noalias() += (1.0 - ri) * e0 * e0.transpose();
  }
  auto finish = [&](Matrix& scatter, double w, const char* name) -> Matrix {
    Matrix cov;
    if (w < d + 1.0) {
      const double ridge = d + 1.0;
      cov = (scatter + ridge * R) / (w + ridge);
      if (warnings)
        warnings->push_back(std::string("component ") + name +
                            " collapsed; covariance ridge-regularized");
    } else {
      cov = scatter / w;
    }
    if (mode == CovarianceMode::kDiagonal) cov = diagonal_part(cov);
    cov = 0.5 * (cov + cov.transpose());
    if (Eigen::LLT<Matrix>(cov).info() != Eigen::Success) {
      cov += 1e-8 * R.diagonal().asDiagonal().toDenseMatrix();
      if (warnings) warnings->push_back(std::string("component ") + name + " covariance jittered");
    }
    return cov;
  };
  st.s1 = finish(c1, w1, "1");
  st.s0 = finish(c0, w0, "0");
  return st;
}

inline std::vector<double> e_step(const RowMatrix& x, const EmFitState& st) {
  const MvnDensity f0(st.mu0, st.s0), f1(st.mu1, st.s1);
  const double l0 = std::log1p(-st.pi1), l1 = std::log(st.pi1);
  std::vector<double> r(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double* row = x.data() + i * x.cols();
    r[static_cast<std::size_t>(i)] = logistic((l1 + f1(row)) - (l0 + f0(row)));
  }
  return r;
}

inline EmResult run_em(const RowMatrix& x, std::vector<double> r, CovarianceMode mode,
                       const Matrix& R, const EmOptions& opt) {
  EmResult res;
  res.mode = mode;
  EmFitState st = moments_from_split(x, r, mode, R, &res.warnings);
  double prev = mixture_loglik(x, st.pi1, st.mu0, st.s0, st.mu1, st.s1);
  for (int it = 1; it <= opt.max_iter; ++it) {
    r = e_step(x, st);
    st = moments_from_split(x, r, mode, R, &res.warnings);
    const double ll = mixture_loglik(x, st.pi1, st.mu0, st.s0, st.mu1, st.s1);
    res.loglik_trace.push_back(ll);
    res.iterations = it;
    if (std::fabs(ll - prev) <= opt.tol * std::fabs(prev)) {
      res.converged = true;
      break;
    }
    prev = ll;
  }
  res.responsibilities = e_step(x, st);
  res.pi1 = st.pi1;
  res.mu0 = st.mu0;
  res.mu1 = st.mu1;
  res.sigma0 = st.s0;
  res.sigma1 = st.s1;
  return res;
}

/// Hard split of the projection onto the leading principal direction into
/// two clusters by one-dimensional 2-means.
inline std::vector<double> principal_split(const RowMatrix& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const RowMatrix c = x.rowwise() - mean;
  Matrix cov = c.transpose() * c / static_cast<double>(std::max<Eigen::Index>(1, x.rows() - 1));
  // Standardize so that scale differences between sources do not decide the direction.
  const Vector sd = cov.diagonal().array().sqrt().max(1e-300);
  const Matrix corr = to_correlation(cov);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(corr);
  Vector dir = eig.eigenvectors().col(corr.rows() - 1);
  if (dir.sum() < 0) dir = -dir;
  std::vector<double> proj(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    proj[static_cast<std::size_t>(i)] = (c.row(i).transpose().array() / sd.array()).matrix().dot(dir);
  auto [lo_it, hi_it] = std::minmax_element(proj.begin(), proj.end());
  double lo = *lo_it, hi = *hi_it;
  for (int iter = 0; iter < 100; ++iter) {
    const double cut = 0.5 * (lo + hi);
    double s_lo = 0, s_hi = 0;
    std::size_t n_lo = 0, n_hi = 0;
    for (double p : proj) {
      if (p > cut) {
        s_hi += p;
        ++n_hi;
      } else {
        s_lo += p;
        ++n_lo;
      }
    }
    const double new_lo = n_lo ? s_lo / static_cast<double>(n_lo) : lo;
    const double new_hi = n_hi ? s_hi / static_cast<double>(n_hi) : hi;
    if (new_lo == lo && new_hi == hi) break;
    lo = new_lo;
    hi = new_hi;
  }
  const double cut = 0.5 * (lo + hi);
  std::vector<double> r(proj.size());
  for (std::size_t i = 0; i < proj.size(); ++i) r[i] = proj[i] > cut ? 1.0 : 0.0;
  return r;
}

/// Random split: two random items as centers, nearest-center assignment in
/// standardized coordinates.
inline std::vector<double> random_split(const RowMatrix& x, Rng& rng) {
  const auto G = static_cast<std::size_t>(x.rows());
  const Vector sd = ((x.rowwise() - x.colwise().mean()).array().square().colwise().sum() /
                     static_cast<double>(std::max<std::size_t>(1, G - 1)))
                        .sqrt()
                        .transpose();
  const auto a = static_cast<Eigen::Index>(rng.next_u64() % G);
  auto b = static_cast<Eigen::Index>(rng.next_u64() % G);
  if (b == a) b = (a + 1) % static_cast<Eigen::Index>(G);
  std::vector<double> r(G);
  for (std::size_t i = 0; i < G; ++i) {
    const auto row = x.row(static_cast<Eigen::Index>(i));
    const double da = ((row - x.row(a)).transpose().array() / sd.array()).square().sum();
    const double db = ((row - x.row(b)).transpose().array() / sd.array()).square().sum();
    r[i] = db < da ? 1.0 : 0.0;
  }
  return r;
}

inline bool has_both_classes(const std::vector<double>& r) {
  const double s = std::accumulate(r.begin(), r.end(), 0.0);
  return s >= 1.0 && s <= static_cast<double>(r.size()) - 1.0;
}

}  // namespace detail

/// Two-component EM with a principal-direction start plus random restarts;
/// the highest final log-likelihood wins. Labels are canonicalized so that
/// component 1 has the lexicographically larger mean.
inline EmResult em_fit(const GeneTable& table, CovarianceMode mode, const EmOptions& opt = {}) {
  const auto& x = table.scores();
  const int d = table.dim();
  if (static_cast<int>(table.size()) <= d + 1) throw DataError("em: need more than d+1 items");
  const Matrix R = build_prior_spec(table).R;

  std::vector<std::vector<double>> starts;
  starts.push_back(detail::principal_split(x));
  Rng rng(opt.seed);
  for (int k = 0; k < opt.random_restarts; ++k) starts.push_back(detail::random_split(x, rng));

  EmResult best;
  bool have = false;
  for (auto& start : starts) {
    if (!detail::has_both_classes(start)) continue;
    EmResult res = detail::run_em(x, start, mode, R, opt);
    if (!have || res.loglik() > best.loglik()) {
      best = std::move(res);
      have = true;
    }
  }
  if (!have) throw NumericalError("em: no usable initialization");

  if (detail::lexicographically_greater(best.mu0, best.mu1)) {
    std::swap(best.mu0, best.mu1);
    std::swap(best.sigma0, best.sigma1);
    best.pi1 = 1.0 - best.pi1;
    for (auto& r : best.responsibilities) r = 1.0 - r;
  }
  const Vector sd = R.diagonal().array().sqrt();
  const double separation = ((best.mu1 - best.mu0).array() / sd.array()).abs().maxCoeff();
  if (best.pi1 < 1e-3 || best.pi1 > 1.0 - 1e-3 || separation < 1e-3) {
    best.degenerate = true;
    best.warnings.push_back("degenerate fit: mixture weight at boundary or components merged");
  }
  return best;
}

// ---------------------------------------------------------------------------

struct ComparisonRow {
  std::string parameter;
  double mle = 0.0;
  double posterior_mean = 0.0;
  double abs_diff = 0.0;
  double rel_diff = 0.0;
  bool flagged = false;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  double mean_threshold = 0.05;

  bool any_flagged() const {
    return std::any_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.flagged; });
  }
  double max_mean_diff() const {
    double m = 0.0;
    for (const auto& r : rows)
      if (r.parameter.rfind("mu", 0) == 0) m = std::max(m, r.abs_diff);
    return m;
  }
};

/// Parameter-by-parameter differences between the MLE and posterior means.
/// Component-mean differences above `mean_threshold` are flagged.
inline ComparisonReport compare_em_vs_posterior(const EmResult& em, const MultiChainResult& bayes,
                                                const std::vector<std::string>& columns,
                                                double mean_threshold = 0.05) {
  if (em.mode != bayes.config.covariance)
    throw DataError("comparison: covariance modes differ between EM and posterior fit");
  ComparisonReport rep;
  rep.mean_threshold = mean_threshold;
  auto add = [&](std::string name, double mle, double post, bool is_mean) {
    ComparisonRow row{std::move(name), mle, post, std::fabs(mle - post), 0.0, false};
    row.rel_diff = row.abs_diff / std::max(std::fabs(mle), 1e-12);
    if (row.abs_diff == 0.0) row.rel_diff = 0.0;
    row.flagged = is_mean && row.abs_diff > mean_threshold;
    rep.rows.push_back(std::move(row));
  };
  const Vector m0 = bayes.mean_mu0(), m1 = bayes.mean_mu1();
  const Matrix s0 = bayes.mean_sigma(0), s1 = bayes.mean_sigma(1);
  const auto d = em.mu0.size();
  if (m0.size() != d) throw DataError("comparison: dimension mismatch");
  auto col = [&](Eigen::Index l) {
    return static_cast<std::size_t>(l) < columns.size() ? columns[static_cast<std::size_t>(l)]
                                                        : std::to_string(l);
  };
  if (bayes.config.model == ModelKind::kStandardMixture)
    add("pi1", em.pi1, bayes.pooled_mean([](const PosteriorSample& s) { return *s.pi1; }), false);
  for (Eigen::Index l = 0; l < d; ++l) add("mu0_" + col(l), em.mu0(l), m0(l), true);
  for (Eigen::Index l = 0; l < d; ++l) add("mu1_" + col(l), em.mu1(l), m1(l), true);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = a; b < d; ++b) {
      add("sigma0_" + col(a) + "_" + col(b), em.sigma0(a, b), s0(a, b), false);
      add("sigma1_" + col(a) + "_" + col(b), em.sigma1(a, b), s1(a, b), false);
    }
  return rep;
}

}  // namespace mrfmix
