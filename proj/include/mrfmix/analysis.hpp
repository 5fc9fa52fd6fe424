// Post-sampling analysis: convergence diagnostics, posterior summaries,
// item ranking and ROC evaluation.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "mrfmix/linalg.hpp"
#include "mrfmix/sampler.hpp"
#include "mrfmix/types.hpp"

namespace mrfmix {

// ---------------------------------------------------------------------------
// Convergence

/// Gelman-Rubin potential scale reduction sqrt(((n-1)/n W + B/n) / W) over
/// m >= 2 chains of equal length n >= 10. Constant identical chains give 1.
inline double rhat(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw DataError("rhat: need at least 2 chains");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains)
    if (c.size() != n) throw DataError("rhat: chains must have equal length");
  if (n < 10) throw DataError("rhat: need at least 10 draws per chain");
  const double m = static_cast<double>(chains.size());
  const double nn = static_cast<double>(n);
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / nn;
    double ss = 0.0;
    for (double v : c) ss += (v - mean) * (v - mean);
    means.push_back(mean);
    vars.push_back(ss / (nn - 1.0));
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= nn / (m - 1.0);
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
  if (w == 0.0) return b == 0.0 ? 1.0 : INFINITY;
  return std::sqrt(((nn - 1.0) / nn * w + b / nn) / w);
}

/// Sample quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double p) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

inline Summary summarize(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  const double n = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.q025 = quantile(v, 0.025);
  s.q975 = quantile(v, 0.975);
  return s;
}

/// A named scalar functional of a draw, monitored for convergence.
struct MonitoredParameter {
  std::string name;
  std::function<double(const PosteriorSample&)> value;
};

/// mu0, theta, the free Sigma entries, and pi1 or Phi.
inline std::vector<MonitoredParameter> monitored_parameters(const SamplerConfig& cfg, int d,
                                                            const std::vector<std::string>& cols,
                                                            const std::vector<std::string>& net_names) {
  std::vector<MonitoredParameter> out;
  auto col = [&](int l) {
    return static_cast<std::size_t>(l) < cols.size() ? cols[static_cast<std::size_t>(l)]
                                                     : std::to_string(l);
  };
  for (int l = 0; l < d; ++l)
    out.push_back({"mu0_" + col(l), [l](const PosteriorSample& s) { return s.mu0(l); }});
  for (int l = 0; l < d; ++l)
    out.push_back({"theta_" + col(l), [l](const PosteriorSample& s) { return s.theta(l); }});
  for (int j = 0; j < 2; ++j)
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        if (a != b && cfg.covariance == CovarianceMode::kDiagonal) continue;
        out.push_back({"sigma" + std::to_string(j) + "_" + col(a) + "_" + col(b),
                       [j, a, b](const PosteriorSample& s) {
                         return j == 0 ? s.sigma0(a, b) : s.sigma1(a, b);
                       }});
      }
  if (cfg.model == ModelKind::kStandardMixture) {
    out.push_back({"pi1", [](const PosteriorSample& s) { return *s.pi1; }});
  } else {
    out.push_back({"gamma", [](const PosteriorSample& s) { return s.mrf->gamma; }});
    for (std::size_t k = 0; k < net_names.size(); ++k) {
      if (cfg.fixed_betas) continue;
      out.push_back({"beta_" + net_names[k],
                     [k](const PosteriorSample& s) { return s.mrf->betas[k]; }});
    }
  }
  return out;
}

inline std::vector<std::vector<double>> traces(const MultiChainResult& r, const MonitoredParameter& p) {
  std::vector<std::vector<double>> out;
  for (const auto& c : r.chains) {
    std::vector<double> t;
    t.reserve(c.samples.size());
    for (const auto& s : c.samples) t.push_back(p.value(s));
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Correlations

struct CorrelationEstimate {
  Matrix mean;   // posterior mean correlation
  Matrix lower;  // 2.5% quantile
  Matrix upper;  // 97.5% quantile
};

/// Draw-wise correlations of the retained covariance draws of one component.
inline CorrelationEstimate posterior_correlations(const std::vector<Matrix>& sigma_draws) {
  if (sigma_draws.size() < 100) throw DataError("posterior correlations: need >= 100 draws");
  const auto d = sigma_draws.front().rows();
  CorrelationEstimate est{Matrix::Identity(d, d), Matrix::Identity(d, d), Matrix::Identity(d, d)};
  std::vector<Matrix> corr;
  corr.reserve(sigma_draws.size());
  for (const auto& s : sigma_draws) corr.push_back(to_correlation(s));
  std::vector<double> v(corr.size());
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      if (a == b) continue;
      for (std::size_t t = 0; t < corr.size(); ++t) v[t] = std::clamp(corr[t](a, b), -1.0, 1.0);
      const Summary s = summarize(v);
      est.mean(a, b) = s.mean;
      est.lower(a, b) = s.q025;
      est.upper(a, b) = s.q975;
    }
  return est;
}

inline std::vector<Matrix> sigma_draws(const MultiChainResult& r, int component) {
  std::vector<Matrix> out;
  for (const auto* s : r.pooled_samples()) out.push_back(component == 0 ? s->sigma0 : s->sigma1);
  return out;
}

// ---------------------------------------------------------------------------
// Ranking

struct RankTable {
  struct Row {
    std::string id;
    double p_hat;
    std::size_t rank;
  };
  std::vector<Row> rows;  // in descending p_hat order (stable in input order)
  std::size_t tied_at_one = 0;
};

/// Competition ranking: rank = 1 + number of items with strictly larger p.
inline RankTable rank_items(const std::vector<std::string>& ids, const std::vector<double>& p) {
  if (ids.size() != p.size()) throw DataError("rank: id and probability counts differ");
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("rank: probability outside [0,1]");
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] > p[b]; });
  RankTable table;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t i = order[pos];
    std::size_t rank = pos + 1;
    if (pos > 0 && p[i] == table.rows.back().p_hat) rank = table.rows.back().rank;
    table.rows.push_back({ids[i], p[i], rank});
    if (rank == 1) ++table.tied_at_one;
  }
  return table;
}

// ---------------------------------------------------------------------------
// ROC

struct RocCurve {
  std::vector<double> fpr;
  std::vector<double> tpr;
  double auc = 0.0;
};

inline double trapezoid_auc(const std::vector<double>& fpr, const std::vector<double>& tpr) {
  double area = 0.0;
  for (std::size_t i = 1; i < fpr.size(); ++i)
    area += (fpr[i] - fpr[i - 1]) * 0.5 * (tpr[i] + tpr[i - 1]);
  return area;
}

/// Threshold sweep over descending scores; tied scores form one vertex.
inline RocCurve roc(const std::vector<double>& scores, const Labels& truth) {
  if (scores.size() != truth.size()) throw DataError("roc: score and truth lengths differ");
  const auto positives = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), 1));
  const std::size_t negatives = truth.size() - positives;
  if (positives == 0 || negatives == 0) throw DataError("roc: truth must contain both classes");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  RocCurve c;
  c.fpr.push_back(0.0);
  c.tpr.push_back(0.0);
  std::size_t tp = 0, fp = 0;
  for (std::size_t pos = 0; pos < order.size();) {
    const double s = scores[order[pos]];
    while (pos < order.size() && scores[order[pos]] == s) {
      (truth[order[pos]] ? tp : fp)++;
      ++pos;
    }
    c.fpr.push_back(static_cast<double>(fp) / static_cast<double>(negatives));
    c.tpr.push_back(static_cast<double>(tp) / static_cast<double>(positives));
  }
  c.auc = trapezoid_auc(c.fpr, c.tpr);
  return c;
}

/// TPR of a curve at a given FPR: the top of any vertical run at exactly
/// that FPR, otherwise linear interpolation between neighboring vertices.
inline double tpr_at(const RocCurve& c, double f) {
  const auto it = std::upper_bound(c.fpr.begin(), c.fpr.end(), f);
  const auto hi = static_cast<std::size_t>(it - c.fpr.begin());
  if (hi == 0) return 0.0;
  const std::size_t lo = hi - 1;
  if (c.fpr[lo] == f || hi == c.fpr.size()) return c.tpr[lo];
  const double t = (f - c.fpr[lo]) / (c.fpr[hi] - c.fpr[lo]);
  return c.tpr[lo] + t * (c.tpr[hi] - c.tpr[lo]);
}

inline std::vector<double> uniform_grid(std::size_t points = 101) {
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) g[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

/// Vertical averaging: mean TPR across curves at each grid FPR. The result
/// starts at (0,0) and ends at (1,1).
inline RocCurve average_roc(const std::vector<RocCurve>& curves,
                            const std::vector<double>& grid = uniform_grid()) {
  if (curves.empty()) throw DataError("average_roc: no curves");
  RocCurve out;
  out.fpr.push_back(0.0);
  out.tpr.push_back(0.0);
  for (double f : grid) {
    double sum = 0.0;
    for (const auto& c : curves) sum += tpr_at(c, f);
    out.fpr.push_back(f);
    out.tpr.push_back(sum / static_cast<double>(curves.size()));
  }
  if (out.fpr.back() != 1.0 || out.tpr.back() != 1.0) {
    out.fpr.push_back(1.0);
    out.tpr.push_back(1.0);
  }
  out.auc = trapezoid_auc(out.fpr, out.tpr);
  return out;
}

}  // namespace mrfmix
