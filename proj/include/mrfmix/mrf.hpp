// Auto-logistic Markov random field over K networks.
//
// The conditional log-odds of item i being a target is
//   gamma + sum_k beta_k * f_ik,  f_ik = (n1 - n0) / m
// where n1/n0 count i's neighbors on network k with label 1/0 and m = n0+n1.
// Singletons on network k have f_ik = 0.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mrfmix/types.hpp"

namespace mrfmix {

/// log(1 + e^x) without overflow.
inline double log1p_exp(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); }

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

/// Per (item, network) neighbor label counts, maintained under label flips.
class NeighborStats {
 public:
  NeighborStats() = default;

  NeighborStats(const Labels& labels, const NetworkSet& nets)
      : nets_(&nets), n_items_(nets.n_items()), n_nets_(nets.size()) {
    if (labels.size() != n_items_) throw DataError("neighbor stats: label length mismatch");
    n1_.assign(n_items_ * n_nets_, 0);
    m_.assign(n_items_ * n_nets_, 0);
    for (std::size_t k = 0; k < n_nets_; ++k) {
      const auto& nbs = nets[k].neighbors;
      for (std::size_t i = 0; i < n_items_; ++i) {
        std::uint32_t ones = 0;
        for (auto j : nbs[i]) ones += labels[j];
        n1_[i * n_nets_ + k] = ones;
        m_[i * n_nets_ + k] = static_cast<std::uint32_t>(nbs[i].size());
      }
    }
  }

  std::size_t n_items() const { return n_items_; }
  std::size_t n_networks() const { return n_nets_; }

  std::uint32_t n1(std::size_t i, std::size_t k) const { return n1_[i * n_nets_ + k]; }
  std::uint32_t m(std::size_t i, std::size_t k) const { return m_[i * n_nets_ + k]; }
  std::uint32_t n0(std::size_t i, std::size_t k) const { return m(i, k) - n1(i, k); }

  /// Normalized field (n1 - n0) / m, zero for singletons.
  double field(std::size_t i, std::size_t k) const {
    const auto mm = m(i, k);
    if (mm == 0) return 0.0;
    return (2.0 * n1(i, k) - mm) / mm;
  }

  /// Updates counts after item i changed from `old_label` to `new_label`.
  /// O(deg(i)) over all networks.
  void on_flip(std::size_t i, std::uint8_t old_label, std::uint8_t new_label) {
    if (old_label == new_label) return;
    for (std::size_t k = 0; k < n_nets_; ++k) {
      for (auto j : (*nets_)[k].neighbors[i]) {
        auto& c = n1_[j * n_nets_ + k];
        if (new_label) ++c;
        else --c;
      }
    }
  }

  bool operator==(const NeighborStats& o) const {
    return n_items_ == o.n_items_ && n_nets_ == o.n_nets_ && n1_ == o.n1_ && m_ == o.m_;
  }

 private:
  const NetworkSet* nets_ = nullptr;
  std::size_t n_items_ = 0;
  std::size_t n_nets_ = 0;
  std::vector<std::uint32_t> n1_;
  std::vector<std::uint32_t> m_;
};

inline NeighborStats neighbor_stats(const Labels& labels, const NetworkSet& nets) {
  return NeighborStats(labels, nets);
}

/// gamma + sum_k beta_k f_ik.
inline double conditional_logit(std::size_t i, const NeighborStats& stats, const MrfParams& phi) {
  double eta = phi.gamma;
  for (std::size_t k = 0; k < stats.n_networks(); ++k) eta += phi.betas[k] * stats.field(i, k);
  return eta;
}

/// Log pseudolikelihood sum_i [T_i eta_i - log(1 + e^eta_i)] from current stats.
inline double log_pseudolikelihood(const Labels& labels, const NeighborStats& stats,
                                   const MrfParams& phi) {
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double eta = conditional_logit(i, stats, phi);
    total += (labels[i] ? eta : 0.0) - log1p_exp(eta);
  }
  return total;
}

inline double log_pseudolikelihood(const Labels& labels, const NetworkSet& nets,
                                   const MrfParams& phi) {
  if (phi.betas.size() != nets.size()) throw DataError("pseudolikelihood: beta count mismatch");
  return log_pseudolikelihood(labels, NeighborStats(labels, nets), phi);
}

}  // namespace mrfmix
