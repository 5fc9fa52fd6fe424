// Synthetic data: community-structured networks, MRF-prior label
// generation and component-wise normal scores.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mrfmix/distributions.hpp"
#include "mrfmix/linalg.hpp"
#include "mrfmix/mrf.hpp"
#include "mrfmix/rng.hpp"
#include "mrfmix/types.hpp"

namespace mrfmix {

/// Planted-partition graph over a random subset of the items.
struct NetworkGenSpec {
  std::string name;
  double coverage = 1.0;         // fraction of items that are network nodes
  double mean_degree = 5.0;      // over network nodes
  double within_fraction = 0.8;  // share of edges inside communities
  double within_density = 0.3;   // edge probability inside a community
};

struct ComponentSpec {
  Vector mean;
  Matrix cov;
};

struct SimulationSpec {
  std::size_t n_items = 3779;
  std::size_t n_targets = 487;  // calibrates gamma when gamma is unset
  std::vector<std::string> columns{"B", "E", "S"};
  ComponentSpec nontarget;
  ComponentSpec target;
  std::vector<NetworkGenSpec> networks;
  std::vector<double> betas;    // one per network
  std::optional<double> gamma;  // derived from n_targets when unset
  std::optional<Labels> labels;  // explicit label source; skips MRF generation
  int label_sweeps = 500;
  int n_replicates = 20;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_items < 2) throw DataError("simulation: need at least 2 items");
    if (!(n_targets > 0 && n_targets < n_items))
      throw DataError("simulation: targets must satisfy 0 < targets < items");
    const auto d = static_cast<Eigen::Index>(columns.size());
    for (const auto* c : {&nontarget, &target}) {
      if (c->mean.size() != d || c->cov.rows() != d || c->cov.cols() != d)
        throw DataError("simulation: component dimensions do not match columns");
      if (Eigen::LLT<Matrix>(c->cov).info() != Eigen::Success)
        throw DataError("simulation: component covariance not positive definite");
    }
    if (betas.size() != networks.size())
      throw DataError("simulation: need one beta per network");
    for (double b : betas)
      if (!(b >= 0.0 && b < kBetaUpper)) throw DataError("simulation: beta outside [0, 6)");
    for (const auto& n : networks) {
      if (!(n.coverage > 0.0 && n.coverage <= 1.0))
        throw DataError("simulation: network coverage must be in (0,1]");
      if (!(n.mean_degree > 0.0)) throw DataError("simulation: mean degree must be > 0");
      if (!(n.within_fraction >= 0.0 && n.within_fraction <= 1.0))
        throw DataError("simulation: within_fraction must be in [0,1]");
      if (!(n.within_density > 0.0 && n.within_density <= 1.0))
        throw DataError("simulation: within_density must be in (0,1]");
    }
    if (labels && labels->size() != n_items)
      throw DataError("simulation: explicit labels have the wrong length");
    if (label_sweeps < 1) throw DataError("simulation: label_sweeps must be >= 1");
    if (n_replicates < 1) throw DataError("simulation: replicates must be >= 1");
  }
};

inline std::string item_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "g%05zu", i + 1);
  return buf;
}

inline Matrix covariance_from(const Vector& sd, const Matrix& corr) {
  return sd.asDiagonal() * corr * sd.asDiagonal();
}

namespace detail {
inline std::size_t uniform_index(std::size_t n, Rng& rng) {
  return std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(i, rng)]);
}
}  // namespace detail

/// Edge list of one planted-partition network. Every network node gets at
/// least one neighbor; items outside the node set stay singletons.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> generate_network(
    std::size_t n_items, const NetworkGenSpec& spec, Rng& rng) {
  std::vector<std::uint32_t> nodes(n_items);
  std::iota(nodes.begin(), nodes.end(), 0U);
  detail::shuffle(nodes, rng);
  const auto n_nodes = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::llround(spec.coverage * static_cast<double>(n_items))));
  nodes.resize(std::min(n_nodes, n_items));
  std::sort(nodes.begin(), nodes.end());
  detail::shuffle(nodes, rng);

  const double within_degree = spec.within_fraction * spec.mean_degree;
  const auto community_size = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(within_degree / spec.within_density)) + 1, 2,
      nodes.size());
  std::vector<std::size_t> community(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) community[i] = i / community_size;

  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  auto add = [&](std::size_t a, std::size_t b) {
    const auto u = nodes[a], v = nodes[b];
    if (u != v) edges.insert(u < v ? std::pair{u, v} : std::pair{v, u});
  };
  const double p_in = std::min(1.0, within_degree / static_cast<double>(community_size - 1));
  for (std::size_t start = 0; start < nodes.size(); start += community_size) {
    const std::size_t end = std::min(nodes.size(), start + community_size);
    for (std::size_t a = start; a < end; ++a)
      for (std::size_t b = a + 1; b < end; ++b)
        if (rng.uniform() < p_in) add(a, b);
  }
  const auto n_between = static_cast<std::size_t>(std::llround(
      (1.0 - spec.within_fraction) * spec.mean_degree * static_cast<double>(nodes.size()) / 2.0));
  for (std::size_t e = 0, tries = 0; e < n_between && tries < 20 * n_between + 100; ++tries) {
    const auto a = detail::uniform_index(nodes.size(), rng);
    const auto b = detail::uniform_index(nodes.size(), rng);
    if (community[a] == community[b]) continue;
    const auto before = edges.size();
    add(a, b);
    if (edges.size() > before) ++e;
  }
  std::vector<std::size_t> degree(n_items, 0);
  for (auto [u, v] : edges) {
    ++degree[u];
    ++degree[v];
  }
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    if (degree[nodes[a]] > 0) continue;
    const std::size_t base = community[a] * community_size;
    const std::size_t span = std::min(nodes.size(), base + community_size) - base;
    std::size_t b = base + detail::uniform_index(span, rng);
    if (b == a) b = a + 1 < nodes.size() ? a + 1 : a - 1;
    add(a, b);
    ++degree[nodes[a]];
    ++degree[nodes[b]];
  }
  return {edges.begin(), edges.end()};
}

/// Single-site Gibbs on the auto-logistic prior for `sweeps` sweeps.
/// Returns the final labels; `mean_fraction` (if given) receives the mean
/// target fraction over the second half of the sweeps.
inline Labels sample_mrf_labels(const NetworkSet& nets, const MrfParams& phi, int sweeps, Rng& rng,
                                double* mean_fraction = nullptr) {
  const std::size_t G = nets.n_items();
  Labels T(G);
  for (auto& t : T) t = rng.uniform() < 0.5 ? 1 : 0;
  NeighborStats stats(T, nets);
  double frac_sum = 0.0;
  int frac_n = 0;
  for (int s = 0; s < sweeps; ++s) {
    std::size_t ones = 0;
    for (std::size_t i = 0; i < G; ++i) {
      const std::uint8_t next = rng.uniform() < logistic(conditional_logit(i, stats, phi)) ? 1 : 0;
      if (next != T[i]) {
        stats.on_flip(i, T[i], next);
        T[i] = next;
      }
      ones += T[i];
    }
    if (s >= sweeps / 2) {
      frac_sum += static_cast<double>(ones) / static_cast<double>(G);
      ++frac_n;
    }
  }
  if (mean_fraction) *mean_fraction = frac_n ? frac_sum / frac_n : 0.0;
  return T;
}

/// Labels from the auto-logistic prior holding exactly `n_targets` ones:
/// after `sweeps` burn-in sweeps, single-site Gibbs continues and stops at
/// the first update where the count equals `n_targets`.
inline Labels sample_mrf_labels_with_count(const NetworkSet& nets, const MrfParams& phi, int sweeps,
                                           std::size_t n_targets, Rng& rng, int max_extra_sweeps = 1000) {
  Labels T = sample_mrf_labels(nets, phi, sweeps, rng);
  NeighborStats stats(T, nets);
  auto ones = static_cast<std::size_t>(std::count(T.begin(), T.end(), 1));
  if (ones == n_targets) return T;
  for (int s = 0; s < max_extra_sweeps; ++s) {
    for (std::size_t i = 0; i < T.size(); ++i) {
      const std::uint8_t next = rng.uniform() < logistic(conditional_logit(i, stats, phi)) ? 1 : 0;
      if (next == T[i]) continue;
      stats.on_flip(i, T[i], next);
      T[i] = next;
      next ? ++ones : --ones;
      if (ones == n_targets) return T;
    }
  }
  throw NumericalError("simulation: MRF labels never reached " + std::to_string(n_targets) +
                       " targets; check gamma");
}

/// Intercept whose MRF prior yields the requested mean target fraction, by
/// bisection on short seeded Gibbs runs.
inline double calibrate_gamma(const NetworkSet& nets, const std::vector<double>& betas,
                              double target_fraction, std::uint64_t seed, int sweeps = 200) {
  double lo = -10.0, hi = 6.0;
  for (int it = 0; it < 24; ++it) {
    const double mid = 0.5 * (lo + hi);
    Rng rng(derive_seed(seed, 0xCA11B8A7EULL));
    double frac = 0.0;
    sample_mrf_labels(nets, MrfParams{mid, betas}, sweeps, rng, &frac);
    (frac < target_fraction ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Networks and truth labels shared by every replicate of a simulation.
struct SimulatedDesign {
  std::vector<std::string> ids;
  NetworkSet nets;
  std::vector<std::string> network_names;
  MrfParams phi;
  Labels truth;
};

inline SimulatedDesign build_design(const SimulationSpec& spec) {
  spec.validate();
  SimulatedDesign design;
  for (std::size_t i = 0; i < spec.n_items; ++i) design.ids.push_back(item_id(i));
  design.nets = NetworkSet(spec.n_items);
  for (std::size_t k = 0; k < spec.networks.size(); ++k) {
    Rng rng(derive_seed(spec.seed, 100 + k));
    design.nets.add(spec.networks[k].name, generate_network(spec.n_items, spec.networks[k], rng));
    design.network_names.push_back(spec.networks[k].name);
  }
  design.phi.betas = spec.betas;
  const double fraction = static_cast<double>(spec.n_targets) / static_cast<double>(spec.n_items);
  design.phi.gamma =
      spec.gamma ? *spec.gamma : calibrate_gamma(design.nets, spec.betas, fraction, spec.seed);
  if (spec.labels) {
    design.truth = *spec.labels;
  } else {
    Rng rng(derive_seed(spec.seed, 200));
    design.truth = spec.gamma ? sample_mrf_labels(design.nets, design.phi, spec.label_sweeps, rng)
                              : sample_mrf_labels_with_count(design.nets, design.phi,
                                                             spec.label_sweeps, spec.n_targets, rng);
  }
  const auto ones = static_cast<std::size_t>(std::count(design.truth.begin(), design.truth.end(), 1));
  if (ones == 0 || ones == spec.n_items)
    throw NumericalError("simulation: generated labels contain a single class");
  return design;
}

/// Scores given labels: x_i ~ N(mean_{T_i}, cov_{T_i}).
inline GeneTable simulate_scores(const SimulationSpec& spec, const std::vector<std::string>& ids,
                                 const Labels& truth, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(spec.columns.size());
  RowMatrix x(static_cast<Eigen::Index>(ids.size()), d);
  const CholFactor c0(spec.nontarget.cov), c1(spec.target.cov);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Vector v = truth[i] ? sample_mvn(spec.target.mean, c1, rng)
                              : sample_mvn(spec.nontarget.mean, c0, rng);
    x.row(static_cast<Eigen::Index>(i)) = v.transpose();
  }
  return GeneTable(ids, spec.columns, std::move(x));
}

/// Replicate r (0-based) of a simulation.
inline GeneTable simulate_replicate(const SimulationSpec& spec, const SimulatedDesign& design, int r) {
  Rng rng(derive_seed(spec.seed, 1000 + static_cast<std::uint64_t>(r)));
  return simulate_scores(spec, design.ids, design.truth, rng);
}

/// One complete data set (table + truth labels) from a spec.
inline std::pair<GeneTable, Labels> simulate_dataset(const SimulationSpec& spec) {
  const SimulatedDesign design = build_design(spec);
  return {simulate_replicate(spec, design, 0), design.truth};
}

// ---------------------------------------------------------------------------
// Default design

/// Fitted LexA-scale values: component means, target-fraction and network
/// weights from the real-data fit, conditional correlations by component.
struct DesignDefaults {
  static Vector nontarget_mean() { return (Vector(3) << 0.11, 0.02, 13.35).finished(); }
  static Vector target_mean() { return (Vector(3) << 0.50, 0.26, 14.58).finished(); }
  static Matrix nontarget_corr() {
    return (Matrix(3, 3) << 1.0, 0.013, -0.013, 0.013, 1.0, 0.010, -0.013, 0.010, 1.0).finished();
  }
  static Matrix target_corr() {
    return (Matrix(3, 3) << 1.0, 0.119, 0.475, 0.119, 1.0, 0.077, 0.475, 0.077, 1.0).finished();
  }
  /// Conditional standard deviations of (B, E, S): the binding and
  /// expression mean gaps are two SDs, the sequence gap one SD, so sequence
  /// is the least informative source.
  static Vector component_sd() { return (Vector(3) << 0.195, 0.12, 1.23).finished(); }

  static constexpr std::size_t kItems = 3779;
  static constexpr std::size_t kTargets = 487;
  static constexpr double kBetaCoexpression = 1.06;
  static constexpr double kBetaGo = 0.61;
};

/// The default simulation at a given item count. Network node coverage and
/// edge density are held at the real networks' values (3,208 and 1,644 of
/// 3,779 items; 86,791 and 116,422 edges), so mean degree scales with size.
inline SimulationSpec default_simulation(std::size_t n_items = DesignDefaults::kItems,
                                         std::uint64_t seed = 1, int replicates = 20) {
  SimulationSpec spec;
  spec.n_items = n_items;
  spec.n_targets = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(DesignDefaults::kTargets) *
                                                static_cast<double>(n_items) /
                                                static_cast<double>(DesignDefaults::kItems))));
  const Vector sd = DesignDefaults::component_sd();
  spec.nontarget = {DesignDefaults::nontarget_mean(),
                    covariance_from(sd, DesignDefaults::nontarget_corr())};
  spec.target = {DesignDefaults::target_mean(), covariance_from(sd, DesignDefaults::target_corr())};

  const double scale = static_cast<double>(n_items) / static_cast<double>(DesignDefaults::kItems);
  const double coexp_nodes = 3208.0, go_nodes = 1644.0;
  const double coexp_degree = 2.0 * 86791.0 / coexp_nodes;
  const double go_degree = 2.0 * 116422.0 / go_nodes;
  spec.networks.push_back({"coexp", coexp_nodes / DesignDefaults::kItems,
                           std::max(2.0, coexp_degree * scale), 0.8, 0.3});
  spec.networks.push_back({"go", go_nodes / DesignDefaults::kItems, std::max(2.0, go_degree * scale),
                           0.6, 0.3});
  spec.betas = {DesignDefaults::kBetaCoexpression, DesignDefaults::kBetaGo};
  spec.n_replicates = replicates;
  spec.seed = seed;
  return spec;
}

}  // namespace mrfmix
