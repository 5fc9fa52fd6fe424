// Gibbs / Metropolis-within-Gibbs sampler for the two-component normal
// mixture with either an i.i.d. Bernoulli(pi1) or an auto-logistic MRF
// prior on the latent labels.
//
// One sweep updates, in order: mu0, theta, Sigma0, Sigma1, every label
// (ascending index), then pi1 or Phi.
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mrfmix/distributions.hpp"
#include "mrfmix/linalg.hpp"
#include "mrfmix/mrf.hpp"
#include "mrfmix/rng.hpp"
#include "mrfmix/types.hpp"

namespace mrfmix {

/// Overdispersed starting points: the initial target set is every item whose
/// first score exceeds this quantile.
inline constexpr std::array<double, 3> kInitQuantiles{0.80, 0.87, 0.95};

struct ChainStart {
  std::uint64_t seed = 0;
  double init_quantile = 0.87;
  bool operator==(const ChainStart&) const = default;
};

struct SamplerConfig {
  int n_chains = 3;
  int n_burnin = 5000;
  int n_keep = 10000;
  int thin = 1;
  ModelKind model = ModelKind::kStandardMixture;
  CovarianceMode covariance = CovarianceMode::kGeneral;
  std::uint64_t seed = 1;
  double rw_target_accept = 0.23;
  bool rw_adapt = true;  // Robbins-Monro during burn-in only
  int rw_adapt_batch = 50;
  double rw_step_init = 0.1;
  /// When set, the betas are held at these values and only gamma moves.
  std::optional<std::vector<double>> fixed_betas;
  /// Worker threads for independent chains; 0 means one per chain.
  int threads = 0;
  /// Explicit per-chain seeds and starts; empty means derived from `seed`.
  std::vector<ChainStart> chain_starts;

  void validate() const {
    if (n_chains < 1) throw DataError("sampler: n_chains must be >= 1");
    if (n_burnin < 0) throw DataError("sampler: n_burnin must be >= 0");
    if (n_keep < 1) throw DataError("sampler: n_keep must be >= 1");
    if (thin < 1) throw DataError("sampler: thin must be >= 1");
    if (rw_adapt_batch < 1) throw DataError("sampler: adaptation batch must be >= 1");
    if (!(rw_step_init > 0.0)) throw DataError("sampler: rw_step_init must be > 0");
    if (!chain_starts.empty() && static_cast<int>(chain_starts.size()) != n_chains)
      throw DataError("sampler: chain_starts size must equal n_chains");
  }

  ChainStart start_for(int chain) const {
    if (!chain_starts.empty()) return chain_starts[static_cast<std::size_t>(chain)];
    return {derive_seed(seed, static_cast<std::uint64_t>(chain)),
            kInitQuantiles[static_cast<std::size_t>(chain) % kInitQuantiles.size()]};
  }

  int retained_per_chain() const { return (n_keep + thin - 1) / thin; }
};

/// Everything that evolves along one chain. Exact resume needs only this
/// plus the (immutable) data, networks, prior and config.
struct ChainState {
  Labels labels;
  MixtureParams mixture;
  std::optional<MrfParams> mrf;
  StreamSet rng;
  std::int64_t iteration = 0;
  std::vector<double> rw_step;  // per Phi coordinate (gamma, beta_1..beta_K)
  std::int64_t accept_count = 0;
  std::int64_t propose_count = 0;
  std::int64_t batch_accepts = 0;  // within the current adaptation batch
  // Post-burn-in bookkeeping.
  std::int64_t kept_accepts = 0;
  std::int64_t kept_proposals = 0;

  bool operator==(const ChainState&) const = default;
};

/// One retained draw.
struct PosteriorSample {
  Vector mu0;
  Vector theta;
  Matrix sigma0;
  Matrix sigma1;
  std::optional<double> pi1;
  std::optional<MrfParams> mrf;
  std::size_t n_targets = 0;

  Vector mu1() const { return mu0 + theta; }
};

/// The inputs a chain reads but never writes.
struct ModelInputs {
  const GeneTable& table;
  const NetworkSet& nets;
  const PriorSpec& prior;
};

// ---------------------------------------------------------------------------
// Full conditionals

struct GaussianConditional {
  Vector mean;
  Matrix cov;
};

namespace detail {
inline Matrix diagonal_part(const Matrix& m) {
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  out.diagonal() = m.diagonal();
  return out;
}

inline std::size_t count_label(const Labels& T, std::uint8_t j) {
  return static_cast<std::size_t>(std::count(T.begin(), T.end(), j));
}
}  // namespace detail

/// (mu0 | ...) ~ MVN((n0 S0^-1 + C^-1)^-1 S0^-1 sum_{T=0} x, (n0 S0^-1 + C^-1)^-1).
inline GaussianConditional mu0_conditional(const RowMatrix& x, const Labels& T,
                                           const MixtureParams& p, const PriorSpec& prior) {
  const int d = static_cast<int>(x.cols());
  Vector sum = Vector::Zero(d);
  std::size_t n0 = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (T[static_cast<std::size_t>(i)] == 0) {
      sum += x.row(i).transpose();
      ++n0;
    }
  const Matrix s0_inv = inverse_spd(p.sigma0);
  const Matrix cov = inverse_spd(static_cast<double>(n0) * s0_inv + inverse_spd(prior.C));
  return {cov * (s0_inv * sum), cov};
}

/// (theta | ...) before truncation to theta > 0.
inline GaussianConditional theta_conditional(const RowMatrix& x, const Labels& T,
                                             const MixtureParams& p, const PriorSpec& prior) {
  const int d = static_cast<int>(x.cols());
  Vector sum = Vector::Zero(d);
  std::size_t n1 = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (T[static_cast<std::size_t>(i)] == 1) {
      sum += x.row(i).transpose() - p.mu0;
      ++n1;
    }
  const Matrix s1_inv = inverse_spd(p.sigma1);
  const Matrix cov = inverse_spd(static_cast<double>(n1) * s1_inv + inverse_spd(prior.C));
  return {cov * (s1_inv * sum), cov};
}

inline Vector draw_mu0(const RowMatrix& x, const Labels& T, const MixtureParams& p,
                       const PriorSpec& prior, Rng& rng) {
  const auto c = mu0_conditional(x, T, p, prior);
  return sample_mvn(c.mean, CholFactor(c.cov), rng);
}

inline Vector draw_theta(const RowMatrix& x, const Labels& T, const MixtureParams& p,
                         const PriorSpec& prior, Rng& rng) {
  const auto c = theta_conditional(x, T, p, prior);
  return sample_truncated_mvn_positive(c.mean, CholFactor(c.cov), rng, &p.theta);
}

/// Residual scatter sum_{T=j} (x - mu_j)(x - mu_j)'.
inline Matrix residual_scatter(const RowMatrix& x, const Labels& T, const Vector& mu,
                               std::uint8_t j, std::size_t* n = nullptr) {
  const int d = static_cast<int>(x.cols());
  Matrix S = Matrix::Zero(d, d);
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (T[static_cast<std::size_t>(i)] == j) {
      const Vector r = x.row(i).transpose() - mu;
      S.noalias() += r * r.transpose();
      ++count;
    }
  if (n) *n = count;
  return S;
}

/// (Sigma_j^-1 | ...) ~ W((scatter + rho R)^-1, n_j + rho). In diagonal mode
/// each precision is the one-dimensional restriction: chi2_{n_j+rho} / (ss + rho R_ll).
inline Matrix draw_sigma(const RowMatrix& x, const Labels& T, const Vector& mu_j, std::uint8_t j,
                         CovarianceMode mode, const PriorSpec& prior, Rng& rng) {
  std::size_t n = 0;
  const Matrix scatter = residual_scatter(x, T, mu_j, j, &n);
  const double dof = static_cast<double>(n) + prior.rho;
  const int d = static_cast<int>(x.cols());
  if (mode == CovarianceMode::kDiagonal) {
    Matrix sigma = Matrix::Zero(d, d);
    for (int l = 0; l < d; ++l) {
      const double rate = scatter(l, l) + prior.rho * prior.R(l, l);
      const double precision = sample_chi_square(dof, rng) / rate;
      sigma(l, l) = 1.0 / precision;
    }
    return sigma;
  }
  const Matrix scale = inverse_spd(scatter + prior.rho * prior.R);
  const Matrix precision = sample_wishart(CholFactor(scale), dof, rng);
  return inverse_spd(precision);
}

/// pi1 | T ~ Beta(1 + n1, 1 + n0).
inline double draw_pi1(std::size_t n1, std::size_t n0, Rng& rng) {
  return sample_beta(1.0 + static_cast<double>(n1), 1.0 + static_cast<double>(n0), rng);
}

/// Conjugate pi1 update on a standard-mixture chain.
inline void update_pi1(ChainState& s) {
  if (s.mrf || !s.mixture.pi1) throw DataError("update_pi1: chain is not a standard mixture");
  const std::size_t n1 = detail::count_label(s.labels, 1);
  s.mixture.pi1 = draw_pi1(n1, s.labels.size() - n1, s.rng[Stream::kWeights]);
}

/// Sequential single-site Gibbs sweep over all labels in ascending order.
/// `prior_logit(i)` supplies the prior log-odds for item i given the
/// current state; `on_flip(i, old, new)` is called after each change.
template <typename PriorLogit, typename OnFlip>
std::size_t sweep_labels(const RowMatrix& x, Labels& T, const MixtureParams& p,
                         PriorLogit&& prior_logit, OnFlip&& on_flip, Rng& rng) {
  const MvnDensity f0(p.mu0, p.sigma0);
  const MvnDensity f1(p.mu1(), p.sigma1);
  std::size_t flips = 0;
  for (std::size_t i = 0; i < T.size(); ++i) {
    const double* row = x.data() + static_cast<Eigen::Index>(i) * x.cols();
    const double log_odds = prior_logit(i) + f1(row) - f0(row);
    const std::uint8_t next = rng.uniform() < logistic(log_odds) ? 1 : 0;
    if (next != T[i]) {
      const std::uint8_t old = T[i];
      T[i] = next;
      on_flip(i, old, next);
      ++flips;
    }
  }
  return flips;
}

/// Random-walk Metropolis for Phi against the log pseudolikelihood. Returns
/// whether the proposal was accepted. Proposals leaving [0, beta_upper) are
/// rejected outright.
inline bool metropolis_phi(const Labels& T, const NeighborStats& stats, MrfParams& phi,
                           const std::vector<double>& rw_step, double beta_upper,
                           const std::optional<std::vector<double>>& fixed_betas, Rng& rng) {
  MrfParams proposal = phi;
  proposal.gamma += rw_step[0] * sample_std_normal(rng);
  for (std::size_t k = 0; k < phi.betas.size(); ++k) {
    const double step = rw_step[k + 1] * sample_std_normal(rng);
    proposal.betas[k] = fixed_betas ? (*fixed_betas)[k] : phi.betas[k] + step;
  }
  for (double b : proposal.betas)
    if (!(b >= 0.0 && b < beta_upper)) return false;
  const double log_ratio =
      log_pseudolikelihood(T, stats, proposal) - log_pseudolikelihood(T, stats, phi);
  if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio) {
    phi = proposal;
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Chain driver

/// Sample mean and covariance of the rows where T == j (with fallbacks).
inline void group_moments(const RowMatrix& x, const Labels& T, std::uint8_t j, const Matrix& fallback,
                          Vector& mean, Matrix& cov) {
  const int d = static_cast<int>(x.cols());
  mean = Vector::Zero(d);
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (T[static_cast<std::size_t>(i)] == j) {
      mean += x.row(i).transpose();
      ++n;
    }
  if (n == 0) {
    mean = x.colwise().mean().transpose();
    cov = fallback;
    return;
  }
  mean /= static_cast<double>(n);
  if (n < static_cast<std::size_t>(d) + 2) {
    cov = fallback;
    return;
  }
  cov = residual_scatter(x, T, mean, j) / static_cast<double>(n - 1);
  cov += 1e-8 * fallback.diagonal().asDiagonal().toDenseMatrix();
  if (Eigen::LLT<Matrix>(cov).info() != Eigen::Success) cov = fallback;
}

/// Initial state: threshold the first score at the start's quantile, then
/// moment estimates within that split.
inline ChainState init_chain(const SamplerConfig& cfg, const ModelInputs& in,
                             const ChainStart& start) {
  const auto& x = in.table.scores();
  const std::size_t G = in.table.size();
  ChainState s;
  s.rng = StreamSet(start.seed);

  std::vector<double> first(G);
  for (std::size_t i = 0; i < G; ++i) first[i] = x(static_cast<Eigen::Index>(i), 0);
  std::vector<double> sorted = first;
  std::sort(sorted.begin(), sorted.end());
  const double q = std::clamp(start.init_quantile, 0.0, 1.0);
  const auto cut_index = std::min(G - 1, static_cast<std::size_t>(std::floor(q * static_cast<double>(G - 1))));
  const double cut = sorted[cut_index];
  s.labels.assign(G, 0);
  for (std::size_t i = 0; i < G; ++i) s.labels[i] = first[i] > cut ? 1 : 0;
  std::size_t n1 = detail::count_label(s.labels, 1);
  if (n1 == 0 || n1 == G) {
    // Degenerate split (ties); fall back to the top item only.
    std::fill(s.labels.begin(), s.labels.end(), 0);
    s.labels[static_cast<std::size_t>(std::max_element(first.begin(), first.end()) - first.begin())] = 1;
    n1 = 1;
  }

  Vector m0, m1;
  Matrix c0, c1;
  group_moments(x, s.labels, 0, in.prior.R, m0, c0);
  group_moments(x, s.labels, 1, in.prior.R, m1, c1);
  auto& mix = s.mixture;
  mix.mode = cfg.covariance;
  mix.mu0 = m0;
  mix.theta = m1 - m0;
  for (Eigen::Index l = 0; l < mix.theta.size(); ++l)
    mix.theta(l) = std::max(mix.theta(l), 0.05 * std::sqrt(in.prior.R(l, l)));
  mix.sigma0 = cfg.covariance == CovarianceMode::kDiagonal ? detail::diagonal_part(c0) : c0;
  mix.sigma1 = cfg.covariance == CovarianceMode::kDiagonal ? detail::diagonal_part(c1) : c1;
  const double frac = static_cast<double>(n1) / static_cast<double>(G);

  if (cfg.model == ModelKind::kStandardMixture) {
    mix.pi1 = frac;
  } else {
    if (in.nets.size() == 0) throw DataError("MRF model requires at least one network");
    if (in.nets.n_items() != G) throw DataError("network set does not match the score table");
    MrfParams phi;
    phi.gamma = logit(frac);
    auto& init_rng = s.rng[Stream::kInit];
    for (std::size_t k = 0; k < in.nets.size(); ++k) phi.betas.push_back(2.0 * init_rng.uniform());
    if (cfg.fixed_betas) {
      if (cfg.fixed_betas->size() != in.nets.size())
        throw DataError("fixed_betas size does not match network count");
      phi.betas = *cfg.fixed_betas;
    }
    s.mrf = phi;
    s.rw_step.assign(in.nets.size() + 1, cfg.rw_step_init);
  }
  return s;
}

struct ChainResult {
  std::vector<PosteriorSample> samples;
  std::vector<std::uint64_t> label_counts;  // retained draws with T_i = 1
  std::uint64_t n_retained = 0;
  ChainState final_state;

  /// Post-burn-in Metropolis acceptance rate for Phi (NaN for SMJM).
  double acceptance_rate() const {
    if (final_state.kept_proposals == 0) return std::nan("");
    return static_cast<double>(final_state.kept_accepts) /
           static_cast<double>(final_state.kept_proposals);
  }
};

/// Runs sweeps on a state until it has completed `until_iteration` sweeps.
class ChainRunner {
 public:
  ChainRunner(const SamplerConfig& cfg, const ModelInputs& in) : cfg_(cfg), in_(in) {
    cfg_.validate();
  }

  /// One full sweep; advances s.iteration by one.
  void sweep(ChainState& s, NeighborStats* stats) const {
    const auto& x = in_.table.scores();
    auto& mix = s.mixture;
    const char* quantity = "mu0";
    try {
      mix.mu0 = draw_mu0(x, s.labels, mix, in_.prior, s.rng[Stream::kMu0]);
      quantity = "theta";
      mix.theta = draw_theta(x, s.labels, mix, in_.prior, s.rng[Stream::kTheta]);
      quantity = "sigma0";
      mix.sigma0 = draw_sigma(x, s.labels, mix.mu0, 0, mix.mode, in_.prior, s.rng[Stream::kSigma]);
      quantity = "sigma1";
      mix.sigma1 = draw_sigma(x, s.labels, mix.mu1(), 1, mix.mode, in_.prior, s.rng[Stream::kSigma]);
      quantity = "labels";
      if (cfg_.model == ModelKind::kStandardMixture) {
        const double prior_logit = logit(*mix.pi1);
        sweep_labels(
            x, s.labels, mix, [&](std::size_t) { return prior_logit; },
            [](std::size_t, std::uint8_t, std::uint8_t) {}, s.rng[Stream::kLabels]);
        quantity = "pi1";
        const std::size_t n1 = detail::count_label(s.labels, 1);
        mix.pi1 = draw_pi1(n1, s.labels.size() - n1, s.rng[Stream::kWeights]);
      } else {
        const MrfParams& phi = *s.mrf;
        sweep_labels(
            x, s.labels, mix, [&](std::size_t i) { return conditional_logit(i, *stats, phi); },
            [&](std::size_t i, std::uint8_t o, std::uint8_t n) { stats->on_flip(i, o, n); },
            s.rng[Stream::kLabels]);
        quantity = "phi";
        const bool accepted = metropolis_phi(s.labels, *stats, *s.mrf, s.rw_step,
                                             in_.prior.beta_upper, cfg_.fixed_betas,
                                             s.rng[Stream::kWeights]);
        ++s.propose_count;
        if (accepted) ++s.accept_count;
        const std::int64_t t = s.iteration + 1;
        if (t <= cfg_.n_burnin) {
          if (accepted) ++s.batch_accepts;
          // Robbins-Monro on log(step) once per batch, gain 1/batch index.
          if (cfg_.rw_adapt && t % cfg_.rw_adapt_batch == 0) {
            const double batch = static_cast<double>(t / cfg_.rw_adapt_batch);
            const double rate = static_cast<double>(s.batch_accepts) / cfg_.rw_adapt_batch;
            const double factor = std::exp((rate - cfg_.rw_target_accept) / batch);
            for (auto& step : s.rw_step) step *= factor;
          }
          if (t % cfg_.rw_adapt_batch == 0) s.batch_accepts = 0;
        } else {
          ++s.kept_proposals;
          if (accepted) ++s.kept_accepts;
        }
      }
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(s.iteration + 1) + ": " + quantity +
                           " update failed: " + e.what());
    }
    ++s.iteration;
  }

  /// Continues `s` up to `until_iteration` total sweeps, accumulating
  /// retained draws into `out`.
  void advance(ChainState& s, std::int64_t until_iteration, ChainResult& out) const {
    std::optional<NeighborStats> stats;
    if (cfg_.model == ModelKind::kMrf) stats.emplace(s.labels, in_.nets);
    if (out.label_counts.empty()) out.label_counts.assign(s.labels.size(), 0);
    while (s.iteration < until_iteration) {
      sweep(s, stats ? &*stats : nullptr);
      const std::int64_t post = s.iteration - cfg_.n_burnin;
      if (post >= 1 && (post - 1) % cfg_.thin == 0) record(s, out);
    }
    out.final_state = s;
  }

  ChainResult run(const ChainStart& start) const {
    ChainState s = init_chain(cfg_, in_, start);
    ChainResult out;
    out.samples.reserve(static_cast<std::size_t>(cfg_.retained_per_chain()));
    advance(s, total_iterations(), out);
    return out;
  }

  std::int64_t total_iterations() const {
    return static_cast<std::int64_t>(cfg_.n_burnin) + cfg_.n_keep;
  }

  const SamplerConfig& config() const { return cfg_; }

 private:
  static void record(const ChainState& s, ChainResult& out) {
    PosteriorSample p;
    p.mu0 = s.mixture.mu0;
    p.theta = s.mixture.theta;
    p.sigma0 = s.mixture.sigma0;
    p.sigma1 = s.mixture.sigma1;
    p.pi1 = s.mixture.pi1;
    p.mrf = s.mrf;
    std::size_t n1 = 0;
    for (std::size_t i = 0; i < s.labels.size(); ++i) {
      out.label_counts[i] += s.labels[i];
      n1 += s.labels[i];
    }
    p.n_targets = n1;
    out.samples.push_back(std::move(p));
    ++out.n_retained;
  }

  SamplerConfig cfg_;
  ModelInputs in_;
};

inline ChainResult run_chain(const SamplerConfig& cfg, const ModelInputs& in,
                             const ChainStart& start) {
  return ChainRunner(cfg, in).run(start);
}

// ---------------------------------------------------------------------------
// Multiple chains

struct MultiChainResult {
  SamplerConfig config;
  std::vector<ChainResult> chains;
  std::vector<double> p_hat;  // pooled Pr(T_i = 1 | data)

  std::vector<const PosteriorSample*> pooled_samples() const {
    std::vector<const PosteriorSample*> all;
    for (const auto& c : chains)
      for (const auto& s : c.samples) all.push_back(&s);
    return all;
  }

  /// Pooled posterior mean of a scalar functional of a draw.
  template <typename F>
  double pooled_mean(F&& f) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : chains)
      for (const auto& s : c.samples) {
        sum += f(s);
        ++n;
      }
    return n ? sum / static_cast<double>(n) : std::nan("");
  }

  Vector mean_mu0() const { return mean_vector([](const PosteriorSample& s) { return s.mu0; }); }
  Vector mean_mu1() const { return mean_vector([](const PosteriorSample& s) { return s.mu1(); }); }
  Vector mean_theta() const { return mean_vector([](const PosteriorSample& s) { return s.theta; }); }
  Matrix mean_sigma(int j) const {
    Matrix acc;
    std::size_t n = 0;
    for (const auto* s : pooled_samples()) {
      const Matrix& m = j == 0 ? s->sigma0 : s->sigma1;
      if (n == 0) acc = Matrix::Zero(m.rows(), m.cols());
      acc += m;
      ++n;
    }
    return acc / static_cast<double>(n);
  }

 private:
  template <typename F>
  Vector mean_vector(F&& f) const {
    Vector acc;
    std::size_t n = 0;
    for (const auto* s : pooled_samples()) {
      const Vector v = f(*s);
      if (n == 0) acc = Vector::Zero(v.size());
      acc += v;
      ++n;
    }
    return acc / static_cast<double>(n);
  }
};

inline std::vector<double> pooled_probabilities(const std::vector<ChainResult>& chains) {
  if (chains.empty()) return {};
  std::vector<double> p(chains.front().label_counts.size(), 0.0);
  std::uint64_t total = 0;
  for (const auto& c : chains) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += static_cast<double>(c.label_counts[i]);
    total += c.n_retained;
  }
  for (auto& v : p) v /= static_cast<double>(total);
  return p;
}

/// Runs every chain (in parallel when threads allow) and pools them. Chain
/// results do not depend on the thread count.
inline MultiChainResult run_multichain(const SamplerConfig& cfg, const ModelInputs& in) {
  cfg.validate();
  const ChainRunner runner(cfg, in);
  MultiChainResult result;
  result.config = cfg;
  result.chains.resize(static_cast<std::size_t>(cfg.n_chains));
  const int n_threads = std::max(1, std::min(cfg.threads > 0 ? cfg.threads : cfg.n_chains, cfg.n_chains));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int c = next++; c < cfg.n_chains; c = next++) {
      try {
        result.chains[static_cast<std::size_t>(c)] = runner.run(cfg.start_for(c));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  result.p_hat = pooled_probabilities(result.chains);
  return result;
}

}  // namespace mrfmix
