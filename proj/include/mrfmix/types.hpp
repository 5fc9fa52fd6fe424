// Shared domain types: scored items, networks over them, model parameters.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mrfmix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Labels = std::vector<std::uint8_t>;

/// Largest score dimension supported by the fixed-size scratch buffers.
inline constexpr int kMaxDim = 16;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical failure inside an algorithm (non-PD matrix, divergence).
class NumericalError : public Error {
 public:
  using Error::Error;
};

enum class CovarianceMode { kGeneral, kDiagonal };
enum class ModelKind { kStandardMixture, kMrf };

inline const char* to_string(CovarianceMode m) {
  return m == CovarianceMode::kGeneral ? "general" : "diagonal";
}
inline const char* to_string(ModelKind m) {
  return m == ModelKind::kStandardMixture ? "smjm" : "mrf";
}

// ---------------------------------------------------------------------------
// GeneTable

/// Item identifiers with a G x d matrix of per-item summary scores.
class GeneTable {
 public:
  GeneTable() = default;

  GeneTable(std::vector<std::string> ids, std::vector<std::string> columns, RowMatrix scores)
      : ids_(std::move(ids)), columns_(std::move(columns)), scores_(std::move(scores)) {
    if (ids_.empty()) throw DataError("score table has no items");
    if (static_cast<Eigen::Index>(ids_.size()) != scores_.rows())
      throw DataError("score table: id count does not match score rows");
    if (columns_.empty() || static_cast<Eigen::Index>(columns_.size()) != scores_.cols())
      throw DataError("score table: column names do not match score dimension");
    if (scores_.cols() > kMaxDim)
      throw DataError("score table: dimension " + std::to_string(scores_.cols()) +
                      " exceeds supported maximum " + std::to_string(kMaxDim));
    index_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (!index_.emplace(ids_[i], i).second)
        throw DataError("score table: duplicate id '" + ids_[i] + "'");
    }
    for (Eigen::Index i = 0; i < scores_.rows(); ++i)
      for (Eigen::Index j = 0; j < scores_.cols(); ++j)
        if (!std::isfinite(scores_(i, j)))
          throw DataError("score table: non-finite score for id '" + ids_[i] + "' column '" +
                          columns_[j] + "'");
  }

  std::size_t size() const { return ids_.size(); }
  int dim() const { return static_cast<int>(scores_.cols()); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const RowMatrix& scores() const { return scores_; }

  std::optional<std::size_t> find(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Table restricted to a subset of score columns (e.g. one source for SMM).
  GeneTable select_columns(const std::vector<int>& cols) const {
    RowMatrix sub(scores_.rows(), static_cast<Eigen::Index>(cols.size()));
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (cols[c] < 0 || cols[c] >= dim()) throw DataError("column index out of range");
      sub.col(static_cast<Eigen::Index>(c)) = scores_.col(cols[c]);
      names.push_back(columns_[cols[c]]);
    }
    return GeneTable(ids_, std::move(names), std::move(sub));
  }

  bool operator==(const GeneTable& o) const {
    return ids_ == o.ids_ && columns_ == o.columns_ && scores_ == o.scores_;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> columns_;
  RowMatrix scores_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Networks

/// An edge list as read from disk, before projection onto a GeneTable.
struct RawNetwork {
  std::string name;
  std::vector<std::pair<std::string, std::string>> edges;
};

/// K undirected graphs over the GeneTable index space.
class NetworkSet {
 public:
  struct Network {
    std::string name;
    std::vector<std::vector<std::uint32_t>> neighbors;  // sorted, per item
    bool operator==(const Network&) const = default;
  };

  NetworkSet() = default;
  explicit NetworkSet(std::size_t n_items) : n_items_(n_items) {}

  /// Adds a network from index pairs. The result is symmetric with no
  /// self-loops and no duplicate edges regardless of the input.
  void add(std::string name, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
    Network net{std::move(name), std::vector<std::vector<std::uint32_t>>(n_items_)};
    for (auto [a, b] : edges) {
      if (a >= n_items_ || b >= n_items_) throw DataError("network edge index out of range");
      if (a == b) continue;
      net.neighbors[a].push_back(b);
      net.neighbors[b].push_back(a);
    }
    for (auto& nb : net.neighbors) {
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    nets_.push_back(std::move(net));
  }

  std::size_t size() const { return nets_.size(); }
  std::size_t n_items() const { return n_items_; }
  const Network& operator[](std::size_t k) const { return nets_[k]; }
  const std::vector<Network>& networks() const { return nets_; }

  std::size_t edge_count(std::size_t k) const {
    std::size_t twice = 0;
    for (const auto& nb : nets_[k].neighbors) twice += nb.size();
    return twice / 2;
  }

  /// Undirected edge list of network k with a < b.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges(std::size_t k) const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    const auto& nbs = nets_[k].neighbors;
    for (std::uint32_t i = 0; i < nbs.size(); ++i)
      for (auto j : nbs[i])
        if (i < j) out.emplace_back(i, j);
    return out;
  }

  bool operator==(const NetworkSet&) const = default;

 private:
  std::size_t n_items_ = 0;
  std::vector<Network> nets_;
};

struct NetworkAlignment {
  std::string name;
  std::size_t connected = 0;      // items with at least one neighbor
  std::size_t singletons = 0;     // items with none
  std::size_t dropped_edges = 0;  // edges touching an id missing from the table
  std::size_t unknown_ids = 0;    // distinct ids missing from the table
  std::size_t self_loops = 0;
  std::size_t duplicate_edges = 0;
};

struct AlignmentReport {
  std::vector<NetworkAlignment> networks;
};

namespace detail {
inline std::pair<std::uint32_t, std::uint32_t> ordered(std::uint32_t a, std::uint32_t b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}
}  // namespace detail

/// Projects raw edge lists onto the table's item universe. Unknown ids are
/// dropped (and counted); items absent from a network become singletons.
inline NetworkSet project_networks(const GeneTable& table, const std::vector<RawNetwork>& raw,
                                   AlignmentReport* report = nullptr) {
  NetworkSet set(table.size());
  if (report) report->networks.clear();
  for (const auto& net : raw) {
    NetworkAlignment align;
    align.name = net.name;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::vector<std::string> unknown;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const auto& [a, b] : net.edges) {
      auto ia = table.find(a);
      auto ib = table.find(b);
      if (!ia) unknown.push_back(a);
      if (!ib) unknown.push_back(b);
      if (!ia || !ib) {
        ++align.dropped_edges;
        continue;
      }
      if (*ia == *ib) {
        ++align.self_loops;
        continue;
      }
      auto e = detail::ordered(static_cast<std::uint32_t>(*ia), static_cast<std::uint32_t>(*ib));
      edges.push_back(e);
      seen.push_back(e);
    }
    std::sort(seen.begin(), seen.end());
    align.duplicate_edges =
        seen.size() - static_cast<std::size_t>(std::unique(seen.begin(), seen.end()) - seen.begin());
    std::sort(unknown.begin(), unknown.end());
    align.unknown_ids =
        static_cast<std::size_t>(std::unique(unknown.begin(), unknown.end()) - unknown.begin());
    set.add(net.name, edges);
    const auto& added = set[set.size() - 1];
    for (const auto& nb : added.neighbors) (nb.empty() ? align.singletons : align.connected)++;
    if (report) report->networks.push_back(align);
  }
  return set;
}

/// Reporting-only view of how raw networks line up with the table.
inline AlignmentReport validate_alignment(const GeneTable& table,
                                          const std::vector<RawNetwork>& raw) {
  AlignmentReport report;
  project_networks(table, raw, &report);
  return report;
}

// ---------------------------------------------------------------------------
// Parameters

/// Two-component normal mixture: mu1 = mu0 + theta.
struct MixtureParams {
  Vector mu0;
  Vector theta;
  Matrix sigma0;
  Matrix sigma1;
  CovarianceMode mode = CovarianceMode::kGeneral;
  std::optional<double> pi1;  // standard mixture only

  Vector mu1() const { return mu0 + theta; }
  const Matrix& sigma(int j) const { return j == 0 ? sigma0 : sigma1; }
  Vector mu(int j) const { return j == 0 ? mu0 : mu1(); }

  /// Throws DataError describing the first violated invariant.
  void validate() const {
    const auto d = mu0.size();
    if (d < 1 || theta.size() != d || sigma0.rows() != d || sigma0.cols() != d ||
        sigma1.rows() != d || sigma1.cols() != d)
      throw DataError("mixture parameters: inconsistent dimensions");
    if ((theta.array() <= 0.0).any()) throw DataError("mixture parameters: theta must be > 0");
    for (const Matrix* s : {&sigma0, &sigma1}) {
      if (!s->isApprox(s->transpose(), 1e-12))
        throw DataError("mixture parameters: covariance not symmetric");
      if (Eigen::LLT<Matrix>(*s).info() != Eigen::Success)
        throw DataError("mixture parameters: covariance not positive definite");
      if (mode == CovarianceMode::kDiagonal)
        for (Eigen::Index i = 0; i < d; ++i)
          for (Eigen::Index j = 0; j < d; ++j)
            if (i != j && (*s)(i, j) != 0.0)
              throw DataError("mixture parameters: diagonal mode with off-diagonal entry");
    }
    if (pi1 && !(*pi1 > 0.0 && *pi1 < 1.0))
      throw DataError("mixture parameters: pi1 outside (0,1)");
  }

  bool operator==(const MixtureParams& o) const {
    return mu0 == o.mu0 && theta == o.theta && sigma0 == o.sigma0 && sigma1 == o.sigma1 &&
           mode == o.mode && pi1 == o.pi1;
  }
};

inline constexpr double kBetaUpper = 6.0;

/// Phi = (gamma, beta_1..beta_K).
struct MrfParams {
  double gamma = 0.0;
  std::vector<double> betas;

  bool in_support() const {
    return std::all_of(betas.begin(), betas.end(),
                       [](double b) { return b >= 0.0 && b < kBetaUpper; });
  }
  bool operator==(const MrfParams&) const = default;
};

struct PriorSpec {
  Matrix C;    // diagonal prior covariance of mu0 and theta
  Matrix R;    // Wishart anchor: E(Sigma^-1) = R^-1
  double rho;  // Wishart degrees of freedom
  double beta_upper = kBetaUpper;

  bool operator==(const PriorSpec&) const = default;
};

/// Vague priors anchored on the marginal sample covariance of the scores.
inline PriorSpec build_prior_spec(const GeneTable& table, double mean_prior_variance = 1e6) {
  const auto& x = table.scores();
  const Eigen::Index G = x.rows();
  const int d = table.dim();
  if (G < 2) throw DataError("prior: need at least 2 items to estimate covariance");
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const RowMatrix centered = x.rowwise() - mean;
  Matrix R = (centered.transpose() * centered) / static_cast<double>(G - 1);
  for (int j = 0; j < d; ++j)
    if (!(R(j, j) > 0.0))
      throw DataError("prior: zero variance in score column '" + table.columns()[j] + "'");
  R = 0.5 * (R + R.transpose());
  return PriorSpec{Matrix::Identity(d, d) * mean_prior_variance, R, static_cast<double>(d),
                   kBetaUpper};
}

}  // namespace mrfmix
