// Shared random instances for unit and acceptance tests.
#pragma once

#include "mrfmix/mrfmix.hpp"
#include "oracles.hpp"

namespace fixtures {

using Edges = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

struct MrfInstance {
  int G = 0;
  std::vector<Edges> edges;  // raw, may contain duplicates and self-loops
  mrfmix::NetworkSet nets;
  std::vector<oracle::Adjacency> dense;
  mrfmix::Labels labels;
  mrfmix::MrfParams phi;

  std::vector<int> int_labels() const { return {labels.begin(), labels.end()}; }
};

inline MrfInstance random_mrf_instance(mrfmix::Rng& rng, int max_items = 12, int max_networks = 3) {
  MrfInstance in;
  in.G = 1 + static_cast<int>(rng.uniform() * max_items);
  const int K = 1 + static_cast<int>(rng.uniform() * max_networks);
  in.nets = mrfmix::NetworkSet(static_cast<std::size_t>(in.G));
  const double density = rng.uniform();
  for (int k = 0; k < K; ++k) {
    Edges e;
    for (int a = 0; a < in.G; ++a)
      for (int b = 0; b < in.G; ++b)
        if (rng.uniform() < 0.5 * density) e.emplace_back(a, b);
    in.edges.push_back(e);
    in.nets.add("n" + std::to_string(k), e);
    in.dense.push_back(oracle::dense_adjacency(in.G, e));
  }
  for (int i = 0; i < in.G; ++i) in.labels.push_back(rng.uniform() < 0.4 ? 1 : 0);
  in.phi.gamma = 6.0 * rng.uniform() - 3.0;
  for (int k = 0; k < K; ++k) in.phi.betas.push_back(6.0 * rng.uniform());
  return in;
}

}  // namespace fixtures
