#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace mrfmix;

namespace {

GeneTable small_table() {
  RowMatrix x(4, 2);
  x << 0.1, 1.0, 0.4, 2.0, -0.3, 0.5, 0.9, 1.5;
  return GeneTable({"a", "b", "c", "d"}, {"B", "E"}, x);
}

}  // namespace

TEST(GeneTable, RejectsDuplicateIdsAndNonFinite) {
  RowMatrix x(2, 1);
  x << 1.0, 2.0;
  EXPECT_THROW(GeneTable({"a", "a"}, {"B"}, x), DataError);
  x(1, 0) = NAN;
  EXPECT_THROW(GeneTable({"a", "b"}, {"B"}, x), DataError);
  EXPECT_THROW(GeneTable({"a"}, {"B"}, RowMatrix(2, 1)), DataError);
}

TEST(GeneTable, SelectColumnsKeepsIds) {
  const GeneTable t = small_table();
  const GeneTable e = t.select_columns({1});
  EXPECT_EQ(e.dim(), 1);
  EXPECT_EQ(e.columns()[0], "E");
  EXPECT_EQ(e.ids(), t.ids());
  EXPECT_DOUBLE_EQ(e.scores()(3, 0), 1.5);
  EXPECT_EQ(*t.find("c"), 2u);
  EXPECT_FALSE(t.find("zz"));
}

TEST(NetworkSet, SymmetricWithoutLoopsOrDuplicates) {
  NetworkSet nets(4);
  nets.add("x", {{0, 1}, {1, 0}, {2, 2}, {1, 3}, {0, 1}});
  const auto& nb = nets[0].neighbors;
  EXPECT_EQ(nb[0], (std::vector<std::uint32_t>{1}));
  EXPECT_EQ(nb[1], (std::vector<std::uint32_t>{0, 3}));
  EXPECT_TRUE(nb[2].empty());
  EXPECT_EQ(nets.edge_count(0), 2u);
  EXPECT_THROW(nets.add("bad", {{0, 9}}), DataError);
}

TEST(NetworkSet, SymmetryPropertyOnRandomGraphs) {
  Rng rng(201);
  for (int rep = 0; rep < 100; ++rep) {
    const auto in = fixtures::random_mrf_instance(rng);
    for (std::size_t k = 0; k < in.nets.size(); ++k) {
      const auto& nb = in.nets[k].neighbors;
      for (int i = 0; i < in.G; ++i)
        for (auto j : nb[i]) {
          ASSERT_NE(j, static_cast<std::uint32_t>(i));
          ASSERT_TRUE(std::binary_search(nb[j].begin(), nb[j].end(), static_cast<std::uint32_t>(i)));
        }
    }
  }
}

TEST(Alignment, CountsUnknownIdsLoopsAndDuplicates) {
  const GeneTable t = small_table();
  RawNetwork raw{"coexp", {{"a", "b"}, {"b", "a"}, {"a", "zz"}, {"c", "c"}, {"yy", "zz"}}};
  AlignmentReport rep;
  const NetworkSet nets = project_networks(t, {raw}, &rep);
  ASSERT_EQ(rep.networks.size(), 1u);
  const auto& a = rep.networks[0];
  EXPECT_EQ(a.name, "coexp");
  EXPECT_EQ(a.dropped_edges, 2u);
  EXPECT_EQ(a.unknown_ids, 2u);
  EXPECT_EQ(a.self_loops, 1u);
  EXPECT_EQ(a.duplicate_edges, 1u);
  EXPECT_EQ(a.connected, 2u);
  EXPECT_EQ(a.singletons, 2u);
  EXPECT_EQ(nets.edge_count(0), 1u);
}

TEST(PriorSpec, MatchesTextbookCovariance) {
  Rng rng(202);
  for (int rep = 0; rep < 200; ++rep) {
    RowMatrix x(10, 3);
    std::vector<std::vector<double>> rows(10, std::vector<double>(3));
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) {
      ids.push_back("g" + std::to_string(i));
      for (int j = 0; j < 3; ++j) rows[i][j] = x(i, j) = 10.0 * rng.uniform() - 5.0;
    }
    const PriorSpec p = build_prior_spec(GeneTable(ids, {"B", "E", "S"}, x));
    const auto cov = oracle::textbook_covariance(rows);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) ASSERT_NEAR(p.R(a, b), cov[a][b], 1e-12);
    EXPECT_EQ(p.rho, 3.0);
    EXPECT_EQ(p.C, Matrix::Identity(3, 3) * 1e6);
    EXPECT_EQ(p.beta_upper, 6.0);
  }
}

TEST(PriorSpec, HandExampleAndZeroVariance) {
  RowMatrix x(2, 3);
  x << 0, 0, 0, 2, 2, 2;
  const PriorSpec p = build_prior_spec(GeneTable({"a", "b"}, {"B", "E", "S"}, x));
  EXPECT_EQ(p.R, Matrix::Constant(3, 3, 2.0));
  x << 1, 0, 0, 1, 2, 2;
  try {
    build_prior_spec(GeneTable({"a", "b"}, {"B", "E", "S"}, x));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("'B'"), std::string::npos);
  }
}

TEST(MixtureParams, Invariants) {
  MixtureParams m{Vector::Zero(2), Vector::Ones(2), Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                  CovarianceMode::kGeneral, 0.3};
  EXPECT_NO_THROW(m.validate());
  EXPECT_EQ(m.mu1(), Vector::Ones(2));
  m.theta(1) = 0.0;
  EXPECT_THROW(m.validate(), DataError);
  m.theta(1) = 1.0;
  m.sigma1(0, 1) = m.sigma1(1, 0) = 0.2;
  m.mode = CovarianceMode::kDiagonal;
  EXPECT_THROW(m.validate(), DataError);
  m.mode = CovarianceMode::kGeneral;
  m.pi1 = 1.0;
  EXPECT_THROW(m.validate(), DataError);
}

TEST(MrfParams, BetaSupport) {
  EXPECT_TRUE((MrfParams{0.0, {0.0, 5.99}}.in_support()));
  EXPECT_FALSE((MrfParams{0.0, {-0.1}}.in_support()));
  EXPECT_FALSE((MrfParams{0.0, {6.0}}.in_support()));
}
