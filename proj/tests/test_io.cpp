#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "mrfmix/mrfmix.hpp"

using namespace mrfmix;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("mrfmix_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p.string();
  }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

struct SmallFit {
  GeneTable table;
  NetworkSet nets;
  PriorSpec prior;
};

SmallFit small_fit() {
  Rng rng(21);
  const int G = 60;
  RowMatrix x(G, 2);
  std::vector<std::string> ids;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
  for (int i = 0; i < G; ++i) {
    ids.push_back("g" + std::to_string(i));
    const double shift = i % 5 == 0 ? 2.0 : 0.0;
    x(i, 0) = shift + sample_std_normal(rng);
    x(i, 1) = shift + sample_std_normal(rng);
    e.emplace_back(i, (i + 5) % G);
  }
  SmallFit f{GeneTable(ids, {"B", "E"}, x), NetworkSet(G), {}};
  f.nets.add("ring", e);
  f.prior = build_prior_spec(f.table);
  return f;
}

}  // namespace

TEST(Scores, RoundTripIsExact) {
  Rng rng(1);
  RowMatrix x(5, 3);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) x(i, j) = sample_std_normal(rng) * std::pow(10.0, i - 2);
  const GeneTable t({"a", "b", "c", "d", "e"}, {"B", "E", "S"}, x);
  std::stringstream ss;
  write_scores(ss, t);
  const GeneTable back = read_scores(ss, "mem");
  EXPECT_EQ(back.ids(), t.ids());
  EXPECT_EQ(back.columns(), t.columns());
  EXPECT_EQ(back.scores(), t.scores());
}

TEST(Scores, ErrorsCarryLineNumbers) {
  std::istringstream bad("id\tB\n# comment\na\t1.0\nb\tfoo\n");
  EXPECT_NE(error_of([&] { read_scores(bad, "s.tsv"); }).find("s.tsv:4:"), std::string::npos);
  std::istringstream ragged("id\tB\tE\na\t1.0\n");
  EXPECT_NE(error_of([&] { read_scores(ragged, "r.tsv"); }).find("r.tsv:2:"), std::string::npos);
  std::istringstream nan("id\tB\na\tnan\n");
  EXPECT_FALSE(error_of([&] { read_scores(nan, "n.tsv"); }).empty());
  std::istringstream dup("id\tB\na\t1\na\t2\n");
  EXPECT_NE(error_of([&] { read_scores(dup, "d.tsv"); }).find("d.tsv"), std::string::npos);
  std::istringstream empty("");
  EXPECT_FALSE(error_of([&] { read_scores(empty, "e.tsv"); }).empty());
}

TEST(Scores, AcceptsCrlfAndCommas) {
  std::istringstream crlf("id\tB\r\na\t1.5\r\nb\t-2\r\n");
  const GeneTable t = read_scores(crlf, "c.tsv");
  EXPECT_EQ(t.ids(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.scores()(1, 0), -2.0);
  std::istringstream csv("id,B,E\nx,1,2\n");
  EXPECT_EQ(read_scores(csv, "c.csv").dim(), 2);
}

TEST(Networks, ReadAndProject) {
  std::istringstream in("# edges\na\tb\r\nb\tc\n\nc\tzz\n");
  const RawNetwork raw = read_network(in, "coexp.tsv", "coexp");
  EXPECT_EQ(raw.edges.size(), 3u);
  std::istringstream bad("a\tb\tc\n");
  EXPECT_NE(error_of([&] { read_network(bad, "n.tsv", "n"); }).find("n.tsv:1:"), std::string::npos);
  EXPECT_EQ(network_name_from_path("/x/y/go.edges.tsv"), "go.edges");
  EXPECT_EQ(network_name_from_path("coexp"), "coexp");
}

TEST(Networks, WriteReadRoundTrip) {
  NetworkSet nets(4);
  nets.add("x", {{0, 1}, {2, 3}, {1, 2}});
  const std::vector<std::string> ids{"a", "b", "c", "d"};
  std::stringstream ss;
  write_network(ss, nets, 0, ids);
  RowMatrix x = RowMatrix::Zero(4, 1);
  x(0, 0) = 1.0;
  const GeneTable t(ids, {"B"}, x);
  const NetworkSet back = project_networks(t, {read_network(ss, "mem", "x")});
  EXPECT_EQ(back.edges(0), nets.edges(0));
}

TEST(Labels, ReadReordersById) {
  TempDir dir;
  const auto p = dir.file("truth.tsv", "id\ttruth\nb\t1\na\t0\nc\t1\n");
  EXPECT_EQ(read_labels(p, {"a", "b", "c"}), (Labels{0, 1, 1}));
  EXPECT_NE(error_of([&] { read_labels(p, {"a", "q"}); }).find("'q'"), std::string::npos);
  const auto bad = dir.file("bad.tsv", "id\ttruth\na\t2\n");
  EXPECT_NE(error_of([&] { read_labels(bad, {"a"}); }).find(":2:"), std::string::npos);
  std::stringstream ss;
  write_labels(ss, {"x", "y"}, {1, 0});
  EXPECT_EQ(ss.str(), "id\ttruth\nx\t1\ny\t0\n");
}

TEST(ItemValues, ReadsNamedColumn) {
  TempDir dir;
  const auto p = dir.file("ranks.csv", "id,p_hat,rank\nb,0.25,2\na,0.75,1\n");
  EXPECT_EQ(read_item_values(p, {"a", "b"}, "p_hat"), (std::vector<double>{0.75, 0.25}));
  EXPECT_FALSE(error_of([&] { read_item_values(p, {"a"}, "missing"); }).empty());
  EXPECT_FALSE(error_of([&] { read_item_values(dir.file("none.csv", ""), {"a"}, "p_hat"); }).empty());
  EXPECT_NE(error_of([&] { read_item_values("/nonexistent/file.csv", {"a"}, "p_hat"); }).find("cannot open"),
            std::string::npos);
}

TEST(Format, ExactDoublesRoundTrip) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.uniform() * 40) - 20);
    double back;
    ASSERT_TRUE(detail::parse_double(format_exact(v), back));
    ASSERT_EQ(back, v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Params, StanzasRoundTrip) {
  MixtureParams m{(Vector(2) << 0.1, -0.3).finished(), (Vector(2) << 0.7, 1.0 / 3.0).finished(),
                  (Matrix(2, 2) << 1.0, 0.2, 0.2, 2.0).finished(), Matrix::Identity(2, 2) * 0.5,
                  CovarianceMode::kGeneral, 0.123456789012345678};
  const MrfParams phi{-1.25, {1.06, 0.61}};
  const SmallFit f = small_fit();
  std::stringstream ss;
  write_params(ss, m);
  write_params(ss, phi);
  write_params(ss, f.prior);
  const MixtureParams m2 = read_mixture_params(ss);
  EXPECT_EQ(m2.mu0, m.mu0);
  EXPECT_EQ(m2.theta, m.theta);
  EXPECT_EQ(m2.sigma0, m.sigma0);
  EXPECT_EQ(m2.sigma1, m.sigma1);
  EXPECT_EQ(m2.pi1, m.pi1);
  EXPECT_EQ(read_mrf_params(ss), phi);
  const PriorSpec p2 = read_prior_spec(ss);
  EXPECT_EQ(p2.R, f.prior.R);
  EXPECT_EQ(p2.C, f.prior.C);
  EXPECT_EQ(p2.rho, f.prior.rho);
}

TEST(Checkpoint, StateRoundTrip) {
  const SmallFit f = small_fit();
  for (auto model : {ModelKind::kStandardMixture, ModelKind::kMrf}) {
    SamplerConfig cfg;
    cfg.model = model;
    cfg.n_burnin = 20;
    cfg.n_keep = 20;
    const ModelInputs in{f.table, f.nets, f.prior};
    ChainState s = init_chain(cfg, in, cfg.start_for(1));
    ChainResult scratch;
    ChainRunner(cfg, in).advance(s, 25, scratch);
    std::stringstream ss;
    save_checkpoint(ss, s);
    const ChainState back = load_checkpoint(ss);
    EXPECT_TRUE(back == s) << to_string(model);
  }
}

TEST(Checkpoint, ResumeMatchesUninterruptedRun) {
  const SmallFit f = small_fit();
  for (auto model : {ModelKind::kStandardMixture, ModelKind::kMrf}) {
    SamplerConfig cfg;
    cfg.model = model;
    cfg.n_burnin = 40;
    cfg.n_keep = 60;
    const ModelInputs in{f.table, f.nets, f.prior};
    const ChainRunner runner(cfg, in);
    const ChainResult straight = runner.run(cfg.start_for(2));

    for (std::int64_t stop : {17, 40, 73}) {
      ChainState s = init_chain(cfg, in, cfg.start_for(2));
      ChainResult part;
      runner.advance(s, stop, part);
      std::stringstream ss;
      save_checkpoint(ss, s);
      ChainState resumed = load_checkpoint(ss);
      runner.advance(resumed, runner.total_iterations(), part);
      EXPECT_TRUE(resumed == straight.final_state) << to_string(model) << " stop " << stop;
      EXPECT_EQ(part.label_counts, straight.label_counts);
      ASSERT_EQ(part.samples.size(), straight.samples.size());
      EXPECT_EQ(part.samples.back().mu0, straight.samples.back().mu0);
    }
  }
}

TEST(Checkpoint, RejectsCorruptInput) {
  std::istringstream wrong("mrfmix-checkpoint 99\n");
  EXPECT_THROW(load_checkpoint(wrong), DataError);
  const SmallFit f = small_fit();
  SamplerConfig cfg;
  const ModelInputs in{f.table, f.nets, f.prior};
  std::stringstream ss;
  save_checkpoint(ss, init_chain(cfg, in, cfg.start_for(0)));
  std::string text = ss.str();
  text.replace(text.find("labels "), 8, "labels x");
  std::istringstream corrupt(text);
  EXPECT_THROW(load_checkpoint(corrupt), DataError);
}
