// File formats: score tables and edge lists (TSV), label files, CSV
// output, and the versioned text checkpoint of a chain.
//
// Checkpoint layout (v1), one key per line, doubles printed with 17
// significant digits so that every value round-trips exactly:
//
//   mrfmix-checkpoint 1
//   model <smjm|mrf>
//   covariance <general|diagonal>
//   dim <d>
//   items <G>
//   networks <K>
//   iteration <n>
//   labels <G characters of 0/1>
//   mu0 <d values>
//   theta <d values>
//   sigma0 <d*d values, row-major>
//   sigma1 <d*d values, row-major>
//   pi1 <value|none>
//   gamma <value|none>
//   betas <K values>
//   rw_step <K+1 values>
//   counts <accept> <propose> <kept_accept> <kept_propose>
//   rng
//   <seed and one engine state per stream>
//   end
#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mrfmix/sampler.hpp"
#include "mrfmix/types.hpp"

namespace mrfmix {

/// Shortest decimal with 10 significant digits; used for every CSV/TSV value.
inline std::string format_double(double v, int digits = 10) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline std::string format_exact(double v) { return format_double(v, 17); }

namespace detail {

inline std::string_view trim_eol(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(delim, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE;
}

inline std::string location(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line) + ": ";
}

}  // namespace detail

/// A delimited text table: header plus rows with their source line numbers.
struct TextTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  int column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return static_cast<int>(c);
    return -1;
  }
};

/// Reads a header + rows file. Lines starting with '#' and blank lines are
/// skipped; CRLF is accepted. The delimiter is tab if the header has one,
/// otherwise comma.
inline TextTable read_text_table(std::istream& in, const std::string& path) {
  TextTable t;
  t.path = path;
  std::string raw;
  std::size_t line_no = 0;
  char delim = '\t';
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::trim_eol(raw);
    if (detail::trim(line).empty() || line.front() == '#') continue;
    if (t.header.empty()) {
      delim = line.find('\t') != std::string_view::npos ? '\t' : ',';
      t.header = detail::split(line, delim);
      continue;
    }
    auto fields = detail::split(line, delim);
    if (fields.size() != t.header.size())
      throw DataError(detail::location(path, line_no) + "expected " +
                      std::to_string(t.header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  if (t.header.empty()) throw DataError(path + ": file is empty");
  return t;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open file");
  return in;
}

inline TextTable read_text_table(const std::string& path) {
  auto in = open_input(path);
  return read_text_table(in, path);
}

// ---------------------------------------------------------------------------
// Scores

/// `id<TAB>col1<TAB>col2...`; column order defines dimension order.
inline GeneTable read_scores(std::istream& in, const std::string& path) {
  const TextTable t = read_text_table(in, path);
  if (t.header.size() < 2) throw DataError(path + ": score header needs an id and >= 1 column");
  const std::vector<std::string> columns(t.header.begin() + 1, t.header.end());
  RowMatrix x(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(columns.size()));
  std::vector<std::string> ids;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    ids.push_back(t.rows[r][0]);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      double v;
      if (!detail::parse_double(t.rows[r][c + 1], v) || !std::isfinite(v))
        throw DataError(detail::location(path, t.line_numbers[r]) + "invalid score '" +
                        t.rows[r][c + 1] + "' in column '" + columns[c] + "'");
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  try {
    return GeneTable(std::move(ids), columns, std::move(x));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline GeneTable read_scores(const std::string& path) {
  auto in = open_input(path);
  return read_scores(in, path);
}

inline void write_scores(std::ostream& out, const GeneTable& table) {
  out << "id";
  for (const auto& c : table.columns()) out << '\t' << c;
  out << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.ids()[i];
    for (int c = 0; c < table.dim(); ++c)
      out << '\t' << format_exact(table.scores()(static_cast<Eigen::Index>(i), c));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Networks

/// Edge list `id1<TAB>id2`, one edge per line, '#' comments, no header.
inline RawNetwork read_network(std::istream& in, const std::string& path, std::string name) {
  RawNetwork net{std::move(name), {}};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::trim_eol(raw);
    if (detail::trim(line).empty() || line.front() == '#') continue;
    auto fields = detail::split(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
      throw DataError(detail::location(path, line_no) + "expected two tab-separated ids");
    net.edges.emplace_back(std::move(fields[0]), std::move(fields[1]));
  }
  return net;
}

/// Network name from a path: file stem.
inline std::string network_name_from_path(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = base.find_last_of('.');
  return dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
}

inline RawNetwork read_network(const std::string& path, std::string name = {}) {
  auto in = open_input(path);
  return read_network(in, path, name.empty() ? network_name_from_path(path) : std::move(name));
}

inline void write_network(std::ostream& out, const NetworkSet& nets, std::size_t k,
                          const std::vector<std::string>& ids) {
  out << "# network " << nets[k].name << '\n';
  for (auto [a, b] : nets.edges(k)) out << ids[a] << '\t' << ids[b] << '\n';
}

// ---------------------------------------------------------------------------
// Labels and probabilities

/// `id<TAB>truth` with 0/1 values, reordered onto the table's ids.
inline Labels read_labels(const std::string& path, const std::vector<std::string>& ids) {
  const TextTable t = read_text_table(path);
  if (t.header.size() < 2) throw DataError(path + ": label file needs id and value columns");
  std::unordered_map<std::string, std::uint8_t> by_id;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& v = t.rows[r][1];
    if (v != "0" && v != "1")
      throw DataError(detail::location(path, t.line_numbers[r]) + "label must be 0 or 1");
    if (!by_id.emplace(t.rows[r][0], v == "1" ? 1 : 0).second)
      throw DataError(detail::location(path, t.line_numbers[r]) + "duplicate id");
  }
  Labels out;
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError(path + ": no label for id '" + id + "'");
    out.push_back(it->second);
  }
  return out;
}

inline void write_labels(std::ostream& out, const std::vector<std::string>& ids, const Labels& T) {
  out << "id\ttruth\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << '\t' << int{T[i]} << '\n';
}

/// Per-item values from column `value_column` of a CSV/TSV keyed by `id`.
inline std::vector<double> read_item_values(const std::string& path,
                                            const std::vector<std::string>& ids,
                                            const std::string& value_column) {
  const TextTable t = read_text_table(path);
  const int id_col = t.column("id");
  const int v_col = t.column(value_column);
  if (id_col < 0) throw DataError(path + ": no 'id' column");
  if (v_col < 0) throw DataError(path + ": no '" + value_column + "' column");
  std::unordered_map<std::string, double> by_id;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    double v;
    if (!detail::parse_double(t.rows[r][static_cast<std::size_t>(v_col)], v))
      throw DataError(detail::location(path, t.line_numbers[r]) + "invalid number");
    by_id[t.rows[r][static_cast<std::size_t>(id_col)]] = v;
  }
  std::vector<double> out;
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError(path + ": no value for id '" + id + "'");
    out.push_back(it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  CsvWriter& header(const std::vector<std::string>& names) { return row(names); }

  CsvWriter& row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
    out_ << '\n';
    return *this;
  }

 private:
  std::ostream& out_;
};

// ---------------------------------------------------------------------------
// Checkpoints

namespace detail {
inline void write_values(std::ostream& out, const char* key, const double* v, Eigen::Index n) {
  out << key;
  for (Eigen::Index i = 0; i < n; ++i) out << ' ' << format_exact(v[i]);
  out << '\n';
}

inline std::vector<double> read_values(std::istream& in, const std::string& expected_key) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("checkpoint: missing '" + expected_key + "'");
  std::istringstream ss(line);
  std::string key;
  ss >> key;
  if (key != expected_key)
    throw DataError("checkpoint: expected '" + expected_key + "', found '" + key + "'");
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) {
    double v;
    if (tok == "none") continue;
    if (!parse_double(tok, v)) throw DataError("checkpoint: bad number in '" + key + "'");
    out.push_back(v);
  }
  return out;
}

inline std::string read_word(std::istream& in, const std::string& expected_key) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("checkpoint: missing '" + expected_key + "'");
  std::istringstream ss(line);
  std::string key, value;
  ss >> key >> value;
  if (key != expected_key)
    throw DataError("checkpoint: expected '" + expected_key + "', found '" + key + "'");
  return value;
}
}  // namespace detail

inline constexpr int kCheckpointVersion = 1;

inline void save_checkpoint(std::ostream& out, const ChainState& s) {
  const auto& m = s.mixture;
  const Eigen::Index d = m.mu0.size();
  out << "mrfmix-checkpoint " << kCheckpointVersion << '\n';
  out << "model " << (s.mrf ? "mrf" : "smjm") << '\n';
  out << "covariance " << to_string(m.mode) << '\n';
  out << "dim " << d << '\n';
  out << "items " << s.labels.size() << '\n';
  out << "networks " << (s.mrf ? s.mrf->betas.size() : 0) << '\n';
  out << "iteration " << s.iteration << '\n';
  out << "labels ";
  for (auto t : s.labels) out << (t ? '1' : '0');
  out << '\n';
  detail::write_values(out, "mu0", m.mu0.data(), d);
  detail::write_values(out, "theta", m.theta.data(), d);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> s0 = m.sigma0, s1 = m.sigma1;
  detail::write_values(out, "sigma0", s0.data(), d * d);
  detail::write_values(out, "sigma1", s1.data(), d * d);
  out << "pi1 " << (m.pi1 ? format_exact(*m.pi1) : "none") << '\n';
  out << "gamma " << (s.mrf ? format_exact(s.mrf->gamma) : "none") << '\n';
  const std::vector<double> betas = s.mrf ? s.mrf->betas : std::vector<double>{};
  detail::write_values(out, "betas", betas.data(), static_cast<Eigen::Index>(betas.size()));
  detail::write_values(out, "rw_step", s.rw_step.data(), static_cast<Eigen::Index>(s.rw_step.size()));
  out << "counts " << s.accept_count << ' ' << s.propose_count << ' ' << s.kept_accepts << ' '
      << s.kept_proposals << ' ' << s.batch_accepts << '\n';
  out << "rng\n" << s.rng << '\n' << "end\n";
}

inline ChainState load_checkpoint(std::istream& in) {
  std::string line;
  std::getline(in, line);
  if (line != "mrfmix-checkpoint " + std::to_string(kCheckpointVersion))
    throw DataError("checkpoint: unsupported header '" + line + "'");
  ChainState s;
  const std::string model = detail::read_word(in, "model");
  const std::string cov = detail::read_word(in, "covariance");
  const auto d = std::stol(detail::read_word(in, "dim"));
  const auto G = std::stoul(detail::read_word(in, "items"));
  const auto K = std::stoul(detail::read_word(in, "networks"));
  s.iteration = std::stoll(detail::read_word(in, "iteration"));
  const std::string labels = G ? detail::read_word(in, "labels") : (std::getline(in, line), "");
  if (labels.size() != G) throw DataError("checkpoint: label count mismatch");
  for (char c : labels) {
    if (c != '0' && c != '1') throw DataError("checkpoint: bad label character");
    s.labels.push_back(c == '1' ? 1 : 0);
  }
  auto& m = s.mixture;
  m.mode = cov == "diagonal" ? CovarianceMode::kDiagonal : CovarianceMode::kGeneral;
  auto vec = [&](const char* key, Eigen::Index n) {
    auto v = detail::read_values(in, key);
    if (static_cast<Eigen::Index>(v.size()) != n) throw DataError(std::string("checkpoint: bad size for ") + key);
    return v;
  };
  auto v = vec("mu0", d);
  m.mu0 = Eigen::Map<Vector>(v.data(), d);
  v = vec("theta", d);
  m.theta = Eigen::Map<Vector>(v.data(), d);
  using RM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  v = vec("sigma0", d * d);
  m.sigma0 = Eigen::Map<RM>(v.data(), d, d);
  v = vec("sigma1", d * d);
  m.sigma1 = Eigen::Map<RM>(v.data(), d, d);
  v = detail::read_values(in, "pi1");
  if (!v.empty()) m.pi1 = v[0];
  v = detail::read_values(in, "gamma");
  auto betas = vec("betas", static_cast<Eigen::Index>(K));
  if (model == "mrf") {
    if (v.empty()) throw DataError("checkpoint: MRF state without gamma");
    s.mrf = MrfParams{v[0], betas};
  }
  s.rw_step = detail::read_values(in, "rw_step");
  std::getline(in, line);
  std::istringstream counts(line);
  std::string key;
  counts >> key >> s.accept_count >> s.propose_count >> s.kept_accepts >> s.kept_proposals >> s.batch_accepts;
  if (key != "counts" || !counts) throw DataError("checkpoint: bad counts line");
  std::getline(in, line);
  if (line != "rng") throw DataError("checkpoint: missing rng section");
  in >> s.rng;
  if (!in) throw DataError("checkpoint: bad rng state");
  in >> key;
  if (key != "end") throw DataError("checkpoint: missing end marker");
  return s;
}

// ---------------------------------------------------------------------------
// Parameter stanzas (round-trippable text for MixtureParams / MrfParams / PriorSpec)

inline void write_params(std::ostream& out, const MixtureParams& m) {
  const Eigen::Index d = m.mu0.size();
  out << "mixture " << to_string(m.mode) << ' ' << d << '\n';
  detail::write_values(out, "mu0", m.mu0.data(), d);
  detail::write_values(out, "theta", m.theta.data(), d);
  const RowMatrix s0 = m.sigma0, s1 = m.sigma1;
  detail::write_values(out, "sigma0", s0.data(), d * d);
  detail::write_values(out, "sigma1", s1.data(), d * d);
  out << "pi1 " << (m.pi1 ? format_exact(*m.pi1) : "none") << '\n';
}

inline MixtureParams read_mixture_params(std::istream& in) {
  std::string line, key, mode;
  Eigen::Index d = 0;
  std::getline(in, line);
  std::istringstream head(line);
  head >> key >> mode >> d;
  if (key != "mixture" || d < 1) throw DataError("params: bad mixture header");
  MixtureParams m;
  m.mode = mode == "diagonal" ? CovarianceMode::kDiagonal : CovarianceMode::kGeneral;
  auto v = detail::read_values(in, "mu0");
  m.mu0 = Eigen::Map<Vector>(v.data(), d);
  v = detail::read_values(in, "theta");
  m.theta = Eigen::Map<Vector>(v.data(), d);
  v = detail::read_values(in, "sigma0");
  m.sigma0 = Eigen::Map<RowMatrix>(v.data(), d, d);
  v = detail::read_values(in, "sigma1");
  m.sigma1 = Eigen::Map<RowMatrix>(v.data(), d, d);
  v = detail::read_values(in, "pi1");
  if (!v.empty()) m.pi1 = v[0];
  return m;
}

inline void write_params(std::ostream& out, const MrfParams& p) {
  out << "mrf " << p.betas.size() << '\n';
  out << "gamma " << format_exact(p.gamma) << '\n';
  detail::write_values(out, "betas", p.betas.data(), static_cast<Eigen::Index>(p.betas.size()));
}

inline MrfParams read_mrf_params(std::istream& in) {
  std::string line;
  std::getline(in, line);
  if (line.rfind("mrf ", 0) != 0) throw DataError("params: bad mrf header");
  MrfParams p;
  auto g = detail::read_values(in, "gamma");
  if (g.size() != 1) throw DataError("params: bad gamma");
  p.gamma = g[0];
  p.betas = detail::read_values(in, "betas");
  return p;
}

inline void write_params(std::ostream& out, const PriorSpec& p) {
  const Eigen::Index d = p.R.rows();
  out << "prior " << d << '\n';
  const RowMatrix C = p.C, R = p.R;
  detail::write_values(out, "C", C.data(), d * d);
  detail::write_values(out, "R", R.data(), d * d);
  out << "rho " << format_exact(p.rho) << '\n';
  out << "beta_upper " << format_exact(p.beta_upper) << '\n';
}

inline PriorSpec read_prior_spec(std::istream& in) {
  std::string line, key;
  Eigen::Index d = 0;
  std::getline(in, line);
  std::istringstream head(line);
  head >> key >> d;
  if (key != "prior" || d < 1) throw DataError("params: bad prior header");
  PriorSpec p;
  auto v = detail::read_values(in, "C");
  p.C = Eigen::Map<RowMatrix>(v.data(), d, d);
  v = detail::read_values(in, "R");
  p.R = Eigen::Map<RowMatrix>(v.data(), d, d);
  p.rho = detail::read_values(in, "rho").at(0);
  p.beta_upper = detail::read_values(in, "beta_upper").at(0);
  return p;
}

}  // namespace mrfmix
