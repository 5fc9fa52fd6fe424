// mrfmix command-line tool: fit, simulate, evaluate, rank, diagnose.
//
// Every artifact is rendered in memory and only written once the command has
// succeeded, so a failing run leaves no partial output. Each output directory
// gets a manifest.txt that doubles as a config file:
//
//   mrfmix --config run/manifest.txt fit
//
// reruns the same command and reproduces the CSVs byte for byte.

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mrfmix/mrfmix.hpp"

namespace fs = std::filesystem;
using namespace mrfmix;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open file");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

/// Files of one command, committed together at the end.
class Artifacts {
 public:
  std::ostream& open(const std::string& name) { return files_[name]; }

  void commit(const std::string& dir) const {
    fs::create_directories(dir);
    for (const auto& [name, body] : files_) {
      const fs::path final_path = fs::path(dir) / name;
      const fs::path tmp = final_path.string() + ".partial";
      {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError(tmp.string() + ": cannot write");
        out << body.str();
      }
      fs::rename(tmp, final_path);
    }
  }

 private:
  std::map<std::string, std::ostringstream> files_;
};

struct Globals {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out;
};

// Global options plus those of the subcommand that ran; unset options are left out.
void write_manifest(Artifacts& art, const CLI::App& app, const std::vector<std::string>& inputs) {
  auto& m = art.open("manifest.txt");
  m << "# mrfmix manifest 1\n";
  std::string active;
  for (const auto* sub : app.get_subcommands()) active = sub->get_name() + ".";
  std::istringstream all(app.config_to_str(true, false));
  for (std::string line; std::getline(all, line);) {
    if (line.ends_with("=\"\"")) continue;
    const auto eq = line.find('=');
    const auto dot = line.find('.');
    const bool scoped = dot != std::string::npos && dot < eq;
    if (!scoped || line.starts_with(active)) m << line << '\n';
  }
  for (std::size_t i = 0; i < inputs.size(); ++i)
    m << "input_sha256." << i << "='" << inputs[i] << " " << sha256_file(inputs[i]) << "'\n";
}

std::string num(double v) { return format_double(v); }

// ---------------------------------------------------------------------------
// Diagnostics shared by fit and diagnose

struct TraceSet {
  std::vector<std::string> names;
  // [param][chain][draw]
  std::vector<std::vector<std::vector<double>>> values;
};

void write_diagnostics(std::ostream& out, const TraceSet& t, double threshold, bool with_pass,
                       std::size_t* n_fail = nullptr) {
  CsvWriter csv(out);
  std::vector<std::string> head{"param", "rhat", "mean", "sd", "q2.5", "q97.5"};
  if (with_pass) head.push_back("pass");
  csv.header(head);
  std::size_t fails = 0;
  for (std::size_t p = 0; p < t.names.size(); ++p) {
    const auto& chains = t.values[p];
    std::vector<double> pooled;
    for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
    const Summary s = summarize(pooled);
    std::string r = "NA";
    bool pass = true;
    if (chains.size() >= 2 && chains.front().size() >= 10) {
      const double v = rhat(chains);
      r = num(v);
      pass = v < threshold;
    }
    if (!pass) ++fails;
    std::vector<std::string> row{t.names[p], r, num(s.mean), num(s.sd), num(s.q025), num(s.q975)};
    if (with_pass) row.push_back(pass ? "1" : "0");
    csv.row(row);
  }
  if (n_fail) *n_fail = fails;
}

// ---------------------------------------------------------------------------
// fit

struct FitOptions {
  std::string scores;
  std::vector<std::string> networks;
  std::vector<std::string> columns;
  std::string model = "smjm";
  std::string cov = "general";
  int chains = 3;
  int burnin = 5000;
  int keep = 10000;
  int thin = 1;
  std::vector<double> fixed_betas;
  double rw_step = 0.1;
};

int cmd_fit(const FitOptions& o, const Globals& g, const CLI::App& app) {
  SamplerConfig cfg;
  if (o.model == "mrf") cfg.model = ModelKind::kMrf;
  else if (o.model != "smjm") throw UsageError("--model must be smjm or mrf");
  if (o.cov == "diagonal") cfg.covariance = CovarianceMode::kDiagonal;
  else if (o.cov != "general") throw UsageError("--cov must be general or diagonal");
  if (cfg.model == ModelKind::kMrf && o.networks.empty())
    throw UsageError("--model mrf needs at least one --network");
  if (cfg.model == ModelKind::kStandardMixture && !o.networks.empty())
    throw UsageError("--network is only used with --model mrf");
  if (!o.fixed_betas.empty()) {
    if (o.fixed_betas.size() != o.networks.size())
      throw UsageError("--fixed-betas needs one value per network");
    cfg.fixed_betas = o.fixed_betas;
  }
  cfg.n_chains = o.chains;
  cfg.n_burnin = o.burnin;
  cfg.n_keep = o.keep;
  cfg.thin = o.thin;
  cfg.seed = g.seed;
  cfg.threads = g.threads;
  cfg.rw_step_init = o.rw_step;
  try {
    cfg.validate();
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }

  GeneTable table = read_scores(o.scores);
  if (!o.columns.empty()) {
    std::vector<int> idx;
    for (const auto& c : o.columns) {
      auto it = std::find(table.columns().begin(), table.columns().end(), c);
      if (it == table.columns().end()) throw DataError(o.scores + ": no score column '" + c + "'");
      idx.push_back(static_cast<int>(it - table.columns().begin()));
    }
    table = table.select_columns(idx);
  }
  std::vector<RawNetwork> raw;
  for (const auto& p : o.networks) raw.push_back(read_network(p));
  AlignmentReport report;
  const NetworkSet nets = project_networks(table, raw, &report);
  const PriorSpec prior = build_prior_spec(table);
  const MultiChainResult res = run_multichain(cfg, ModelInputs{table, nets, prior});

  Artifacts art;
  const RankTable ranks = rank_items(table.ids(), res.p_hat);
  {
    CsvWriter csv(art.open("ranks.csv"));
    csv.header({"id", "p_hat", "rank"});
    for (const auto& r : ranks.rows) csv.row({r.id, num(r.p_hat), std::to_string(r.rank)});
  }

  std::vector<std::string> net_names;
  for (std::size_t k = 0; k < nets.size(); ++k) net_names.push_back(nets[k].name);
  const auto params = monitored_parameters(cfg, table.dim(), table.columns(), net_names);
  TraceSet traces_set;
  for (const auto& p : params) {
    traces_set.names.push_back(p.name);
    traces_set.values.push_back(traces(res, p));
  }
  write_diagnostics(art.open("diagnostics.csv"), traces_set, 1.1, false);

  {
    CsvWriter csv(art.open("params.csv"));
    csv.header({"param", "mean", "sd", "q2.5", "q97.5"});
    auto emit = [&](const std::string& name, const std::vector<double>& v) {
      const Summary s = summarize(v);
      csv.row({name, num(s.mean), num(s.sd), num(s.q025), num(s.q975)});
    };
    for (std::size_t p = 0; p < params.size(); ++p) {
      std::vector<double> pooled;
      for (const auto& c : traces_set.values[p]) pooled.insert(pooled.end(), c.begin(), c.end());
      emit(params[p].name, pooled);
    }
    const auto draws = res.pooled_samples();
    for (int l = 0; l < table.dim(); ++l) {
      std::vector<double> v;
      for (const auto* s : draws) v.push_back(s->mu0(l) + s->theta(l));
      emit("mu1_" + table.columns()[static_cast<std::size_t>(l)], v);
    }
    std::vector<double> n1;
    for (const auto* s : draws) n1.push_back(static_cast<double>(s->n_targets));
    emit("n_targets", n1);
    if (table.dim() > 1 && cfg.covariance == CovarianceMode::kGeneral && draws.size() >= 100) {
      for (int j = 0; j < 2; ++j) {
        const CorrelationEstimate est = posterior_correlations(sigma_draws(res, j));
        for (int a = 0; a < table.dim(); ++a)
          for (int b = a + 1; b < table.dim(); ++b)
            csv.row({"corr" + std::to_string(j) + "_" + table.columns()[static_cast<std::size_t>(a)] +
                         "_" + table.columns()[static_cast<std::size_t>(b)],
                     num(est.mean(a, b)), "NA", num(est.lower(a, b)), num(est.upper(a, b))});
      }
    }
  }

  {
    CsvWriter csv(art.open("chains.csv"));
    csv.header({"chain", "seed", "init_quantile", "acceptance_rate", "final_rw_step"});
    for (std::size_t c = 0; c < res.chains.size(); ++c) {
      const auto start = cfg.start_for(static_cast<int>(c));
      const auto& ch = res.chains[c];
      std::string step = "NA";
      if (!ch.final_state.rw_step.empty()) {
        step.clear();
        for (std::size_t k = 0; k < ch.final_state.rw_step.size(); ++k)
          step += (k ? ";" : "") + num(ch.final_state.rw_step[k]);
      }
      csv.row({std::to_string(c + 1), std::to_string(start.seed), num(start.init_quantile),
               cfg.model == ModelKind::kMrf ? num(ch.acceptance_rate()) : "NA", step});
    }
  }

  for (std::size_t c = 0; c < res.chains.size(); ++c) {
    CsvWriter csv(art.open("trace_chain" + std::to_string(c + 1) + ".csv"));
    std::vector<std::string> head{"iteration"};
    head.insert(head.end(), traces_set.names.begin(), traces_set.names.end());
    csv.header(head);
    const std::size_t n = res.chains[c].samples.size();
    for (std::size_t t = 0; t < n; ++t) {
      std::vector<std::string> row{
          std::to_string(cfg.n_burnin + 1 + static_cast<long long>(t) * cfg.thin)};
      for (const auto& p : traces_set.values) row.push_back(format_exact(p[c][t]));
      csv.row(row);
    }
  }

  {
    CsvWriter csv(art.open("alignment.csv"));
    csv.header({"network", "connected", "singletons", "dropped_edges", "unknown_ids", "self_loops",
                "duplicate_edges"});
    for (const auto& a : report.networks) {
      csv.row({a.name, std::to_string(a.connected), std::to_string(a.singletons),
               std::to_string(a.dropped_edges), std::to_string(a.unknown_ids),
               std::to_string(a.self_loops), std::to_string(a.duplicate_edges)});
      if (a.dropped_edges > 0)
        std::cerr << "warning: network " << a.name << ": " << a.dropped_edges
                  << " edges dropped (" << a.unknown_ids << " ids not in the score table)\n";
    }
  }

  std::vector<std::string> inputs{o.scores};
  inputs.insert(inputs.end(), o.networks.begin(), o.networks.end());
  write_manifest(art, app, inputs);
  art.commit(g.out);
  std::cerr << "fit: " << table.size() << " items, " << ranks.tied_at_one
            << " tied at rank 1, outputs in " << g.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::size_t items = DesignDefaults::kItems;
  std::size_t targets = 0;  // 0 = scale 487 of 3779
  bool targets_given = false;
  int replicates = 20;
  std::vector<double> sd;
  std::string labels;
  int label_sweeps = 500;
};

int cmd_simulate(const SimulateOptions& o, const Globals& g, const CLI::App& app) {
  if (o.replicates < 1) throw UsageError("--replicates must be >= 1");
  SimulationSpec spec = default_simulation(o.items, g.seed, o.replicates);
  if (o.targets_given) spec.n_targets = o.targets;
  spec.label_sweeps = o.label_sweeps;
  if (!o.sd.empty()) {
    if (o.sd.size() != 3) throw UsageError("--sd needs three values");
    const Vector sd = Eigen::Map<const Vector>(o.sd.data(), 3);
    spec.nontarget.cov = covariance_from(sd, DesignDefaults::nontarget_corr());
    spec.target.cov = covariance_from(sd, DesignDefaults::target_corr());
  }
  std::vector<std::string> inputs;
  if (!o.labels.empty()) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < spec.n_items; ++i) ids.push_back(item_id(i));
    spec.labels = read_labels(o.labels, ids);
    inputs.push_back(o.labels);
  }
  spec.validate();
  const SimulatedDesign design = build_design(spec);

  Artifacts art;
  for (std::size_t k = 0; k < design.nets.size(); ++k)
    write_network(art.open(design.network_names[k] + ".tsv"), design.nets, k, design.ids);
  char name[32];
  for (int r = 0; r < spec.n_replicates; ++r) {
    std::snprintf(name, sizeof name, "rep_%03d_", r + 1);
    write_scores(art.open(std::string(name) + "scores.tsv"), simulate_replicate(spec, design, r));
    write_labels(art.open(std::string(name) + "truth.tsv"), design.ids, design.truth);
  }
  {
    auto& d = art.open("design.txt");
    std::size_t n1 = 0;
    for (auto t : design.truth) n1 += t;
    d << "items=" << spec.n_items << "\ntargets=" << n1 << "\ngamma=" << format_exact(design.phi.gamma)
      << "\n";
    for (std::size_t k = 0; k < design.network_names.size(); ++k)
      d << "beta." << design.network_names[k] << "=" << format_exact(design.phi.betas[k])
        << "\nedges." << design.network_names[k] << "=" << design.nets.edge_count(k) << "\n";
    write_params(d, MixtureParams{spec.nontarget.mean, spec.target.mean - spec.nontarget.mean,
                                  spec.nontarget.cov, spec.target.cov, CovarianceMode::kGeneral,
                                  std::nullopt});
  }
  write_manifest(art, app, inputs);
  art.commit(g.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
  std::string truth;
  std::vector<std::string> methods;
  int replicates = 1;
};

std::string expand(std::string tmpl, int r) {
  char rep[16];
  std::snprintf(rep, sizeof rep, "%03d", r);
  for (auto pos = tmpl.find("{rep}"); pos != std::string::npos; pos = tmpl.find("{rep}"))
    tmpl.replace(pos, 5, rep);
  return tmpl;
}

struct MethodSpec {
  std::string name;
  std::string path;
  std::string column = "p_hat";
};

MethodSpec parse_method(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("--method expects NAME=PATH[#COLUMN]: " + s);
  MethodSpec m{s.substr(0, eq), s.substr(eq + 1)};
  if (const auto hash = m.path.rfind('#'); hash != std::string::npos) {
    m.column = m.path.substr(hash + 1);
    m.path = m.path.substr(0, hash);
  }
  return m;
}

int cmd_evaluate(const EvaluateOptions& o, const Globals& g, const CLI::App& app) {
  if (o.methods.empty()) throw UsageError("evaluate needs at least one --method");
  if (o.replicates < 1) throw UsageError("--replicates must be >= 1");
  std::vector<MethodSpec> methods;
  for (const auto& s : o.methods) methods.push_back(parse_method(s));

  std::vector<std::string> inputs;
  std::vector<std::vector<RocCurve>> curves(methods.size());
  Artifacts art;
  CsvWriter auc_csv(art.open("auc.csv"));
  auc_csv.header({"method", "replicate", "auc"});
  for (int r = 1; r <= o.replicates; ++r) {
    const std::string truth_path = expand(o.truth, r);
    const TextTable tt = read_text_table(truth_path);
    std::vector<std::string> ids;
    for (const auto& row : tt.rows) ids.push_back(row[0]);
    const Labels truth = read_labels(truth_path, ids);
    inputs.push_back(truth_path);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const std::string path = expand(methods[m].path, r);
      if (!fs::exists(path))
        throw DataError("replicate mismatch: " + path + " missing for replicate " + std::to_string(r));
      const auto scores = read_item_values(path, ids, methods[m].column);
      inputs.push_back(path);
      curves[m].push_back(roc(scores, truth));
      auc_csv.row({methods[m].name, std::to_string(r), num(curves[m].back().auc)});
    }
  }
  CsvWriter roc_csv(art.open("roc.csv"));
  roc_csv.header({"method", "fpr", "tpr"});
  CsvWriter sum_csv(art.open("summary.csv"));
  sum_csv.header({"method", "mean_auc", "sd_auc", "replicates", "averaged_curve_auc"});
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const RocCurve avg = average_roc(curves[m]);
    for (std::size_t i = 0; i < avg.fpr.size(); ++i)
      roc_csv.row({methods[m].name, num(avg.fpr[i]), num(avg.tpr[i])});
    std::vector<double> aucs;
    for (const auto& c : curves[m]) aucs.push_back(c.auc);
    const Summary s = summarize(aucs);
    sum_csv.row({methods[m].name, num(s.mean), num(s.sd), std::to_string(aucs.size()), num(avg.auc)});
  }
  write_manifest(art, app, inputs);
  art.commit(g.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// rank

int cmd_rank(const std::string& probs, const std::string& column, const Globals& g,
             const CLI::App& app) {
  const TextTable t = read_text_table(probs);
  const int id_col = t.column("id");
  if (id_col < 0) throw DataError(probs + ": no 'id' column");
  std::vector<std::string> ids;
  for (const auto& row : t.rows) ids.push_back(row[static_cast<std::size_t>(id_col)]);
  const auto p = read_item_values(probs, ids, column);
  const RankTable ranks = rank_items(ids, p);
  Artifacts art;
  CsvWriter csv(art.open("ranks.csv"));
  csv.header({"id", "p_hat", "rank"});
  for (const auto& r : ranks.rows) csv.row({r.id, num(r.p_hat), std::to_string(r.rank)});
  art.open("rank_summary.txt") << "items=" << ranks.rows.size() << "\ntied_at_one=" << ranks.tied_at_one
                               << "\n";
  write_manifest(art, app, {probs});
  art.commit(g.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// diagnose

int cmd_diagnose(const std::vector<std::string>& files, double threshold, const Globals& g,
                 const CLI::App& app) {
  if (files.size() < 2) throw UsageError("diagnose needs at least two --trace files");
  TraceSet t;
  std::vector<std::vector<std::string>> iterations;
  for (std::size_t c = 0; c < files.size(); ++c) {
    const TextTable tab = read_text_table(files[c]);
    if (tab.header.size() < 2 || tab.header[0] != "iteration")
      throw DataError(files[c] + ": not a trace file");
    const std::vector<std::string> names(tab.header.begin() + 1, tab.header.end());
    if (c == 0) {
      t.names = names;
      t.values.assign(names.size(), {});
    } else if (names != t.names) {
      throw DataError(files[c] + ": parameters differ from " + files[0]);
    }
    if (c > 0 && tab.rows.size() != iterations[0].size())
      throw DataError(files[c] + ": chain length differs from " + files[0]);
    iterations.emplace_back();
    for (auto& v : t.values) v.emplace_back();
    for (std::size_t r = 0; r < tab.rows.size(); ++r) {
      iterations.back().push_back(tab.rows[r][0]);
      for (std::size_t p = 0; p < names.size(); ++p) {
        double v;
        if (!detail::parse_double(tab.rows[r][p + 1], v))
          throw DataError(detail::location(files[c], tab.line_numbers[r]) + "invalid number");
        t.values[p][c].push_back(v);
      }
    }
  }
  if (iterations[0].size() < 10) throw DataError("diagnose: need at least 10 draws per chain");
  Artifacts art;
  std::size_t fails = 0;
  write_diagnostics(art.open("diagnostics.csv"), t, threshold, true, &fails);
  {
    CsvWriter csv(art.open("traces_long.csv"));
    csv.header({"chain", "iteration", "param", "value"});
    for (std::size_t c = 0; c < files.size(); ++c)
      for (std::size_t p = 0; p < t.names.size(); ++p)
        for (std::size_t r = 0; r < iterations[c].size(); ++r)
          csv.row({std::to_string(c + 1), iterations[c][r], t.names[p],
                   format_exact(t.values[p][c][r])});
  }
  art.open("diagnose_summary.txt") << "threshold=" << num(threshold) << "\nparameters=" << t.names.size()
                                   << "\nfailing=" << fails << "\nstatus=" << (fails ? "fail" : "pass")
                                   << "\n";
  write_manifest(art, app, files);
  art.commit(g.out);
  std::cerr << "diagnose: " << fails << " of " << t.names.size() << " parameters with R-hat >= "
            << threshold << (fails ? " (fail)\n" : " (pass)\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian mixture models with Markov random field priors over gene networks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::ignore);

  Globals g;
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (0 = one per chain)")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->required();

  FitOptions fo;
  auto* fit = app.add_subcommand("fit", "run the MCMC sampler and write ranks, parameters, diagnostics");
  fit->fallthrough();
  fit->add_option("--scores", fo.scores, "score TSV: id then one column per source")->required();
  fit->add_option("--network", fo.networks, "edge list TSV (repeatable; name = file stem)");
  fit->add_option("--columns", fo.columns, "subset of score columns to model");
  fit->add_option("--model", fo.model, "smjm or mrf")->capture_default_str();
  fit->add_option("--cov", fo.cov, "general or diagonal")->capture_default_str();
  fit->add_option("--chains", fo.chains)->capture_default_str();
  fit->add_option("--burnin", fo.burnin)->capture_default_str();
  fit->add_option("--keep", fo.keep)->capture_default_str();
  fit->add_option("--thin", fo.thin)->capture_default_str();
  fit->add_option("--fixed-betas", fo.fixed_betas, "hold network weights at these values");
  fit->add_option("--rw-step", fo.rw_step, "initial random-walk step")->capture_default_str();

  SimulateOptions so;
  auto* sim = app.add_subcommand("simulate", "generate replicate data sets from the default design");
  sim->fallthrough();
  sim->add_option("--items", so.items)->capture_default_str();
  auto* targets_opt = sim->add_option("--targets", so.targets, "target count (default: 12.9% of items)");
  sim->add_option("--replicates", so.replicates)->capture_default_str();
  sim->add_option("--sd", so.sd, "conditional SDs of B, E, S");
  sim->add_option("--labels", so.labels, "explicit truth labels (id, truth) over g00001..");
  sim->add_option("--label-sweeps", so.label_sweeps)->capture_default_str();

  EvaluateOptions eo;
  auto* eval = app.add_subcommand("evaluate", "per-replicate AUC and averaged ROC curves");
  eval->fallthrough();
  eval->add_option("--truth", eo.truth, "truth TSV path; {rep} expands to 001, 002, ..")->required();
  eval->add_option("--method", eo.methods, "NAME=PATH[#COLUMN], PATH may contain {rep}")->required();
  eval->add_option("--replicates", eo.replicates)->capture_default_str();

  std::string probs, column = "p_hat";
  auto* rank = app.add_subcommand("rank", "competition ranks from per-item probabilities");
  rank->fallthrough();
  rank->add_option("--probs", probs, "CSV/TSV with an id column")->required();
  rank->add_option("--column", column)->capture_default_str();

  std::vector<std::string> trace_files;
  double threshold = 1.1;
  auto* diag = app.add_subcommand("diagnose", "R-hat from per-chain trace files");
  diag->fallthrough();
  diag->add_option("--trace", trace_files, "trace CSV per chain (>= 2)")->required();
  diag->add_option("--threshold", threshold)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  so.targets_given = targets_opt->count() > 0;

  try {
    if (*fit) return cmd_fit(fo, g, app);
    if (*sim) return cmd_simulate(so, g, app);
    if (*eval) return cmd_evaluate(eo, g, app);
    if (*rank) return cmd_rank(probs, column, g, app);
    if (*diag) return cmd_diagnose(trace_files, threshold, g, app);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
