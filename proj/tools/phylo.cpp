// Command-line front end: tree simulation, data simulation, inference,
// verification suites, replicated grids and report aggregation.
//
// Exit codes: 0 success; 1 verification suite failed; 2 configuration or
// input error; 3 numeric guard tripped; 4 grid finished with failed cells.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "phylo/contraction.hpp"
#include "phylo/divergences.hpp"
#include "phylo/experiments.hpp"
#include "phylo/likelihood.hpp"
#include "phylo/mcmc.hpp"
#include "phylo/newick.hpp"
#include "phylo/priors.hpp"
#include "phylo/sites.hpp"
#include "phylo/stats.hpp"
#include "phylo/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace phylo;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

void write_file_atomic(const fs::path& path, const std::vector<uint8_t>& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void prepare_out_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir))
      throw std::invalid_argument(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir) && !force)
      throw std::invalid_argument(dir.string() +
                                  " is not empty (use --force to overwrite)");
  } else {
    fs::create_directories(dir);
  }
}

// Seed resolution: explicit flag wins, then PHYLO_SEED, then 1.
uint64_t resolve_seed(bool seed_given, uint64_t seed_flag) {
  if (seed_given) return seed_flag;
  if (const char* env = std::getenv("PHYLO_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw std::invalid_argument("PHYLO_SEED is not an integer");
    }
  }
  return 1;
}

struct ManifestWriter {
  json m;
  std::string started = timestamp();

  ManifestWriter(const std::string& subcommand, uint64_t seed) {
    m["tool_version"] = kVersion;
    m["subcommand"] = subcommand;
    m["master_seed"] = seed;
    m["inputs"] = json::array();
    m["outputs"] = json::array();
  }
  void input(const fs::path& p) { m["inputs"].push_back(p.string()); }
  void output(const fs::path& p) { m["outputs"].push_back(p.string()); }
  void finish(const fs::path& dir) {
    m["started"] = started;
    m["finished"] = timestamp();
    write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
  }
};

// ------------------------------------------------------------ simulate-trees

int cmd_simulate_trees(const std::string& prior, int n_min, int n_max,
                       double lambda, bool lambda_given, uint64_t seed,
                       const std::string& out, bool force) {
  const PriorKind kind = prior_kind_from_string(prior);
  if (kind == PriorKind::uniform && !lambda_given)
    throw std::invalid_argument("lambda required for the uniform prior");
  prepare_out_dir(out, force);

  ManifestWriter manifest("simulate-trees", seed);
  manifest.m["config"] = {{"prior", prior},   {"n_min", n_min},
                          {"n_max", n_max},   {"lambda", lambda},
                          {"seed", seed},     {"out", out}};

  Rng rng(seed);
  std::vector<std::pair<std::string, std::string>> named;
  if (kind == PriorKind::kingman) {
    const auto seq = nested_kingman_sequence(n_min, n_max, rng);
    for (const auto& t : seq) {
      const fs::path p = fs::path(out) / ("tree_n" + std::to_string(t.n) + ".nwk");
      write_file_atomic(p, to_newick(t) + "\n");
      manifest.output(p);
      named.emplace_back("tree_n" + std::to_string(t.n), to_newick(t));
    }
  } else {
    const auto seq = nested_uniform_sequence(n_min, n_max, lambda, rng);
    for (const auto& t : seq) {
      const fs::path p = fs::path(out) / ("tree_n" + std::to_string(t.n) + ".nwk");
      const fs::path sidecar =
          fs::path(out) / ("tree_n" + std::to_string(t.n) + ".json");
      write_file_atomic(p, to_newick(t) + "\n");
      write_file_atomic(sidecar, unrooted_sidecar_json(t) + "\n");
      manifest.output(p);
      manifest.output(sidecar);
      named.emplace_back("tree_n" + std::to_string(t.n), to_newick(t));
    }
  }
  const fs::path nexus = fs::path(out) / "trees.nex";
  write_file_atomic(nexus, nexus_trees_block(named));
  manifest.output(nexus);
  manifest.finish(out);
  return 0;
}

// ------------------------------------------------------------- simulate-data

// Reads either tree kind: a JSON sidecar next to the file wins, then the
// ranked parser, then the plain unrooted parser.
struct LoadedTree {
  bool ranked = false;
  RankedTree rtree;
  UnrootedTree utree;
};

LoadedTree load_tree(const fs::path& file) {
  LoadedTree out;
  const fs::path replaced = fs::path(file).replace_extension(".json");
  if (fs::exists(replaced)) {
    out.utree = parse_unrooted_sidecar(read_file(replaced));
    return out;
  }
  const std::string text = read_file(file);
  try {
    out.rtree = parse_ranked_newick(text);
    out.ranked = true;
  } catch (const std::exception&) {
    out.utree = parse_unrooted_newick(text);
  }
  return out;
}

int cmd_simulate_data(const std::string& tree_file, double mu, long k,
                      int replicates, uint64_t seed, const std::string& out,
                      bool force) {
  if (mu <= 0.0) throw std::invalid_argument("mu must be positive");
  if (k <= 0) throw std::invalid_argument("k must be positive");
  if (replicates <= 0) throw std::invalid_argument("replicates must be positive");
  prepare_out_dir(out, force);

  const auto tree = load_tree(tree_file);
  const auto model = MutationModel::binary_symmetric(mu);

  ManifestWriter manifest("simulate-data", seed);
  manifest.m["config"] = {{"tree", tree_file}, {"mu", mu},
                          {"k", k},            {"replicates", replicates},
                          {"seed", seed},      {"out", out}};
  manifest.input(tree_file);

  for (int rep = 0; rep < replicates; ++rep) {
    const uint64_t rep_seed = Rng::stream(seed, 0xda7a, rep).next();
    const SiteMatrix data =
        tree.ranked
            ? simulate_sites(tree.rtree, model, static_cast<int>(k), rep_seed)
            : simulate_sites(tree.utree, model, static_cast<int>(k), rep_seed);
    const std::string stem = "data_r" + std::to_string(rep);
    const fs::path txt = fs::path(out) / (stem + ".txt");
    const fs::path nex = fs::path(out) / (stem + ".nex");
    const fs::path events = fs::path(out) / (stem + ".events");
    write_file_atomic(txt, to_text(data, model));
    write_file_atomic(nex, to_nexus_characters(data, model));
    write_file_atomic(events, event_sidecar_bytes(data));
    manifest.output(txt);
    manifest.output(nex);
    manifest.output(events);
  }
  manifest.finish(out);
  return 0;
}

// --------------------------------------------------------------------- infer

int cmd_infer(const std::string& data_file, const std::string& prior, double mu,
              double lambda, long iters, long burn_in, long thin,
              const std::string& report_mode, bool prior_only, int n_leaves,
              uint64_t seed, const std::string& out, bool force) {
  const PriorKind kind = prior_kind_from_string(prior);
  prepare_out_dir(out, force);

  const auto model = MutationModel::binary_symmetric(mu);
  ChainConfig config;
  config.kind = kind;
  config.lambda = lambda;
  config.settings.iterations = iters;
  config.settings.burn_in = burn_in;
  config.settings.thinning = thin;
  config.seed = seed;
  config.report_mode = kind == PriorKind::uniform
                           ? TopologyMode::unrooted
                           : topology_mode_from_string(report_mode);
  config.prior_only = prior_only;

  SiteMatrix data;
  if (prior_only) {
    if (n_leaves < 2) throw std::invalid_argument("--n required with --prior-only");
    config.n = n_leaves;
  } else {
    if (data_file.empty())
      throw std::invalid_argument("--data required unless --prior-only");
    data = parse_text(read_file(data_file), model);
    config.n = data.rows();
    config.model = &model;
    config.data = &data;
  }

  ManifestWriter manifest("infer", seed);
  manifest.m["config"] = {{"data", data_file},
                          {"tree_prior", prior},
                          {"mu", mu},
                          {"lambda", lambda},
                          {"chain_iters", iters},
                          {"burn_in", burn_in},
                          {"thin", thin},
                          {"report_mode", to_string(config.report_mode)},
                          {"prior_only", prior_only},
                          {"n", config.n},
                          {"seed", seed},
                          {"out", out}};
  if (!prior_only) manifest.input(data_file);

  const ChainTrace trace = run_chain(config);
  const auto diag = diagnostics(trace);

  const fs::path trace_path = fs::path(out) / "trace.csv";
  const fs::path trees_path = fs::path(out) / "trees.nwk";
  const fs::path diag_path = fs::path(out) / "diagnostics.json";
  write_file_atomic(trace_path, trace_csv(trace));
  write_file_atomic(trees_path, trace_newick(trace));
  json dj;
  dj["ess_log_likelihood"] = diag.ess;
  dj["overall_acceptance"] = diag.overall_acceptance;
  dj["acceptance_by_kind"] = {{"branch_scale", diag.acceptance_rate[0]},
                              {"all_scale", diag.acceptance_rate[1]},
                              {"topology", diag.acceptance_rate[2]},
                              {"node_age", diag.acceptance_rate[3]}};
  dj["retained_samples"] = trace.samples.size();
  write_file_atomic(diag_path, dj.dump(2) + "\n");
  manifest.output(trace_path);
  manifest.output(trees_path);
  manifest.output(diag_path);
  manifest.finish(out);
  return 0;
}

// -------------------------------------------------------------------- verify

struct CheckList {
  json checks = json::array();
  bool all_pass = true;

  void add(const std::string& name, const std::string& instance, double value,
           double reference, bool pass) {
    checks.push_back({{"name", name},
                      {"instance", instance},
                      {"value", value},
                      {"reference", reference},
                      {"pass", pass}});
    all_pass = all_pass && pass;
  }
};

CheckList verify_pruning(uint64_t seed) {
  CheckList list;
  Rng rng(seed);
  bool within = true;
  double worst_rel = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + rng.uniform_int(5);
    const auto m = rep % 2 == 0
                       ? MutationModel::binary_symmetric(0.05 + rng.uniform())
                       : MutationModel::jukes_cantor(0.02 + 0.3 * rng.uniform());
    const auto t = sample(KingmanPrior{n}, rng);
    const auto view = RootedView::from_ranked(t);
    std::vector<uint8_t> pattern(n);
    for (auto& a : pattern) a = static_cast<uint8_t>(rng.uniform_int(m.size()));
    const double fast = site_likelihood(view, m, pattern);
    const double slow = site_likelihood_brute_force(view, m, pattern);
    const double rel = std::abs(fast - slow) / std::max(fast, slow);
    worst_rel = std::max(worst_rel, rel);
    if (rel > 1e-12) within = false;
  }
  list.add("pruning-vs-enumeration", "100 random instances, n<=6", worst_rel,
           1e-12, within);

  double worst_norm = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 2 + rng.uniform_int(4);
    const auto m = MutationModel::binary_symmetric(0.2);
    const auto t = sample(KingmanPrior{n}, rng);
    const auto dist = leaf_distribution(t, m);
    double total = 0.0;
    for (double v : dist.p) total += v;
    worst_norm = std::max(worst_norm, std::abs(total - 1.0));
  }
  list.add("pattern-table-normalization", "10 random instances, n<=5",
           worst_norm, 1e-10, worst_norm < 1e-10);

  Rng rng2(seed + 1);
  double worst_dev = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto t = sample(UniformPrior{5, 1.0}, rng2);
    const auto m = MutationModel::binary_symmetric(0.4);
    std::vector<uint8_t> pattern(5);
    for (auto& a : pattern) a = static_cast<uint8_t>(rng2.uniform_int(2));
    worst_dev = std::max(worst_dev, root_invariance_max_deviation(t, m, pattern));
  }
  list.add("root-invariance", "10 reversible instances, n=5", worst_dev, 1e-12,
           worst_dev < 1e-12);
  return list;
}

CheckList verify_priors(uint64_t seed) {
  CheckList list;
  const int samples = 100000;
  {
    Rng rng(seed);
    std::map<std::string, long> counts;
    for (int i = 0; i < samples; ++i)
      ++counts[canonical_topology(sample(KingmanPrior{4}, rng),
                                  TopologyMode::ranked)];
    std::vector<long> c;
    for (const auto& [k, v] : counts) c.push_back(v);
    const double p = counts.size() == 18 ? chi_square_uniform_pvalue(c) : 0.0;
    list.add("ranked-topology-uniform", "n=4, 18 cells, 1e5 samples", p, 0.001,
             p > 0.001);
  }
  {
    Rng rng(seed + 1);
    std::map<std::string, long> counts;
    for (int i = 0; i < samples; ++i)
      ++counts[canonical_topology(sample(UniformPrior{5, 1.0}, rng),
                                  TopologyMode::unrooted)];
    std::vector<long> c;
    for (const auto& [k, v] : counts) c.push_back(v);
    const double p = counts.size() == 15 ? chi_square_uniform_pvalue(c) : 0.0;
    list.add("unrooted-topology-uniform", "n=5, 15 cells, 1e5 samples", p,
             0.001, p > 0.001);
  }
  {
    Rng rng(seed + 2);
    std::vector<double> xs;
    for (int i = 0; i < samples; ++i)
      xs.push_back(sample(KingmanPrior{5}, rng).holding_times[3]);
    const double rate = holding_rate(3);
    const double d =
        ks_statistic(xs, [&](double v) { return 1.0 - std::exp(-rate * v); });
    const double p = ks_pvalue(d, xs.size());
    list.add("holding-time-exponential", "n=5 leafmost waiting time", p, 0.001,
             p > 0.001);
  }
  {
    Rng rng(seed + 3);
    std::vector<double> totals;
    for (int i = 0; i < 4000; ++i)
      totals.push_back(sample(KingmanPrior{200}, rng).total_height());
    const double m = mean(totals);
    const double se = std::sqrt(sample_variance(totals) / totals.size());
    list.add("coalescent-total-length", "n=200, 4000 samples", m, 2.0,
             std::abs(m - 2.0) < 3.0 * se + 0.01);
  }
  return list;
}

CheckList verify_divergence_bounds(uint64_t seed) {
  CheckList list;
  Rng rng(seed);
  const auto m = MutationModel::binary_symmetric(0.1);
  long violations = 0;
  const int instances = 300;
  for (int rep = 0; rep < instances; ++rep) {
    const int n = 3 + rng.uniform_int(2);
    auto t0 = sample(KingmanPrior{n}, rng);
    const double cap = 1.0 / (2.0 * m.eta());
    const double f =
        std::min(t0.holding_times[n - 2], cap) * rng.uniform(0.05, 0.9);
    RankedTree t = t0;
    do {
      t = t0;
      for (double& x : t.holding_times) x *= std::exp(rng.uniform(-0.4, 0.4));
    } while (t.holding_times[n - 2] <= f);
    const auto bound =
        divergence_bound(m, psi_derivative_sup(PriorKind::kingman, n), n, f);
    const auto p0 = leaf_distribution(t0, m);
    const auto p = leaf_distribution(t, m);
    double dist2 = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      const double d = t.holding_times[i] - t0.holding_times[i];
      dist2 += d * d;
    }
    if (kl_divergence(p0, p) > bound.kl_coefficient * std::sqrt(dist2))
      ++violations;
    if (kl_variation(p0, p) > bound.v0_coefficient * dist2) ++violations;
  }
  list.add("kl-and-variation-bounds", "300 floored coalescent instances",
           static_cast<double>(violations), 0.0, violations == 0);
  return list;
}

CheckList verify_tail_bounds(uint64_t seed) {
  CheckList list;
  long violations = 0;
  for (int i = 1; i <= 20; ++i) {
    for (int j = 1; j <= 20; ++j) {
      const double rate = 0.25 * i;
      const double f = 0.05 * j;
      if (exp_lower_tail_bound(rate, f) < exp_lower_tail_exact(rate, f))
        ++violations;
    }
  }
  list.add("lower-tail-bound-dominance", "20x20 (rate, f) grid",
           static_cast<double>(violations), 0.0, violations == 0);

  violations = 0;
  Rng rng(seed);
  for (int c = 0; c < 20; ++c) {
    std::vector<double> rates;
    for (int i = 0; i < 2 + rng.uniform_int(6); ++i)
      rates.push_back(0.2 + 3.0 * rng.uniform());
    const double g = 0.5 + 6.0 * rng.uniform();
    if (exp_max_tail_bound(rates, g) <
        exp_max_tail_exact(rates, g) * (1.0 - 1e-12))
      ++violations;
  }
  list.add("max-tail-bound-dominance", "20 (rates, g) cases",
           static_cast<double>(violations), 0.0, violations == 0);
  return list;
}

CheckList verify_conditions(uint64_t seed) {
  CheckList list;
  const auto m = MutationModel::binary_symmetric(0.1);
  {
    ContractionConfig cfg;
    cfg.kind = PriorKind::kingman;
    cfg.n = 4;
    cfg.w = m.w();
    const double topo_log = log_ranked_topology_count(4);
    bool finite = true, monotone = true;
    double last = 0.0;
    bool first = true;
    for (double k : {1e6, 1e8, 1e10, 1e12, 1e14, 1e16}) {
      cfg.k = k;
      cfg.C = 4.0 / std::sqrt(std::log(k));
      cfg.log_bn =
          divergence_bound(m, psi_derivative_sup(cfg.kind, cfg.n), cfg.n,
                           std::min(0.45 / m.eta(), cfg.schedule().f))
              .log_bn;
      const auto check = entropy_condition(cfg, topo_log, cfg.n - 1);
      finite =
          finite && std::isfinite(check.lhs_log) && std::isfinite(check.rhs_log);
      const double margin = check.lhs_log - check.rhs_log;
      if (!first && margin >= last) monotone = false;
      last = margin;
      first = false;
    }
    cfg.k = 1e16;
    cfg.C = 4.0 / std::sqrt(std::log(cfg.k));
    const bool satisfied = entropy_condition(cfg, topo_log, cfg.n - 1).satisfied;
    list.add("entropy-condition", "n=4 over k=1e6..1e16", satisfied ? 1.0 : 0.0,
             1.0, finite && monotone && satisfied);
  }
  {
    bool ok = true;
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const double f = 0.002 + 0.002 * i;
      const double g = 3.0 + 0.7 * i;
      const auto c = remaining_mass(KingmanPrior{5}, f, g, 40000, seed + i);
      ok = ok && c.within_bound;
      worst = std::max(worst, c.estimate - c.analytic_bound);
    }
    list.add("remaining-mass-coalescent", "10-point (f, g) grid at n=5", worst,
             0.0, ok);
  }
  {
    bool ok = true;
    for (int i = 0; i < 10; ++i) {
      const double f = 0.002 + 0.002 * i;
      const double g = 5.0 + 1.5 * i;
      const auto c =
          remaining_mass(UniformPrior{5, 1.0}, f, g, 40000, seed + 100 + i);
      ok = ok && c.within_bound;
    }
    list.add("remaining-mass-uniform", "10-point (f, g) grid at n=5",
             ok ? 1.0 : 0.0, 1.0, ok);
  }
  {
    RankedTree t0;
    t0.n = 3;
    t0.leaf_labels = {"1", "2", "3"};
    t0.mergers = {{0, 1}, {2, 3}};
    t0.holding_times = {1.0, 0.5};
    const auto c =
        prior_mass_near_truth(KingmanPrior{3}, t0, 0.1, 0.05, 1000000, seed);
    list.add("prior-mass-box-bound", "n=3 ball radius 0.1", c.ball_estimate,
             c.box_lower_bound,
             c.box_valid && c.ball_estimate >= c.box_lower_bound);
  }
  return list;
}

int cmd_verify(const std::string& suite, const std::string& config_file,
               const std::string& out) {
  uint64_t seed = 20240801;
  if (!config_file.empty()) {
    const auto cfg = json::parse(read_file(config_file));
    if (cfg.contains("seed")) seed = cfg.at("seed").get<uint64_t>();
  }
  CheckList list;
  if (suite == "pruning")
    list = verify_pruning(seed);
  else if (suite == "priors")
    list = verify_priors(seed);
  else if (suite == "lemma1")
    list = verify_divergence_bounds(seed);
  else if (suite == "lemma2")
    list = verify_tail_bounds(seed);
  else if (suite == "conditions")
    list = verify_conditions(seed);
  else
    throw std::invalid_argument("unknown suite: " + suite);

  json report;
  report["suite"] = suite;
  report["seed"] = seed;
  report["checks"] = list.checks;
  report["passed"] = list.all_pass;
  const std::string text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    prepare_out_dir(out, true);
    write_file_atomic(fs::path(out) / ("verify_" + suite + ".json"), text);
  }
  return list.all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------- grid

int cmd_grid(const std::string& spec_file, int workers, bool workers_given,
             const std::string& out, bool force, bool seed_given,
             uint64_t seed) {
  GridSpec spec = GridSpec::from_json(read_file(spec_file));
  if (workers_given) spec.workers = workers;
  if (seed_given) spec.master_seed = seed;
  prepare_out_dir(out, force);

  ManifestWriter manifest("grid", spec.master_seed);
  manifest.m["config"] = json::parse(spec.to_json());
  manifest.input(spec_file);

  const auto rows = run_grid(spec);
  const fs::path results = fs::path(out) / "results.csv";
  write_file_atomic(results, results_csv(rows));
  manifest.output(results);
  manifest.finish(out);

  long failed = 0;
  for (const auto& r : rows) failed += r.failed ? 1 : 0;
  if (failed > 0) {
    std::cerr << failed << " cells failed\n";
    return 4;
  }
  return 0;
}

// -------------------------------------------------------------------- report

int cmd_report(const std::string& results_file, const std::string& out,
               bool force) {
  const auto rows = parse_results_csv(read_file(results_file));
  prepare_out_dir(out, force);
  ManifestWriter manifest("report", 0);
  manifest.m["config"] = {{"results", results_file}, {"out", out}};
  manifest.input(results_file);

  const auto curves = aggregate(rows);
  const auto crossings = threshold_crossings(curves, 0.5);
  const fs::path curves_path = fs::path(out) / "curves.csv";
  const fs::path crossings_path = fs::path(out) / "crossings.csv";
  write_file_atomic(curves_path, curves_csv(curves));
  write_file_atomic(crossings_path, crossings_csv(crossings));
  manifest.output(curves_path);
  manifest.output(crossings_path);
  manifest.finish(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian phylogenetic tree inference and verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // simulate-trees
  auto* st = app.add_subcommand("simulate-trees",
                                "Sample a nested sequence of trees");
  std::string st_prior;
  int st_nmin = 4, st_nmax = 16;
  double st_lambda = 1.0;
  uint64_t st_seed = 0;
  std::string st_out;
  bool st_force = false;
  st->add_option("--prior", st_prior, "kingman or uniform")->required();
  st->add_option("--n-min", st_nmin, "smallest leaf count");
  st->add_option("--n-max", st_nmax, "largest leaf count");
  auto* st_lambda_opt =
      st->add_option("--lambda", st_lambda, "branch rate (uniform prior)");
  auto* st_seed_opt = st->add_option("--seed", st_seed, "master seed");
  st->add_option("--out", st_out, "output directory")->required();
  st->add_flag("--force", st_force, "overwrite a non-empty output directory");

  // simulate-data
  auto* sd = app.add_subcommand("simulate-data",
                                "Simulate site data along a tree");
  std::string sd_tree, sd_out;
  double sd_mu = 0.1;
  long sd_k = 1000;
  int sd_reps = 1;
  uint64_t sd_seed = 0;
  bool sd_force = false;
  sd->add_option("--tree", sd_tree, "newick file")->required();
  sd->add_option("--mu", sd_mu, "symmetric binary mutation rate")->required();
  sd->add_option("--k", sd_k, "number of sites")->required();
  sd->add_option("--replicates", sd_reps, "replicate data sets");
  auto* sd_seed_opt = sd->add_option("--seed", sd_seed, "master seed");
  sd->add_option("--out", sd_out, "output directory")->required();
  sd->add_flag("--force", sd_force, "overwrite a non-empty output directory");

  // infer
  auto* in = app.add_subcommand("infer", "Posterior sampling for one data set");
  std::string in_data, in_prior, in_out, in_mode = "rooted-unranked";
  double in_mu = 0.1, in_lambda = 1.0;
  long in_iters = 200000, in_burn = 100000, in_thin = 100;
  int in_n = 0;
  bool in_prior_only = false, in_force = false;
  uint64_t in_seed = 0;
  in->add_option("--data", in_data, "site matrix text file");
  in->add_option("--tree-prior", in_prior, "kingman or uniform")->required();
  in->add_option("--mu", in_mu, "mutation rate (fixed during inference)");
  in->add_option("--lambda", in_lambda, "branch rate (uniform prior)");
  in->add_option("--chain-iters", in_iters, "total iterations");
  in->add_option("--burn-in", in_burn, "burn-in iterations");
  in->add_option("--thin", in_thin, "thinning interval");
  in->add_option("--report-mode", in_mode,
                 "ranked, rooted-unranked or unrooted");
  in->add_flag("--prior-only", in_prior_only, "target the prior");
  in->add_option("--n", in_n, "leaf count (prior-only mode)");
  auto* in_seed_opt = in->add_option("--seed", in_seed, "chain seed");
  in->add_option("--out", in_out, "output directory")->required();
  in->add_flag("--force", in_force, "overwrite a non-empty output directory");

  // verify
  auto* ve = app.add_subcommand("verify", "Run a numeric verification suite");
  std::string ve_suite, ve_config, ve_out;
  ve->add_option("--suite", ve_suite,
                 "lemma1, lemma2, conditions, pruning or priors")
      ->required();
  ve->add_option("--config", ve_config, "JSON config (seed override)");
  ve->add_option("--out", ve_out, "directory for the JSON report");

  // grid
  auto* gr = app.add_subcommand("grid", "Run a replicated inference grid");
  std::string gr_spec, gr_out;
  int gr_workers = 1;
  uint64_t gr_seed = 0;
  bool gr_force = false;
  gr->add_option("--spec", gr_spec, "grid spec JSON")->required();
  auto* gr_workers_opt =
      gr->add_option("--workers", gr_workers, "worker threads");
  auto* gr_seed_opt = gr->add_option("--seed", gr_seed, "master seed override");
  gr->add_option("--out", gr_out, "output directory")->required();
  gr->add_flag("--force", gr_force, "overwrite a non-empty output directory");

  // report
  auto* re = app.add_subcommand("report", "Aggregate grid results");
  std::string re_results, re_out;
  bool re_force = false;
  re->add_option("--results", re_results, "results.csv from grid")->required();
  re->add_option("--out", re_out, "output directory")->required();
  re->add_flag("--force", re_force, "overwrite a non-empty output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (st->parsed())
      return cmd_simulate_trees(st_prior, st_nmin, st_nmax, st_lambda,
                                st_lambda_opt->count() > 0,
                                resolve_seed(st_seed_opt->count() > 0, st_seed),
                                st_out, st_force);
    if (sd->parsed())
      return cmd_simulate_data(sd_tree, sd_mu, sd_k, sd_reps,
                               resolve_seed(sd_seed_opt->count() > 0, sd_seed),
                               sd_out, sd_force);
    if (in->parsed())
      return cmd_infer(in_data, in_prior, in_mu, in_lambda, in_iters, in_burn,
                       in_thin, in_mode, in_prior_only, in_n,
                       resolve_seed(in_seed_opt->count() > 0, in_seed), in_out,
                       in_force);
    if (ve->parsed()) return cmd_verify(ve_suite, ve_config, ve_out);
    if (gr->parsed())
      return cmd_grid(gr_spec, gr_workers, gr_workers_opt->count() > 0, gr_out,
                      gr_force, gr_seed_opt->count() > 0, gr_seed);
    if (re->parsed()) return cmd_report(re_results, re_out, re_force);
  } catch (const std::domain_error& e) {
    std::cerr << "numeric guard: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
