#include "phylo/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "phylo/util.hpp"

namespace phylo {

void GridSpec::validate() const {
  if (leaf_counts.empty() || mutation_rates.empty() || site_counts.empty())
    throw std::invalid_argument("GridSpec: empty grid axis");
  if (!std::is_sorted(leaf_counts.begin(), leaf_counts.end()))
    throw std::invalid_argument("GridSpec: leaf counts must be ascending");
  for (size_t i = 1; i < site_counts.size(); ++i)
    if (site_counts[i] <= site_counts[i - 1])
      throw std::invalid_argument("GridSpec: site counts must be strictly increasing");
  if (site_counts.front() <= 0)
    throw std::invalid_argument("GridSpec: site counts must be positive");
  if (replicates <= 0) throw std::invalid_argument("GridSpec: replicates must be positive");
  if (workers <= 0) throw std::invalid_argument("GridSpec: workers must be positive");
  const int n_min = kind == PriorKind::kingman ? 2 : 4;
  if (leaf_counts.front() < std::max(n_min, 2))
    throw std::invalid_argument("GridSpec: leaf count below the prior minimum");
  for (double mu : mutation_rates)
    if (mu <= 0.0) throw std::invalid_argument("GridSpec: mutation rates must be positive");
  if (kind == PriorKind::uniform && report_mode != TopologyMode::unrooted)
    throw std::invalid_argument("GridSpec: uniform grids report unrooted topologies");
}

std::string GridSpec::to_json() const {
  nlohmann::json j;
  j["prior"] = to_string(kind);
  j["leaf_counts"] = leaf_counts;
  j["mutation_rates"] = mutation_rates;
  j["site_counts"] = site_counts;
  j["replicates"] = replicates;
  j["master_seed"] = master_seed;
  j["lambda"] = lambda;
  j["chain"] = {{"iterations", chain.iterations},
                {"burn_in", chain.burn_in},
                {"thinning", chain.thinning},
                {"scale_step", chain.scale_step},
                {"adapt_scale", chain.adapt_scale},
                {"weights",
                 {{"branch_scale", chain.weights.branch_scale},
                  {"all_scale", chain.weights.all_scale},
                  {"topology", chain.weights.topology},
                  {"node_age", chain.weights.node_age}}}};
  j["report_mode"] = to_string(report_mode);
  j["workers"] = workers;
  return j.dump(2);
}

GridSpec GridSpec::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  GridSpec spec;
  spec.kind = prior_kind_from_string(j.at("prior").get<std::string>());
  spec.leaf_counts = j.at("leaf_counts").get<std::vector<int>>();
  spec.mutation_rates = j.at("mutation_rates").get<std::vector<double>>();
  spec.site_counts = j.at("site_counts").get<std::vector<long>>();
  spec.replicates = j.at("replicates").get<int>();
  spec.master_seed = j.at("master_seed").get<uint64_t>();
  if (j.contains("lambda")) spec.lambda = j.at("lambda").get<double>();
  if (j.contains("chain")) {
    const auto& c = j.at("chain");
    if (c.contains("iterations")) spec.chain.iterations = c.at("iterations").get<long>();
    if (c.contains("burn_in")) spec.chain.burn_in = c.at("burn_in").get<long>();
    if (c.contains("thinning")) spec.chain.thinning = c.at("thinning").get<long>();
    if (c.contains("scale_step")) spec.chain.scale_step = c.at("scale_step").get<double>();
    if (c.contains("adapt_scale")) spec.chain.adapt_scale = c.at("adapt_scale").get<bool>();
    if (c.contains("weights")) {
      const auto& w = c.at("weights");
      spec.chain.weights.branch_scale = w.at("branch_scale").get<double>();
      spec.chain.weights.all_scale = w.at("all_scale").get<double>();
      spec.chain.weights.topology = w.at("topology").get<double>();
      spec.chain.weights.node_age = w.at("node_age").get<double>();
    }
  }
  if (j.contains("report_mode"))
    spec.report_mode = topology_mode_from_string(j.at("report_mode").get<std::string>());
  if (j.contains("workers")) spec.workers = j.at("workers").get<int>();
  spec.validate();
  return spec;
}

namespace {

struct Cell {
  int n_index = 0;
  int mu_index = 0;
  int k_index = 0;
  int replicate = 0;
};

uint64_t cell_seed(const GridSpec& spec, const char* role, int n, int mu_index,
                   long k, int replicate) {
  uint64_t h = spec.master_seed;
  for (const char* p = role; *p; ++p)
    h = Rng::splitmix64(h) ^ static_cast<uint64_t>(*p);
  h = Rng::splitmix64(h) ^ static_cast<uint64_t>(spec.kind == PriorKind::kingman ? 1 : 2);
  h = Rng::splitmix64(h) ^ static_cast<uint64_t>(n);
  h = Rng::splitmix64(h) ^ static_cast<uint64_t>(mu_index);
  h = Rng::splitmix64(h) ^ static_cast<uint64_t>(k);
  h = Rng::splitmix64(h) ^ static_cast<uint64_t>(replicate);
  return Rng::splitmix64(h);
}

ResultRow run_cell(const GridSpec& spec, const SiteMatrix& data,
                   const MutationModel& model, const std::string& true_key,
                   int n, double mu, long k, int replicate, uint64_t seed) {
  ChainConfig config;
  config.kind = spec.kind;
  config.n = n;
  config.lambda = spec.lambda;
  config.settings = spec.chain;
  config.seed = seed;
  config.prior_only = false;
  config.model = &model;
  config.data = &data;
  config.report_mode = spec.report_mode;

  const auto start = std::chrono::steady_clock::now();
  const ChainTrace trace = run_chain(config);
  const auto diag = diagnostics(trace);
  const auto stop = std::chrono::steady_clock::now();

  ResultRow row;
  row.prior = to_string(spec.kind);
  row.n = n;
  row.mu = mu;
  row.k = k;
  row.replicate = replicate;
  row.posterior_support = posterior_support(trace, true_key);
  row.acceptance_rate = diag.overall_acceptance;
  row.ess = diag.ess;
  row.seed = seed;
  row.wall_time_s =
      std::chrono::duration<double>(stop - start).count();
  return row;
}

}  // namespace

PreparedGridData prepare_grid_data(const GridSpec& spec) {
  spec.validate();
  const int n_max = spec.leaf_counts.back();
  const int n_base = spec.leaf_counts.front();
  const long k_max = spec.site_counts.back();

  PreparedGridData out;
  // One nested tree sequence per master seed.
  Rng tree_rng = Rng::stream(spec.master_seed, 0x74726565ULL);
  if (spec.kind == PriorKind::kingman)
    out.ranked_trees = nested_kingman_sequence(n_base, n_max, tree_rng);
  else
    out.unrooted_trees =
        nested_uniform_sequence(n_base, n_max, spec.lambda, tree_rng);

  auto tree_index = [&](int n) { return n - n_base; };
  for (int n : spec.leaf_counts) {
    if (spec.kind == PriorKind::kingman)
      out.true_keys[n] =
          canonical_topology(out.ranked_trees[tree_index(n)], spec.report_mode);
    else
      out.true_keys[n] = canonical_topology(out.unrooted_trees[tree_index(n)],
                                            spec.report_mode);
  }

  // Raw data: per (mu, replicate) one max-k simulation on the smallest tree,
  // then coupled extensions up the sequence.  Shared leaves carry identical
  // rows at every leaf count.
  std::vector<MutationModel> models;
  for (double mu : spec.mutation_rates)
    models.push_back(MutationModel::binary_symmetric(mu));

  for (int mi = 0; mi < static_cast<int>(spec.mutation_rates.size()); ++mi) {
    for (int rep = 0; rep < spec.replicates; ++rep) {
      SiteMatrix current;
      if (spec.kind == PriorKind::kingman)
        current = simulate_sites(out.ranked_trees[0], models[mi],
                                 static_cast<int>(k_max),
                                 cell_seed(spec, "data", n_base, mi, 0, rep));
      else
        current = simulate_sites(out.unrooted_trees[0], models[mi],
                                 static_cast<int>(k_max),
                                 cell_seed(spec, "data", n_base, mi, 0, rep));
      if (std::binary_search(spec.leaf_counts.begin(), spec.leaf_counts.end(),
                             n_base))
        out.data.emplace(std::make_tuple(n_base, mi, rep), current);
      for (int n = n_base; n < n_max; ++n) {
        const uint64_t s = cell_seed(spec, "extend", n + 1, mi, 0, rep);
        if (spec.kind == PriorKind::kingman)
          current =
              extend_sites(current, out.ranked_trees[tree_index(n)],
                           out.ranked_trees[tree_index(n + 1)], models[mi], s);
        else
          current = extend_sites(current, out.unrooted_trees[tree_index(n)],
                                 out.unrooted_trees[tree_index(n + 1)],
                                 models[mi], s);
        if (std::binary_search(spec.leaf_counts.begin(), spec.leaf_counts.end(),
                               n + 1))
          out.data.emplace(std::make_tuple(n + 1, mi, rep), current);
      }
    }
  }
  return out;
}

std::vector<ResultRow> run_grid(const GridSpec& spec) {
  spec.validate();
  PreparedGridData prepared = prepare_grid_data(spec);
  const auto& data = prepared.data;
  const auto& true_keys = prepared.true_keys;
  std::vector<MutationModel> models;
  for (double mu : spec.mutation_rates)
    models.push_back(MutationModel::binary_symmetric(mu));

  // Cells are independent jobs; rows land in a fixed slot so the output does
  // not depend on scheduling.
  std::vector<Cell> cells;
  for (int ni = 0; ni < static_cast<int>(spec.leaf_counts.size()); ++ni)
    for (int mi = 0; mi < static_cast<int>(spec.mutation_rates.size()); ++mi)
      for (int ki = 0; ki < static_cast<int>(spec.site_counts.size()); ++ki)
        for (int rep = 0; rep < spec.replicates; ++rep)
          cells.push_back({ni, mi, ki, rep});

  std::vector<ResultRow> rows(cells.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& c = cells[i];
      const int n = spec.leaf_counts[c.n_index];
      const double mu = spec.mutation_rates[c.mu_index];
      const long k = spec.site_counts[c.k_index];
      const auto& full = data.at(std::make_tuple(n, c.mu_index, c.replicate));
      const SiteMatrix prefix = full.prefix(static_cast<int>(k));
      const uint64_t seed = cell_seed(spec, "chain", n, c.mu_index, k, c.replicate);
      try {
        rows[i] = run_cell(spec, prefix, models[c.mu_index], true_keys.at(n), n,
                           mu, k, c.replicate, seed);
      } catch (const std::exception&) {
        try {
          rows[i] = run_cell(spec, prefix, models[c.mu_index], true_keys.at(n),
                             n, mu, k, c.replicate, seed + 1);
        } catch (const std::exception&) {
          ResultRow row;
          row.prior = to_string(spec.kind);
          row.n = n;
          row.mu = mu;
          row.k = k;
          row.replicate = c.replicate;
          row.posterior_support = std::nan("");
          row.acceptance_rate = std::nan("");
          row.ess = std::nan("");
          row.seed = seed + 1;
          row.failed = true;
          rows[i] = row;
        }
      }
    }
  };
  std::vector<std::thread> pool;
  const int threads = std::min<int>(spec.workers, static_cast<int>(cells.size()));
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out =
      "prior,n,mu,k,replicate,posterior_support,acceptance_rate,ess,seed,"
      "wall_time_s\n";
  for (const auto& r : rows) {
    out += r.prior + "," + std::to_string(r.n) + "," + format_double(r.mu) +
           "," + std::to_string(r.k) + "," + std::to_string(r.replicate) + "," +
           format_double(r.posterior_support) + "," +
           format_double(r.acceptance_rate) + "," + format_double(r.ess) + "," +
           std::to_string(r.seed) + "," + format_double(r.wall_time_s) + "\n";
  }
  return out;
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("results csv: empty");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 10) throw std::runtime_error("results csv: bad row");
    ResultRow r;
    r.prior = fields[0];
    r.n = std::stoi(fields[1]);
    r.mu = std::stod(fields[2]);
    r.k = std::stol(fields[3]);
    r.replicate = std::stoi(fields[4]);
    r.posterior_support = std::stod(fields[5]);
    r.acceptance_rate = std::stod(fields[6]);
    r.ess = std::stod(fields[7]);
    r.seed = std::stoull(fields[8]);
    r.wall_time_s = std::stod(fields[9]);
    r.failed = std::isnan(r.posterior_support);
    rows.push_back(r);
  }
  return rows;
}

std::vector<CurvePoint> aggregate(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("aggregate: empty table");
  std::map<std::tuple<std::string, int, double, long>, std::vector<double>> groups;
  for (const auto& r : rows) {
    if (r.failed) continue;
    groups[{r.prior, r.n, r.mu, r.k}].push_back(r.posterior_support);
  }
  std::vector<CurvePoint> out;
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());
    CurvePoint p;
    p.prior = std::get<0>(key);
    p.n = std::get<1>(key);
    p.mu = std::get<2>(key);
    p.k = std::get<3>(key);
    p.replicates = static_cast<int>(values.size());
    double s = 0.0;
    for (double v : values) s += v;
    p.mean_support = s / values.size();
    auto quantile = [&](double q) {
      const double pos = q * (values.size() - 1);
      const size_t lo = static_cast<size_t>(pos);
      const size_t hi = std::min(lo + 1, values.size() - 1);
      return values[lo] + (pos - lo) * (values[hi] - values[lo]);
    };
    p.min_support = values.front();
    p.q25_support = quantile(0.25);
    p.median_support = quantile(0.5);
    p.q75_support = quantile(0.75);
    p.max_support = values.back();
    out.push_back(p);
  }
  return out;
}

std::string curves_csv(const std::vector<CurvePoint>& curves) {
  std::string out =
      "prior,n,mu,k,replicates,mean_support,min_support,q25_support,"
      "median_support,q75_support,max_support\n";
  for (const auto& p : curves) {
    out += p.prior + "," + std::to_string(p.n) + "," + format_double(p.mu) +
           "," + std::to_string(p.k) + "," + std::to_string(p.replicates) +
           "," + format_double(p.mean_support) + "," +
           format_double(p.min_support) + "," + format_double(p.q25_support) +
           "," + format_double(p.median_support) + "," +
           format_double(p.q75_support) + "," + format_double(p.max_support) +
           "\n";
  }
  return out;
}

std::vector<Crossing> threshold_crossings(const std::vector<CurvePoint>& curves,
                                          double level) {
  std::map<std::tuple<std::string, int, double>,
           std::vector<std::pair<long, double>>>
      series;
  for (const auto& p : curves)
    series[{p.prior, p.n, p.mu}].emplace_back(p.k, p.mean_support);
  std::vector<Crossing> out;
  for (auto& [key, pts] : series) {
    std::sort(pts.begin(), pts.end());
    Crossing c;
    c.prior = std::get<0>(key);
    c.n = std::get<1>(key);
    c.mu = std::get<2>(key);
    for (size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].second > level) {
        c.crossed = true;
        c.k_below = i == 0 ? 0 : pts[i - 1].first;
        c.k_above = pts[i].first;
        break;
      }
    }
    out.push_back(c);
  }
  return out;
}

std::string crossings_csv(const std::vector<Crossing>& crossings) {
  std::string out = "prior,n,mu,crossed,k_below,k_above\n";
  for (const auto& c : crossings) {
    out += c.prior + "," + std::to_string(c.n) + "," + format_double(c.mu) +
           "," + (c.crossed ? "1" : "0") + "," + std::to_string(c.k_below) +
           "," + std::to_string(c.k_above) + "\n";
  }
  return out;
}

}  // namespace phylo
