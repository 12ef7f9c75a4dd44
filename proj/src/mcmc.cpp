#include "phylo/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "phylo/newick.hpp"
#include "phylo/util.hpp"

namespace phylo {

// ------------------------------------------------------ proposal primitives

double scale_coordinate(RankedTree& tree, int index, double u) {
  tree.holding_times.at(index) *= std::exp(u);
  return u;
}

double scale_coordinate(UnrootedTree& tree, int index, double u) {
  tree.edges.at(index).length *= std::exp(u);
  return u;
}

double scale_all(RankedTree& tree, double u) {
  for (double& x : tree.holding_times) x *= std::exp(u);
  return static_cast<double>(tree.holding_times.size()) * u;
}

double scale_all(UnrootedTree& tree, double u) {
  for (auto& e : tree.edges) e.length *= std::exp(u);
  return static_cast<double>(tree.edges.size()) * u;
}

std::optional<double> swap_adjacent_mergers(RankedTree& tree, int e) {
  const int n = tree.n;
  if (e < 0 || e + 1 >= n - 1) return std::nullopt;
  const int product = n + e;
  auto& early = tree.mergers[e];
  auto& late = tree.mergers[e + 1];
  if (late.first == product || late.second == product) return std::nullopt;

  std::swap(early, late);
  // The products trade node ids; later events must follow.
  const int other = n + e + 1;
  for (int f = e + 2; f < n - 1; ++f) {
    auto fix = [&](int& id) {
      if (id == product)
        id = other;
      else if (id == other)
        id = product;
    };
    fix(tree.mergers[f].first);
    fix(tree.mergers[f].second);
    if (tree.mergers[f].first > tree.mergers[f].second)
      std::swap(tree.mergers[f].first, tree.mergers[f].second);
  }
  return 0.0;
}

int merger_pair_choices(const RankedTree& tree, int e) {
  const int alive = tree.n - e;
  return alive * (alive - 1) / 2;
}

std::optional<double> repick_merger(RankedTree& tree, int e, int pair_choice) {
  const int n = tree.n;
  if (e < 0 || e >= n - 1) return std::nullopt;

  std::vector<int> alive;
  for (int i = 0; i < n; ++i) alive.push_back(i);
  for (int f = 0; f < e; ++f) {
    auto kill = [&](int id) {
      alive.erase(std::find(alive.begin(), alive.end(), id));
    };
    kill(tree.mergers[f].first);
    kill(tree.mergers[f].second);
    alive.push_back(n + f);
  }
  std::sort(alive.begin(), alive.end());
  const int m = static_cast<int>(alive.size());
  if (pair_choice < 0 || pair_choice >= m * (m - 1) / 2) return std::nullopt;

  int i = 0;
  while (pair_choice >= m - 1 - i) {
    pair_choice -= m - 1 - i;
    ++i;
  }
  const int c = alive[i];
  const int d = alive[i + 1 + pair_choice];

  const int a = tree.mergers[e].first;
  const int b = tree.mergers[e].second;
  if ((c == a && d == b) || (c == b && d == a)) return 0.0;

  std::vector<int> freed, taken;
  for (int id : {a, b})
    if (id != c && id != d) freed.push_back(id);
  for (int id : {c, d})
    if (id != a && id != b) taken.push_back(id);
  std::sort(freed.begin(), freed.end());
  std::sort(taken.begin(), taken.end());

  tree.mergers[e] = {std::min(c, d), std::max(c, d)};
  // Lineages now consumed here hand their later slots to the freed ones.
  for (int f = e + 1; f < n - 1; ++f) {
    auto fix = [&](int& id) {
      for (size_t t = 0; t < taken.size(); ++t)
        if (id == taken[t]) id = freed[t];
    };
    fix(tree.mergers[f].first);
    fix(tree.mergers[f].second);
    if (tree.mergers[f].first > tree.mergers[f].second)
      std::swap(tree.mergers[f].first, tree.mergers[f].second);
  }
  return 0.0;
}

std::optional<double> nni(UnrootedTree& tree, int edge, int moved_a,
                          int moved_b) {
  if (edge < 0 || edge >= tree.edge_count()) return std::nullopt;
  const int u = tree.edges[edge].u;
  const int v = tree.edges[edge].v;
  if (u < tree.n || v < tree.n) return std::nullopt;  // internal edges only
  if (moved_a == edge || moved_b == edge || moved_a == moved_b)
    return std::nullopt;
  if (moved_a < 0 || moved_b < 0 || moved_a >= tree.edge_count() ||
      moved_b >= tree.edge_count())
    return std::nullopt;

  auto touches = [&](int ei, int node) {
    return tree.edges[ei].u == node || tree.edges[ei].v == node;
  };
  int at_u = -1, at_v = -1;
  if (touches(moved_a, u) && touches(moved_b, v)) {
    at_u = moved_a;
    at_v = moved_b;
  } else if (touches(moved_a, v) && touches(moved_b, u)) {
    at_u = moved_b;
    at_v = moved_a;
  } else {
    return std::nullopt;
  }
  auto repoint = [&](int ei, int from, int to) {
    if (tree.edges[ei].u == from)
      tree.edges[ei].u = to;
    else
      tree.edges[ei].v = to;
  };
  repoint(at_u, u, v);
  repoint(at_v, v, u);
  return 0.0;
}

double redraw_holding_time(RankedTree& tree, int index, Rng& rng) {
  const double rate = holding_rate(index);
  const double old_value = tree.holding_times.at(index);
  const double new_value = rng.exponential(rate);
  tree.holding_times[index] = new_value;
  return rate * (new_value - old_value);
}

// ------------------------------------------------------------------- chains

namespace {

struct RankedState {
  RankedTree tree;
};
struct UniformState {
  UnrootedTree tree;
};

template <typename Tree>
std::string key_of(const Tree& tree, TopologyMode mode) {
  return canonical_topology(tree, mode);
}

void validate_config(const ChainConfig& config) {
  const auto& s = config.settings;
  if (s.iterations <= 0 || s.burn_in < 0 || s.burn_in >= s.iterations)
    throw std::invalid_argument("ChainConfig: need 0 <= burn_in < iterations");
  if (s.thinning < 1) throw std::invalid_argument("ChainConfig: thinning >= 1");
  const double wsum = s.weights.branch_scale + s.weights.all_scale +
                      s.weights.topology + s.weights.node_age;
  if (s.weights.branch_scale < 0 || s.weights.all_scale < 0 ||
      s.weights.topology < 0 || s.weights.node_age < 0 || wsum <= 0)
    throw std::invalid_argument("ChainConfig: bad proposal weights");
  if (s.scale_step <= 0)
    throw std::invalid_argument("ChainConfig: scale_step must be positive");
  if (!config.prior_only && (config.model == nullptr || config.data == nullptr))
    throw std::invalid_argument("ChainConfig: model and data required");
  if (config.kind == PriorKind::uniform &&
      config.report_mode != TopologyMode::unrooted)
    throw std::invalid_argument(
        "ChainConfig: uniform chains report unrooted topologies");
  if (config.kind == PriorKind::uniform && config.n < 4)
    throw std::invalid_argument("ChainConfig: uniform prior needs n >= 4");
  if (config.kind == PriorKind::kingman && config.n < 2)
    throw std::invalid_argument("ChainConfig: coalescent prior needs n >= 2");
}

}  // namespace

ChainTrace run_chain(const ChainConfig& config) {
  validate_config(config);
  const auto& settings = config.settings;
  Rng rng = Rng::stream(config.seed, 0x6d636d63ULL);

  const bool kingman = config.kind == PriorKind::kingman;
  RankedTree rtree;
  UnrootedTree utree;
  if (kingman)
    rtree = sample(KingmanPrior{config.n}, rng);
  else
    utree = sample(UniformPrior{config.n, config.lambda}, rng);

  std::optional<LikelihoodEvaluator> evaluator;
  if (!config.prior_only) {
    std::vector<std::string> expect;
    for (int i = 1; i <= config.n; ++i) expect.push_back(std::to_string(i));
    if (config.data->leaf_labels != sorted_labels(expect))
      throw std::invalid_argument("run_chain: data rows must be labeled 1..n");
    evaluator.emplace(*config.model, *config.data);
  }

  auto log_prior = [&]() {
    return kingman ? log_density(KingmanPrior{config.n}, rtree)
                   : log_density(UniformPrior{config.n, config.lambda}, utree);
  };
  auto log_lik = [&]() {
    if (config.prior_only) return 0.0;
    return kingman ? (*evaluator)(rtree) : (*evaluator)(utree);
  };

  double lp = log_prior();
  double ll = log_lik();
  double step = settings.scale_step;

  ChainTrace trace;
  trace.iterations = settings.iterations;
  const long expected =
      (settings.iterations - settings.burn_in) / settings.thinning;
  trace.samples.reserve(expected);

  const int m = kingman ? config.n - 1 : 2 * config.n - 3;
  const double weights[kProposalKinds] = {
      settings.weights.branch_scale, settings.weights.all_scale,
      settings.weights.topology, kingman ? settings.weights.node_age : 0.0};

  long adapt_proposed = 0, adapt_accepted = 0;
  for (long t = 1; t <= settings.iterations; ++t) {
    const int kind = rng.categorical(std::span<const double>(weights, 4));
    ++trace.proposed[kind];

    bool structural_ok = true;
    double hastings = 0.0;
    RankedTree rproposal;
    UnrootedTree uproposal;
    if (kingman)
      rproposal = rtree;
    else
      uproposal = utree;

    switch (static_cast<ProposalKind>(kind)) {
      case ProposalKind::branch_scale: {
        const int i = rng.uniform_int(m);
        const double u = rng.uniform(-step, step);
        hastings = kingman ? scale_coordinate(rproposal, i, u)
                           : scale_coordinate(uproposal, i, u);
        break;
      }
      case ProposalKind::all_scale: {
        const double u = rng.uniform(-step, step);
        hastings = kingman ? scale_all(rproposal, u) : scale_all(uproposal, u);
        break;
      }
      case ProposalKind::topology: {
        if (kingman) {
          if (config.n == 2) {
            structural_ok = false;
            break;
          }
          if (config.n > 3 && rng.uniform_int(2) == 0) {
            const int e = rng.uniform_int(config.n - 2);
            const auto hr = swap_adjacent_mergers(rproposal, e);
            structural_ok = hr.has_value();
            hastings = hr.value_or(0.0);
          } else {
            const int e = rng.uniform_int(config.n - 1);
            const int choice =
                rng.uniform_int(merger_pair_choices(rproposal, e));
            const auto hr = repick_merger(rproposal, e, choice);
            structural_ok = hr.has_value();
            hastings = hr.value_or(0.0);
          }
        } else {
          std::vector<int> internal_edges;
          for (int ei = 0; ei < uproposal.edge_count(); ++ei)
            if (uproposal.edges[ei].u >= config.n &&
                uproposal.edges[ei].v >= config.n)
              internal_edges.push_back(ei);
          if (internal_edges.empty()) {
            structural_ok = false;
            break;
          }
          const int edge = internal_edges[rng.uniform_int(
              static_cast<int>(internal_edges.size()))];
          const int u_node = uproposal.edges[edge].u;
          const int v_node = uproposal.edges[edge].v;
          const auto inc = uproposal.incident_edges();
          std::vector<int> at_u, at_v;
          for (int ei : inc[u_node])
            if (ei != edge) at_u.push_back(ei);
          for (int ei : inc[v_node])
            if (ei != edge) at_v.push_back(ei);
          const int a = at_u[rng.uniform_int(2)];
          const int b = at_v[rng.uniform_int(2)];
          const auto hr = nni(uproposal, edge, a, b);
          structural_ok = hr.has_value();
          hastings = hr.value_or(0.0);
        }
        break;
      }
      case ProposalKind::node_age: {
        const int i = rng.uniform_int(m);
        hastings = redraw_holding_time(rproposal, i, rng);
        break;
      }
    }

    bool accept = false;
    if (structural_ok) {
      double new_lp, new_ll;
      if (kingman) {
        std::swap(rtree, rproposal);
        new_lp = log_prior();
        new_ll = log_lik();
        std::swap(rtree, rproposal);
      } else {
        std::swap(utree, uproposal);
        new_lp = log_prior();
        new_ll = log_lik();
        std::swap(utree, uproposal);
      }
      const double log_alpha = (new_lp + new_ll) - (lp + ll) + hastings;
      if (log_alpha >= 0.0 || std::log(rng.uniform() + 1e-300) < log_alpha)
        accept = true;
      if (accept) {
        if (kingman)
          rtree = std::move(rproposal);
        else
          utree = std::move(uproposal);
        lp = new_lp;
        ll = new_ll;
      }
    }
    if (accept) ++trace.accepted[kind];

    // Optional step-size tuning, frozen halfway through burn-in so retained
    // samples come from a fixed kernel.
    if (settings.adapt_scale && t <= settings.burn_in / 2 &&
        kind == static_cast<int>(ProposalKind::branch_scale)) {
      ++adapt_proposed;
      if (accept) ++adapt_accepted;
      if (adapt_proposed == 100) {
        const double rate = static_cast<double>(adapt_accepted) / 100.0;
        step *= std::exp(0.5 * (rate - 0.3));
        step = std::clamp(step, 1e-3, 10.0);
        adapt_proposed = adapt_accepted = 0;
      }
    }

    if (t > settings.burn_in && (t - settings.burn_in) % settings.thinning == 0) {
      ChainSample s;
      s.iteration = t;
      s.log_likelihood = ll;
      s.log_prior = lp;
      if (kingman) {
        s.topology_key = key_of(rtree, config.report_mode);
        s.tree = rtree;
      } else {
        s.topology_key = key_of(utree, config.report_mode);
        s.tree = utree;
      }
      trace.samples.push_back(std::move(s));
    }
  }
  trace.final_scale_step = step;
  return trace;
}

double posterior_support(const ChainTrace& trace, const std::string& true_key) {
  if (trace.samples.empty())
    throw std::invalid_argument("posterior_support: empty trace");
  long hits = 0;
  for (const auto& s : trace.samples)
    if (s.topology_key == true_key) ++hits;
  return static_cast<double>(hits) / static_cast<double>(trace.samples.size());
}

double posterior_support(const ChainTrace& trace, const RankedTree& true_tree,
                         TopologyMode mode) {
  long hits = 0;
  const std::string want = canonical_topology(true_tree, mode);
  for (const auto& s : trace.samples) {
    const auto* t = std::get_if<RankedTree>(&s.tree);
    if (t == nullptr)
      throw std::invalid_argument("posterior_support: trace holds unrooted trees");
    if (canonical_topology(*t, mode) == want) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trace.samples.size());
}

double posterior_support(const ChainTrace& trace, const UnrootedTree& true_tree,
                         TopologyMode mode) {
  long hits = 0;
  const std::string want = canonical_topology(true_tree, mode);
  for (const auto& s : trace.samples) {
    const auto* t = std::get_if<UnrootedTree>(&s.tree);
    if (t == nullptr)
      throw std::invalid_argument("posterior_support: trace holds ranked trees");
    if (canonical_topology(*t, mode) == want) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trace.samples.size());
}

ChainDiagnostics diagnostics(const ChainTrace& trace) {
  if (trace.samples.empty())
    throw std::invalid_argument("diagnostics: empty trace");
  ChainDiagnostics d;
  long proposed = 0, accepted = 0;
  for (int k = 0; k < kProposalKinds; ++k) {
    proposed += trace.proposed[k];
    accepted += trace.accepted[k];
    d.acceptance_rate[k] =
        trace.proposed[k] > 0
            ? static_cast<double>(trace.accepted[k]) / trace.proposed[k]
            : 0.0;
  }
  d.overall_acceptance =
      proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;

  for (const auto& s : trace.samples)
    d.log_likelihood_series.push_back(s.log_likelihood);
  const auto& x = d.log_likelihood_series;
  const size_t n = x.size();
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(n);
  std::vector<double> gamma(n, 0.0);
  for (size_t lag = 0; lag < n; ++lag) {
    double g = 0.0;
    for (size_t i = 0; i + lag < n; ++i) g += (x[i] - m) * (x[i + lag] - m);
    gamma[lag] = g / static_cast<double>(n);
  }
  if (gamma[0] <= 0.0) {
    d.ess = static_cast<double>(n);  // constant series
    return d;
  }
  // Initial positive sequence truncation on paired autocovariances.
  double tau = gamma[0];
  for (size_t lag = 1; lag + 1 < n; lag += 2) {
    const double pair = gamma[lag] + gamma[lag + 1];
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  d.ess = std::clamp(static_cast<double>(n) * gamma[0] / tau, 1.0,
                     static_cast<double>(n));
  return d;
}

std::string trace_csv(const ChainTrace& trace) {
  std::string out = "iteration,log_likelihood,log_prior,topology_key\n";
  for (const auto& s : trace.samples) {
    out += std::to_string(s.iteration) + "," + format_double(s.log_likelihood) +
           "," + format_double(s.log_prior) + "," + s.topology_key + "\n";
  }
  return out;
}

std::string trace_newick(const ChainTrace& trace) {
  std::string out;
  for (const auto& s : trace.samples) {
    if (const auto* t = std::get_if<RankedTree>(&s.tree))
      out += to_newick(*t) + "\n";
    else
      out += to_newick(std::get<UnrootedTree>(s.tree)) + "\n";
  }
  return out;
}

}  // namespace phylo
