// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Every tolerance is pinned here, in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "phylo/contraction.hpp"
#include "phylo/divergences.hpp"
#include "phylo/experiments.hpp"
#include "phylo/likelihood.hpp"
#include "phylo/mcmc.hpp"
#include "phylo/priors.hpp"
#include "phylo/rand.hpp"
#include "phylo/sites.hpp"
#include "phylo/stats.hpp"
#include "phylo/trees.hpp"
#include "phylo/util.hpp"

using namespace phylo;

namespace {

int failures = 0;
std::vector<std::string> notes;

struct Criterion {
  const char* name;
  std::chrono::steady_clock::time_point start;
  bool ok = true;

  explicit Criterion(const char* n)
      : name(n), start(std::chrono::steady_clock::now()) {
    notes.clear();
  }
  void expect(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      notes.push_back(what);
    }
  }
  ~Criterion() {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] %s (%.1fs)\n", ok ? "PASS" : "FAIL", name, secs);
    for (const auto& n : notes) std::printf("       - %s\n", n.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

std::vector<uint8_t> pattern_of_index(size_t idx, int n, int h) {
  std::vector<uint8_t> p(n);
  for (int r = n - 1; r >= 0; --r) {
    p[r] = static_cast<uint8_t>(idx % h);
    idx /= h;
  }
  return p;
}

// Exhaustive ranked-topology enumeration (used for exact prior baselines).
void enumerate_ranked(int n, RankedTree& t, std::vector<int> alive,
                      std::map<std::string, int>& shape_counts) {
  if (alive.size() == 1) {
    ++shape_counts[canonical_topology(t, TopologyMode::rooted_unranked)];
    return;
  }
  for (size_t i = 0; i < alive.size(); ++i)
    for (size_t j = i + 1; j < alive.size(); ++j) {
      auto next = alive;
      const int a = next[i], b = next[j];
      next.erase(next.begin() + j);
      next.erase(next.begin() + i);
      next.push_back(n + static_cast<int>(t.mergers.size()));
      t.mergers.emplace_back(std::min(a, b), std::max(a, b));
      enumerate_ranked(n, t, next, shape_counts);
      t.mergers.pop_back();
    }
}

// Exact prior probability of a rooted-unranked key under the coalescent.
double shape_prior_mass(const RankedTree& tree) {
  RankedTree scratch;
  scratch.n = tree.n;
  scratch.leaf_labels = tree.leaf_labels;
  scratch.holding_times.resize(tree.n - 1);
  for (int i = 0; i < tree.n - 1; ++i) scratch.holding_times[i] = 1.0 + i;
  std::vector<int> alive;
  for (int i = 0; i < tree.n; ++i) alive.push_back(i);
  std::map<std::string, int> counts;
  enumerate_ranked(tree.n, scratch, alive, counts);
  const auto key = canonical_topology(tree, TopologyMode::rooted_unranked);
  return counts.at(key) / ranked_topology_count(tree.n);
}

// -------------------------------------------------------------- criterion 1

void criterion_pruning() {
  Criterion c("1 pruning-correctness");
  Rng rng(811);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2 + rng.uniform_int(5);  // up to 6 leaves
    const auto m = rep % 2 == 0
                       ? MutationModel::binary_symmetric(0.05 + rng.uniform())
                       : MutationModel::jukes_cantor(0.02 + 0.3 * rng.uniform());
    const auto t = sample(KingmanPrior{n}, rng);
    const auto view = RootedView::from_ranked(t);
    std::vector<uint8_t> pattern(n);
    for (auto& a : pattern) a = static_cast<uint8_t>(rng.uniform_int(m.size()));
    const double fast = site_likelihood(view, m, pattern);
    const double slow = site_likelihood_brute_force(view, m, pattern);
    worst = std::max(worst, std::abs(fast - slow) / std::max(fast, slow));
  }
  c.expect(worst <= 1e-12,
           "pruning vs enumeration relative error " + format_double(worst));

  double worst_norm = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 2 + rng.uniform_int(4);  // up to 5 leaves
    const auto m = rep % 2 == 0 ? MutationModel::binary_symmetric(0.3)
                                : MutationModel::jukes_cantor(0.1);
    const auto t = sample(KingmanPrior{n}, rng);
    const auto view = RootedView::from_ranked(t);
    double total = 0.0;
    const size_t cells = static_cast<size_t>(std::pow(m.size(), n));
    for (size_t idx = 0; idx < cells; ++idx)
      total += site_likelihood(view, m, pattern_of_index(idx, n, m.size()));
    worst_norm = std::max(worst_norm, std::abs(total - 1.0));
  }
  c.expect(worst_norm < 1e-10,
           "pattern table normalization error " + format_double(worst_norm));
}

// -------------------------------------------------------------- criterion 2

void criterion_root_invariance() {
  Criterion c("2 root-invariance");
  Rng rng(821);
  double worst = 0.0;
  for (int n : {4, 5, 6}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto t = sample(UniformPrior{n, 1.0}, rng);
      const auto m = rep % 2 == 0 ? MutationModel::binary_symmetric(0.3)
                                  : MutationModel::jukes_cantor(0.15);
      std::vector<uint8_t> pattern(n);
      for (auto& a : pattern)
        a = static_cast<uint8_t>(rng.uniform_int(m.size()));
      worst = std::max(worst, root_invariance_max_deviation(t, m, pattern));
    }
  }
  c.expect(worst < 1e-12, "max deviation across rootings " + format_double(worst));
}

// -------------------------------------------------------------- criterion 3

void criterion_divergence_bounds() {
  Criterion c("3 kl-variation-bound-suite");
  Rng rng(831);
  const auto m = MutationModel::binary_symmetric(0.1);
  const double cap = 1.0 / (2.0 * m.eta());
  long kl_violations = 0, v0_violations = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int variant = rep % 3;
    if (variant < 2) {
      const int n = variant == 0 ? 3 : 4;
      const auto t0 = sample(KingmanPrior{n}, rng);
      const double f =
          std::min(t0.holding_times[n - 2], cap) * rng.uniform(0.05, 0.9);
      RankedTree t;
      do {
        t = t0;
        for (double& x : t.holding_times) x *= std::exp(rng.uniform(-0.4, 0.4));
      } while (t.holding_times[n - 2] <= f);
      const auto bound =
          divergence_bound(m, psi_derivative_sup(PriorKind::kingman, n), n, f);
      const auto p0 = leaf_distribution(t0, m);
      const auto p = leaf_distribution(t, m);
      double d2 = 0.0;
      for (int i = 0; i < n - 1; ++i) {
        const double d = t.holding_times[i] - t0.holding_times[i];
        d2 += d * d;
      }
      if (kl_divergence(p0, p) > bound.kl_coefficient * std::sqrt(d2))
        ++kl_violations;
      if (kl_variation(p0, p) > bound.v0_coefficient * d2) ++v0_violations;
    } else {
      const int n = 4;
      const auto t0 = sample(UniformPrior{n, 1.0}, rng);
      const auto bm0 = branch_map(t0);
      const double f =
          std::min(min_external_length(bm0), cap) * rng.uniform(0.05, 0.9);
      UnrootedTree t;
      do {
        t = t0;
        for (auto& e : t.edges) e.length *= std::exp(rng.uniform(-0.4, 0.4));
      } while (min_external_length(branch_map(t)) <= f);
      const auto bound =
          divergence_bound(m, psi_derivative_sup(PriorKind::uniform, n), n, f);
      const auto p0 = leaf_distribution(t0, m);
      const auto p = leaf_distribution(t, m);
      double d2 = 0.0;
      for (int i = 0; i < 2 * n - 3; ++i) {
        const double d = t.edges[i].length - t0.edges[i].length;
        d2 += d * d;
      }
      if (kl_divergence(p0, p) > bound.kl_coefficient * std::sqrt(d2))
        ++kl_violations;
      if (kl_variation(p0, p) > bound.v0_coefficient * d2) ++v0_violations;
    }
  }
  c.expect(kl_violations == 0,
           "KL bound violations: " + std::to_string(kl_violations));
  c.expect(v0_violations == 0,
           "second-variation bound violations: " + std::to_string(v0_violations));
}

// -------------------------------------------------------------- criterion 4

void criterion_tail_bounds() {
  Criterion c("4 exponential-tail-bound-dominance");
  long violations = 0;
  for (int i = 1; i <= 20; ++i)
    for (int j = 1; j <= 20; ++j) {
      const double rate = 0.25 * i;
      const double f = 0.05 * j;
      if (exp_lower_tail_bound(rate, f) < exp_lower_tail_exact(rate, f))
        ++violations;
    }
  c.expect(violations == 0,
           "lower-tail violations: " + std::to_string(violations));

  violations = 0;
  Rng rng(841);
  for (int caseno = 0; caseno < 20; ++caseno) {
    std::vector<double> rates;
    for (int i = 0; i < 2 + rng.uniform_int(6); ++i)
      rates.push_back(0.2 + 3.0 * rng.uniform());
    const double g = 0.5 + 6.0 * rng.uniform();
    if (exp_max_tail_bound(rates, g) <
        exp_max_tail_exact(rates, g) * (1.0 - 1e-12))
      ++violations;
  }
  c.expect(violations == 0, "max-tail violations: " + std::to_string(violations));
}

// -------------------------------------------------------------- criterion 5

void criterion_prior_fidelity() {
  Criterion c("5 prior-fidelity");
  const int samples = 100000;
  {
    Rng rng(851);
    for (int n : {3, 4}) {
      std::map<std::string, long> counts;
      for (int i = 0; i < samples; ++i)
        ++counts[canonical_topology(sample(KingmanPrior{n}, rng),
                                    TopologyMode::ranked)];
      const size_t want = n == 3 ? 3 : 18;
      c.expect(counts.size() == want, "ranked topology cell count");
      std::vector<long> cts;
      for (const auto& [k, v] : counts) cts.push_back(v);
      const double p = chi_square_uniform_pvalue(cts);
      c.expect(p > 0.001, "ranked chi-square p=" + format_double(p));
    }
  }
  {
    Rng rng(853);
    for (int n : {4, 5}) {
      std::map<std::string, long> counts;
      for (int i = 0; i < samples; ++i)
        ++counts[canonical_topology(sample(UniformPrior{n, 1.0}, rng),
                                    TopologyMode::unrooted)];
      const size_t want = n == 4 ? 3 : 15;
      c.expect(counts.size() == want, "unrooted topology cell count");
      std::vector<long> cts;
      for (const auto& [k, v] : counts) cts.push_back(v);
      const double p = chi_square_uniform_pvalue(cts);
      c.expect(p > 0.001, "unrooted chi-square p=" + format_double(p));
    }
  }
  {
    Rng rng(857);
    for (int idx : {0, 2, 3}) {
      std::vector<double> xs;
      for (int i = 0; i < samples; ++i)
        xs.push_back(sample(KingmanPrior{5}, rng).holding_times[idx]);
      const double rate = holding_rate(idx);
      const double d =
          ks_statistic(xs, [&](double v) { return 1.0 - std::exp(-rate * v); });
      const double p = ks_pvalue(d, xs.size());
      c.expect(p > 0.001, "holding-time KS p=" + format_double(p));
    }
    std::vector<double> lens;
    const double lambda = 1.0;
    for (int i = 0; i < samples / 7; ++i) {
      const auto t = sample(UniformPrior{5, lambda}, rng);
      for (const auto& e : t.edges) lens.push_back(e.length);
    }
    const double d = ks_statistic(
        lens, [&](double v) { return 1.0 - std::exp(-lambda * v); });
    const double p = ks_pvalue(d, lens.size());
    c.expect(p > 0.001, "branch-length KS p=" + format_double(p));
  }
  {
    Rng rng(859);
    std::vector<double> totals;
    for (int i = 0; i < 10000; ++i)
      totals.push_back(sample(KingmanPrior{400}, rng).total_height());
    const double m = mean(totals);
    const double se = std::sqrt(sample_variance(totals) / totals.size());
    c.expect(std::abs(m - 2.0) < 3.0 * se + 2.0 / 400.0,
             "total length mean " + format_double(m));
  }
}

// -------------------------------------------------------------- criterion 6

void criterion_nesting_coupling() {
  Criterion c("6 nesting-and-coupling");
  {
    Rng rng(861);
    long failures_local = 0;
    for (int rep = 0; rep < 10000; ++rep) {
      const int n = 2 + rng.uniform_int(7);
      const auto t = sample(KingmanPrior{n}, rng);
      const auto ext = extend_kingman(t, rng);
      if (!(restrict_kingman(ext, n) == t)) ++failures_local;
    }
    c.expect(failures_local == 0,
             "coalescent nesting failures: " + std::to_string(failures_local));
  }
  {
    Rng rng(863);
    long failures_local = 0;
    for (int rep = 0; rep < 10000; ++rep) {
      const int n = 4 + rng.uniform_int(5);
      const auto t = sample(UniformPrior{n, 1.0}, rng);
      const auto ext = extend_uniform(t, 1.0, rng);
      if (!(restrict_uniform(ext, ext.leaf_labels.back()) == t))
        ++failures_local;
    }
    c.expect(failures_local == 0,
             "uniform nesting failures: " + std::to_string(failures_local));
  }
  {
    Rng rng(867);
    const auto m = MutationModel::binary_symmetric(0.3);
    long mismatches = 0;
    for (int rep = 0; rep < 500; ++rep) {
      const int n = 2 + rng.uniform_int(5);
      const auto t = sample(KingmanPrior{n}, rng);
      const auto base = simulate_sites(t, m, 8, 9000 + rep);
      const auto ext_tree = extend_kingman(t, rng);
      const auto ext = extend_sites(base, t, ext_tree, m, 9500 + rep);
      if (project_rows(ext, t.leaf_labels).alleles != base.alleles)
        ++mismatches;
    }
    for (int rep = 0; rep < 500; ++rep) {
      const int n = 4 + rng.uniform_int(4);
      const auto t = sample(UniformPrior{n, 1.0}, rng);
      const auto base = simulate_sites(t, m, 8, 11000 + rep);
      const auto ext_tree = extend_uniform(t, 1.0, rng);
      const auto ext = extend_sites(base, t, ext_tree, m, 11500 + rep);
      if (project_rows(ext, t.leaf_labels).alleles != base.alleles)
        ++mismatches;
    }
    c.expect(mismatches == 0,
             "shared-leaf allele mismatches: " + std::to_string(mismatches));
  }
}

// -------------------------------------------------------------- criterion 7

void criterion_mcmc_prior_chains() {
  Criterion c("7 mcmc-prior-validation");
  {
    ChainConfig cfg;
    cfg.kind = PriorKind::kingman;
    cfg.n = 4;
    cfg.settings.iterations = 200000;
    cfg.settings.burn_in = 50000;
    cfg.settings.thinning = 150;
    cfg.seed = 871;
    cfg.prior_only = true;
    cfg.report_mode = TopologyMode::ranked;
    const auto trace = run_chain(cfg);
    const auto trace2 = run_chain(cfg);
    c.expect(trace_csv(trace) == trace_csv(trace2) &&
                 trace_newick(trace) == trace_newick(trace2),
             "coalescent trace not reproducible");

    std::map<std::string, long> counts;
    std::vector<double> x1;
    for (const auto& s : trace.samples) {
      ++counts[s.topology_key];
      x1.push_back(std::get<RankedTree>(s.tree).holding_times[1]);
    }
    c.expect(counts.size() == 18, "coalescent chain topology cells");
    std::vector<long> cts;
    for (const auto& [k, v] : counts) cts.push_back(v);
    const double p = chi_square_uniform_pvalue(cts);
    c.expect(p > 0.001, "coalescent chain chi-square p=" + format_double(p));
    const double rate = holding_rate(1);
    const double d =
        ks_statistic(x1, [&](double v) { return 1.0 - std::exp(-rate * v); });
    const double pk = ks_pvalue(d, x1.size());
    c.expect(pk > 0.001, "coalescent chain KS p=" + format_double(pk));
  }
  {
    ChainConfig cfg;
    cfg.kind = PriorKind::uniform;
    cfg.n = 4;
    cfg.settings.iterations = 200000;
    cfg.settings.burn_in = 50000;
    cfg.settings.thinning = 150;
    cfg.seed = 877;
    cfg.prior_only = true;
    cfg.report_mode = TopologyMode::unrooted;
    const auto trace = run_chain(cfg);
    const auto trace2 = run_chain(cfg);
    c.expect(trace_csv(trace) == trace_csv(trace2),
             "uniform trace not reproducible");
    std::map<std::string, long> counts;
    std::vector<double> lens;
    for (const auto& s : trace.samples) {
      ++counts[s.topology_key];
      lens.push_back(std::get<UnrootedTree>(s.tree).edges[2].length);
    }
    c.expect(counts.size() == 3, "uniform chain topology cells");
    std::vector<long> cts;
    for (const auto& [k, v] : counts) cts.push_back(v);
    const double p = chi_square_uniform_pvalue(cts);
    c.expect(p > 0.001, "uniform chain chi-square p=" + format_double(p));
    const double d =
        ks_statistic(lens, [&](double v) { return 1.0 - std::exp(-v); });
    const double pk = ks_pvalue(d, lens.size());
    c.expect(pk > 0.001, "uniform chain KS p=" + format_double(pk));
  }
}

// -------------------------------------------------------------- criterion 8

void criterion_desk_grid() {
  Criterion c("8 desk-scale-support-curves");
  for (const PriorKind kind : {PriorKind::kingman, PriorKind::uniform}) {
    GridSpec spec;
    spec.kind = kind;
    spec.leaf_counts = {4, 6};
    spec.mutation_rates = {0.05, 0.2};
    spec.site_counts = {1, 10, 100, 1000, 10000};
    spec.replicates = 20;
    spec.master_seed = 20260874;
    spec.chain.iterations = 200000;
    spec.chain.burn_in = 100000;
    spec.chain.thinning = 100;
    spec.report_mode = kind == PriorKind::kingman ? TopologyMode::rooted_unranked
                                                  : TopologyMode::unrooted;
    spec.workers = 1;

    const auto prepared = prepare_grid_data(spec);
    const auto rows = run_grid(spec);
    c.expect(rows.size() == 400, to_string(kind) + ": row count");
    long failed = 0;
    for (const auto& r : rows) failed += r.failed ? 1 : 0;
    c.expect(failed == 0, to_string(kind) + ": failed cells");

    const auto curves = aggregate(rows);
    // prior baselines for the true topologies
    std::map<int, double> baseline;
    for (int n : spec.leaf_counts) {
      if (kind == PriorKind::kingman)
        baseline[n] = shape_prior_mass(prepared.ranked_trees[n - 4]);
      else
        baseline[n] = 1.0 / unrooted_topology_count(n);
    }
    for (const auto& p : curves) {
      if (p.k == 1) {
        c.expect(std::abs(p.mean_support - baseline[p.n]) <= 0.1,
                 to_string(kind) + " n=" + std::to_string(p.n) +
                     " mu=" + format_double(p.mu) + ": support at k=1 is " +
                     format_double(p.mean_support) + " vs baseline " +
                     format_double(baseline[p.n]));
      }
      if (p.k == 10000 && p.n == 4) {
        c.expect(p.mean_support > 0.9,
                 to_string(kind) + " n=4 mu=" + format_double(p.mu) +
                     ": support at k=1e4 is " + format_double(p.mean_support));
      }
    }
    for (const auto& cross : threshold_crossings(curves, 0.5)) {
      c.expect(cross.crossed, to_string(kind) + " n=" + std::to_string(cross.n) +
                                  " mu=" + format_double(cross.mu) +
                                  ": curve never exceeds 0.5");
    }
  }
}

// -------------------------------------------------------------- criterion 9

void criterion_condition_evaluators() {
  Criterion c("9 contraction-condition-evaluators");
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
    c.expect(finite, "entropy evaluation not finite");
    c.expect(monotone, "entropy margin not monotone in k");
    cfg.k = 1e16;
    cfg.C = 4.0 / std::sqrt(std::log(cfg.k));
    c.expect(entropy_condition(cfg, topo_log, cfg.n - 1).satisfied,
             "entropy condition unsatisfied at k=1e16");
  }
  {
    bool ok = true;
    for (int i = 0; i < 10; ++i) {
      const double f = 0.002 + 0.002 * i;
      const double g = 3.0 + 0.7 * i;
      const auto chk = remaining_mass(KingmanPrior{5}, f, g, 50000, 901 + i);
      ok = ok && chk.within_bound;
    }
    c.expect(ok, "coalescent remaining-mass estimate exceeded its bound");
    ok = true;
    for (int i = 0; i < 10; ++i) {
      const double f = 0.002 + 0.002 * i;
      const double g = 5.0 + 1.5 * i;
      const auto chk =
          remaining_mass(UniformPrior{5, 1.0}, f, g, 50000, 931 + i);
      ok = ok && chk.within_bound;
    }
    c.expect(ok, "uniform remaining-mass estimate exceeded its bound");
  }
  {
    RankedTree t0;
    t0.n = 3;
    t0.leaf_labels = {"1", "2", "3"};
    t0.mergers = {{0, 1}, {2, 3}};
    t0.holding_times = {1.0, 0.5};
    const double radius = 0.1, f_floor = 0.05;
    const auto chk =
        prior_mass_near_truth(KingmanPrior{3}, t0, radius, f_floor, 6000000, 941);

    const double r1 = holding_rate(0), r2 = holding_rate(1);
    const int grid = 4000;
    double integral = 0.0;
    const double x_lo = t0.holding_times[0] - radius;
    const double hx = 2.0 * radius / grid;
    for (int i = 0; i <= grid; ++i) {
      const double x = x_lo + i * hx;
      const double dx = x - t0.holding_times[0];
      const double half = std::sqrt(std::max(0.0, radius * radius - dx * dx));
      const double y_lo = std::max(f_floor, t0.holding_times[1] - half);
      const double y_hi = t0.holding_times[1] + half;
      if (y_hi <= y_lo || x <= 0.0) continue;
      const double inner = std::exp(-r2 * y_lo) - std::exp(-r2 * y_hi);
      const double weight = (i == 0 || i == grid) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      integral += weight * r1 * std::exp(-r1 * x) * inner;
    }
    integral *= hx / 3.0;
    const double rel = std::abs(chk.ball_estimate - integral) / integral;
    c.expect(rel < 0.02, "prior-mass estimate off quadrature by " +
                             format_double(100.0 * rel) + "%");
    c.expect(chk.box_valid && chk.ball_estimate >= chk.box_lower_bound,
             "prior-mass estimate below the box lower bound");
  }
}

// ------------------------------------------------------------- criterion 10

void criterion_divergence_identities() {
  Criterion c("10 divergence-identities");
  Rng rng(1001);
  const auto m = MutationModel::binary_symmetric(0.2);
  const auto t = sample(KingmanPrior{4}, rng);
  const auto d = leaf_distribution(t, m);
  c.expect(kl_divergence(d, d) == 0.0 && kl_variation(d, d) == 0.0 &&
               hellinger(d, d) == 0.0,
           "divergences at the same distribution are not exactly zero");

  long violations = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const int n = 2 + rng.uniform_int(3);
    const auto a = leaf_distribution(sample(KingmanPrior{n}, rng), m);
    const auto b = leaf_distribution(sample(KingmanPrior{n}, rng), m);
    if (hellinger_sq(a, b) > kl_divergence(a, b) + 1e-15) ++violations;
  }
  c.expect(violations == 0,
           "squared root-density distance exceeded KL " +
               std::to_string(violations) + " times");
}

}  // namespace

int main() {
  criterion_pruning();
  criterion_root_invariance();
  criterion_divergence_bounds();
  criterion_tail_bounds();
  criterion_prior_fidelity();
  criterion_nesting_coupling();
  criterion_mcmc_prior_chains();
  criterion_condition_evaluators();
  criterion_divergence_identities();
  criterion_desk_grid();
  if (failures > 0) {
    std::printf("%d criteria FAILED\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
