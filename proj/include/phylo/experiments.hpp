#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "phylo/mcmc.hpp"

namespace phylo {

// Replicated inference grid over (leaf count, mutation rate, site count):
// one nested tree sequence per master seed, one raw max-k data set per
// (n, mu, replicate) coupled across leaf counts, prefix data sets per k, and
// one chain per cell.
struct GridSpec {
  PriorKind kind = PriorKind::kingman;
  std::vector<int> leaf_counts;       // ascending
  std::vector<double> mutation_rates;
  std::vector<long> site_counts;      // strictly increasing
  int replicates = 1;
  uint64_t master_seed = 1;
  double lambda = 1.0;
  ChainSettings chain;
  TopologyMode report_mode = TopologyMode::rooted_unranked;
  int workers = 1;

  void validate() const;
  std::string to_json() const;
  static GridSpec from_json(const std::string& text);
};

struct ResultRow {
  std::string prior;
  int n = 0;
  double mu = 0.0;
  long k = 0;
  int replicate = 0;
  double posterior_support = 0.0;  // NaN marks a failed cell
  double acceptance_rate = 0.0;
  double ess = 0.0;
  uint64_t seed = 0;
  double wall_time_s = 0.0;
  bool failed = false;
};

// The simulation stage of the grid: the nested tree sequence and, per
// (leaf count, rate index, replicate), the raw max-k data set.  Data sets for
// consecutive leaf counts are coupled extensions of one another, so shared
// leaf rows agree bitwise across n.
struct PreparedGridData {
  std::vector<RankedTree> ranked_trees;      // coalescent grids
  std::vector<UnrootedTree> unrooted_trees;  // uniform grids
  std::map<std::tuple<int, int, int>, SiteMatrix> data;
  std::map<int, std::string> true_keys;
};
PreparedGridData prepare_grid_data(const GridSpec& spec);

// Deterministic in the spec (worker count included); failed cells retry once
// with a derived sub-seed and are then recorded with the failure marker.
std::vector<ResultRow> run_grid(const GridSpec& spec);

std::string results_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(const std::string& text);

struct CurvePoint {
  std::string prior;
  int n = 0;
  double mu = 0.0;
  long k = 0;
  double mean_support = 0.0;
  double min_support = 0.0;
  double q25_support = 0.0;
  double median_support = 0.0;
  double q75_support = 0.0;
  double max_support = 0.0;
  int replicates = 0;
};

// Mean support curves over k per (prior, n, mu), with replicate spread.
std::vector<CurvePoint> aggregate(const std::vector<ResultRow>& rows);
std::string curves_csv(const std::vector<CurvePoint>& curves);

struct Crossing {
  std::string prior;
  int n = 0;
  double mu = 0.0;
  bool crossed = false;
  long k_below = 0;  // 0 when the curve already starts above the level
  long k_above = 0;
};

// First k-interval on which each mean curve exceeds `level`.
std::vector<Crossing> threshold_crossings(const std::vector<CurvePoint>& curves,
                                          double level = 0.5);
std::string crossings_csv(const std::vector<Crossing>& crossings);

}  // namespace phylo
