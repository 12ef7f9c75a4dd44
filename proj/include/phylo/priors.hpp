#pragma once

#include <span>
#include <vector>

#include "phylo/rand.hpp"
#include "phylo/trees.hpp"

namespace phylo {

// Coalescent prior on ranked ultrametric trees: ranked topology uniform,
// holding_times[i] ~ Exp(binom(i+2, 2)) independent (i+2 lineages alive).
struct KingmanPrior {
  int n;
};

// Uniform-topology prior on unrooted binary trees with iid Exp(lambda)
// branch lengths.
struct UniformPrior {
  int n;
  double lambda;
};

double holding_rate(int index);  // binom(index + 2, 2), 0-based

double ranked_topology_count(int n);
double log_ranked_topology_count(int n);
double unrooted_topology_count(int n);       // (2n-5)!!
double log_unrooted_topology_count(int n);

RankedTree sample(const KingmanPrior& prior, Rng& rng);
UnrootedTree sample(const UniformPrior& prior, Rng& rng);

// Normalized log densities (topology mass included).
double log_density(const KingmanPrior& prior, const RankedTree& tree);
double log_density(const UniformPrior& prior, const UnrootedTree& tree);

// Nested sequences: tree m+1 extends tree m, so restriction recovers each
// predecessor exactly and every element is marginally prior-distributed.
std::vector<RankedTree> nested_kingman_sequence(int n_min, int n_max, Rng& rng);
std::vector<UnrootedTree> nested_uniform_sequence(int n_min, int n_max,
                                                  double lambda, Rng& rng);

// Empirical counterparts of the almost-sure shape statements for the two
// priors: total parameter length, the smallest coordinate against the
// polynomial floor it eventually clears, and the per-coordinate normalized
// total length.
struct ShapeRow {
  int n = 0;
  double total_length = 0.0;
  double min_coordinate = 0.0;
  double coordinate_floor = 0.0;   // n^-4 (coalescent) or n^-2 (uniform)
  double normalized_per_n = 0.0;   // lambda * total / n   (lambda = 1 coalescent)
  double normalized_per_coord = 0.0;  // lambda * total / #coordinates
};
std::vector<ShapeRow> shape_diagnostics(std::span<const RankedTree> sequence);
std::vector<ShapeRow> shape_diagnostics(std::span<const UnrootedTree> sequence,
                                        double lambda);

// Exponential tail bounds and their exact counterparts.
double exp_lower_tail_bound(double rate, double f);   // rate f (1 + rate f / 2)
double exp_lower_tail_exact(double rate, double f);   // 1 - exp(-rate f)
double exp_max_tail_bound(std::span<const double> rates, double g);
double exp_max_tail_exact(std::span<const double> rates, double g);

}  // namespace phylo
