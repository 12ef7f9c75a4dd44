#pragma once

#include <vector>

#include "phylo/likelihood.hpp"
#include "phylo/mutation.hpp"
#include "phylo/trees.hpp"

namespace phylo {

// Exact probability table over all |H|^n leaf patterns for one tree/model
// pair.  Pattern index is the base-|H| number with row 0 as the most
// significant digit.  Guarded to 10^7 entries.
struct LeafDistribution {
  int n = 0;
  int h = 0;
  std::vector<double> p;

  size_t size() const { return p.size(); }
};

LeafDistribution leaf_distribution(const RankedTree& tree,
                                   const MutationModel& model);
LeafDistribution leaf_distribution(const UnrootedTree& tree,
                                   const MutationModel& model);
LeafDistribution leaf_distribution(const RootedView& view,
                                   const MutationModel& model);

double kl_divergence(const LeafDistribution& p0, const LeafDistribution& p);
// Centered second log-ratio moment: E0[log^2(p0/p)] - KL^2.
double kl_variation(const LeafDistribution& p0, const LeafDistribution& p);
// One half the squared root-density distance; hellinger() is its square root.
double hellinger_sq(const LeafDistribution& p0, const LeafDistribution& p);
double hellinger(const LeafDistribution& p0, const LeafDistribution& p);
double total_variation(const LeafDistribution& p0, const LeafDistribution& p);

}  // namespace phylo
