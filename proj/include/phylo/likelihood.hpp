#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "phylo/mutation.hpp"
#include "phylo/trees.hpp"

namespace phylo {

struct SiteMatrix;

// Rooted orientation of a tree: parent pointers, branch lengths to the
// parent, and the mapping from leaf nodes to pattern rows (leaf-label order).
// Ranked trees root at their final merger; unrooted trees at a chosen
// internal node, which is arbitrary for reversible models.
struct RootedView {
  int n_nodes = 0;
  int n_leaves = 0;
  int root = -1;
  std::vector<int> parent;                // -1 at root
  std::vector<double> parent_length;
  std::vector<std::vector<int>> children;
  std::vector<int> row_of_leaf;           // node id -> pattern row, -1 if internal
  std::vector<int> postorder;

  static RootedView from_ranked(const RankedTree& tree);
  static RootedView from_unrooted(const UnrootedTree& tree, int root_node);

  // Test support: build directly from parent arrays (lengths may be zero).
  static RootedView from_parents(std::vector<int> parent,
                                 std::vector<double> parent_length,
                                 int n_leaves);
};

// Memo for exp(Q t) keyed by the bit pattern of t; one per evaluation.
class TransitionCache {
 public:
  explicit TransitionCache(const MutationModel& model) : model_(&model) {}
  const Eigen::MatrixXd& at(double t);
  void clear() { cache_.clear(); }

 private:
  const MutationModel* model_;
  std::map<uint64_t, Eigen::MatrixXd> cache_;
};

// P(pattern | tree) by postorder dynamic programming; value in (0, 1].
double site_likelihood(const RootedView& view, const MutationModel& model,
                       std::span<const uint8_t> pattern);

// Literal sum over all internal-allele assignments; the pruning oracle.
// Guarded to at most 10^7 terms.
double site_likelihood_brute_force(const RootedView& view,
                                   const MutationModel& model,
                                   std::span<const uint8_t> pattern);

// Sum of per-site log likelihoods with pattern compression and per-node
// rescaling; k = 0 gives 0.
double log_likelihood(const RootedView& view, const MutationModel& model,
                      const SiteMatrix& data);

// Max pairwise deviation of the site likelihood across all internal-node
// rootings; requires a reversible model.
double root_invariance_max_deviation(const UnrootedTree& tree,
                                     const MutationModel& model,
                                     std::span<const uint8_t> pattern);

// Incremental evaluator used by the sampler: compresses the data once and
// re-evaluates the full log likelihood for a new tree of the same leaf set.
class LikelihoodEvaluator {
 public:
  LikelihoodEvaluator(const MutationModel& model, const SiteMatrix& data);

  double operator()(const RankedTree& tree);
  double operator()(const UnrootedTree& tree);
  double eval(const RootedView& view);

 private:
  const MutationModel* model_;
  std::vector<std::vector<uint8_t>> patterns_;
  std::vector<double> weights_;
  TransitionCache cache_;
  std::vector<double> partial_;  // scratch, n_nodes x |H|
};

}  // namespace phylo
