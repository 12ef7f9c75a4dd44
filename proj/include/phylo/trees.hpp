#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phylo/rand.hpp"

namespace phylo {

// ---------------------------------------------------------------------------
// Rooted, ultrametric tree described by its merger order and the waiting
// times between mergers.  Leaves are nodes 0..n-1 (one per entry of
// leaf_labels); merger e joins two live lineages and creates node n+e, so the
// root is node 2n-2.  holding_times[i] is the duration during which i+2
// lineages are alive: holding_times[n-2] is the stretch from the leaves to
// the first merger and holding_times[0] the gap between the last two mergers.
// Merger e is therefore preceded by holding_times[n-2-e].
// ---------------------------------------------------------------------------
struct RankedTree {
  int n = 0;
  std::vector<std::string> leaf_labels;
  std::vector<std::pair<int, int>> mergers;  // smaller id first
  std::vector<double> holding_times;

  int node_count() const { return 2 * n - 1; }
  int root() const { return 2 * n - 2; }
  double height_of_event(int e) const;  // distance above the leaf level
  double total_height() const;
  // Event index that consumes each node; the root maps to -1.
  std::vector<int> death_event() const;
  void validate() const;  // throws std::invalid_argument on broken invariants

  bool operator==(const RankedTree&) const = default;
};

// ---------------------------------------------------------------------------
// Unrooted binary tree on labeled leaves with one length per edge.  Leaves
// are nodes 0..n-1, internal nodes n..2n-3 (all of degree 3).  The position
// of an edge in `edges` is meaningful state: the sequential construction
// appends new edges at the end and the restriction rule removes the
// higher-indexed edge at a collapsed node.
// ---------------------------------------------------------------------------
struct UnrootedTree {
  struct Edge {
    int u = -1, v = -1;
    double length = 0.0;
    bool operator==(const Edge&) const = default;
  };

  int n = 0;
  std::vector<std::string> leaf_labels;
  std::vector<Edge> edges;

  int node_count() const { return 2 * n - 2; }
  int edge_count() const { return 2 * n - 3; }
  std::vector<std::vector<int>> incident_edges() const;  // node -> edge indices
  void validate() const;

  bool operator==(const UnrootedTree&) const = default;
};

// ---------------------------------------------------------------------------
// Branch maps: one entry per branch with its realized length.  For ranked
// trees u is the rootward endpoint and entries are ordered by child node id;
// for unrooted trees entries follow the edge-index order.
// ---------------------------------------------------------------------------
struct Branch {
  int u = -1, v = -1;
  double length = 0.0;
  bool is_external = false;
};
using BranchMap = std::vector<Branch>;

BranchMap branch_map(const RankedTree& tree);
BranchMap branch_map(const UnrootedTree& tree);

double min_external_length(const BranchMap& branches);
// min(min external / 2, 1 / (2 eta)): the truncation level used by the
// divergence bounds around a data-generating tree.
double external_length_floor(const BranchMap& branches, double eta);

// ---------------------------------------------------------------------------
// Nested extension and restriction.
//
// extend_kingman grows an n-leaf tree to n+1 leaves by inserting one new
// merger, chosen uniformly among the binom(n+1,2) (position, lineage) slots,
// which joins the new leaf to a lineage alive at that position; the new
// waiting time is appended as holding_times[n-1] with an Exp(binom(n+1,2))
// draw.  This is the exact conditional of the restriction map, so a
// prior-distributed input yields a prior-distributed output and
// restrict_kingman(extend_kingman(t), n) == t exactly.
// ---------------------------------------------------------------------------
struct RankedExtension {
  RankedTree tree;
  int insert_pos = 0;     // new merger sits before old merger insert_pos
  int host_lineage = -1;  // base-tree node id the new leaf joined
  int new_leaf = -1;      // node id in the extended tree
  int new_internal = -1;  // node id of the inserted merger
  std::vector<int> node_map;  // base node id -> extended node id
};

RankedExtension extend_kingman_detail(const RankedTree& tree, Rng& rng);
RankedTree extend_kingman(const RankedTree& tree, Rng& rng);
RankedTree restrict_kingman(const RankedTree& tree, int m);

// Recovers the extension record relating two exactly nested trees
// (ext must restrict to base); throws if they are not nested.
RankedExtension match_kingman_extension(const RankedTree& base,
                                        const RankedTree& ext);

// ---------------------------------------------------------------------------
// Sequential construction for unrooted trees: pick a branch uniformly, pick
// one of its ends, splice a new internal node into the branch and hang the
// new leaf from it.  The reconnecting stub gets edge index 2n-3 and the
// pendant edge 2n-2 (0-based), both with fresh Exp(lambda) lengths.
// ---------------------------------------------------------------------------
struct UniformExtension {
  UnrootedTree tree;
  int host_edge = -1;  // base edge index that was subdivided
  int host_end = 0;    // 0: new node took over the u end, 1: the v end
  int new_leaf = -1;
  int new_internal = -1;
  std::vector<int> node_map;  // base node id -> extended node id
};

UniformExtension extend_uniform_detail(const UnrootedTree& tree, double lambda,
                                       Rng& rng);
UnrootedTree extend_uniform(const UnrootedTree& tree, double lambda, Rng& rng);

// Removes the given leaf; at the resulting degree-2 node the incident edge
// with the higher index is deleted and its far endpoints joined.  Requires
// n >= 5 so the result is still binary on >= 4 leaves.
UnrootedTree restrict_uniform(const UnrootedTree& tree,
                              const std::string& leaf_label);
UnrootedTree restrict_uniform(const UnrootedTree& tree, Rng& rng);

UniformExtension match_uniform_extension(const UnrootedTree& base,
                                         const UnrootedTree& ext);

// ---------------------------------------------------------------------------
// Canonical topology keys.  Two trees get the same key iff they share the
// same topology at the requested granularity; keys are invariant under any
// renumbering of internal nodes and any permutation of the edge list.
// ---------------------------------------------------------------------------
enum class TopologyMode { ranked, rooted_unranked, unrooted };

std::string to_string(TopologyMode mode);
TopologyMode topology_mode_from_string(const std::string& s);

std::string canonical_topology(const RankedTree& tree, TopologyMode mode);
std::string canonical_topology(const UnrootedTree& tree, TopologyMode mode);

}  // namespace phylo
