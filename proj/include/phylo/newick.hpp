#pragma once

#include <string>
#include <utility>
#include <vector>

#include "phylo/trees.hpp"

namespace phylo {

// Rooted Newick with ":length" annotations.  Ranked trees round-trip through
// Newick alone: the ranking is recovered from the (almost surely distinct)
// internal node heights, and tied heights are rejected at parse time.
std::string to_newick(const RankedTree& tree);
RankedTree parse_ranked_newick(const std::string& text);

// Unrooted trees serialize as a trifurcation at an internal node.  Newick
// cannot carry the edge-index order, which is meaningful state here, so a
// JSON sidecar stores the exact node ids, edge order and lengths; parsing
// with the sidecar reproduces the tree bit-for-bit.  Without a sidecar, edge
// indices follow the order branch lengths appear in the text.
std::string to_newick(const UnrootedTree& tree);
std::string unrooted_sidecar_json(const UnrootedTree& tree);
UnrootedTree parse_unrooted_newick(const std::string& text);
UnrootedTree parse_unrooted_sidecar(const std::string& sidecar_json);

// Minimal NEXUS TREES block (one TREE statement per entry).
std::string nexus_trees_block(
    const std::vector<std::pair<std::string, std::string>>& named_newicks);

}  // namespace phylo
