#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phylo/mutation.hpp"
#include "phylo/trees.hpp"

namespace phylo {

struct MutEvent {
  double offset;   // distance from the rootward end of the branch
  uint8_t allele;  // state after the jump
  bool operator==(const MutEvent&) const = default;
};

// Jump-process realization behind a simulated data set: the per-site root
// alleles plus, for every branch (in branch_map order) and site, the ordered
// mutation events along it.  Replaying the log from the root alleles
// reproduces the stored leaf alleles exactly.
struct EventLog {
  std::vector<uint8_t> root_alleles;                       // size k
  std::vector<std::vector<std::vector<MutEvent>>> events;  // [branch][site]
};

// For ranked trees: the allele of every lineage at every merger time-slice,
// per site.  Entries exist for lineages alive just before the merger and for
// the node the merger creates; 0xff marks absent entries.  This is what lets
// a data set be extended to a larger nested tree without touching the
// realization it already carries.
struct BoundaryTable {
  int k = 0;
  int boundaries = 0;  // one per merger
  int nodes = 0;
  std::vector<uint8_t> data;  // [site][boundary][node]

  uint8_t& at(int site, int boundary, int node) {
    return data[(static_cast<size_t>(site) * boundaries + boundary) * nodes + node];
  }
  uint8_t at(int site, int boundary, int node) const {
    return data[(static_cast<size_t>(site) * boundaries + boundary) * nodes + node];
  }
};

struct SiteMatrix {
  std::vector<std::string> leaf_labels;  // row order (label-sorted)
  int k = 0;
  std::vector<uint8_t> alleles;  // row-major, leaf_labels.size() x k
  std::optional<EventLog> log;
  std::optional<BoundaryTable> boundaries;
  std::string provenance;
  uint64_t seed = 0;

  int rows() const { return static_cast<int>(leaf_labels.size()); }
  uint8_t at(int row, int site) const {
    return alleles[static_cast<size_t>(row) * k + site];
  }
  uint8_t& at(int row, int site) {
    return alleles[static_cast<size_t>(row) * k + site];
  }
  // First k_prefix site columns, with the event record dropped.
  SiteMatrix prefix(int k_prefix) const;
};

// Simulates k independent sites by an event-level jump process along every
// branch.  Ranked trees evolve from their root; unrooted trees are rooted at
// the smallest-label leaf, which requires a reversible model.  Deterministic
// in (tree, model, k, seed): every (site, branch) pair has its own stream.
SiteMatrix simulate_sites(const RankedTree& tree, const MutationModel& model,
                          int k, uint64_t seed);
SiteMatrix simulate_sites(const UnrootedTree& tree, const MutationModel& model,
                          int k, uint64_t seed);

// Extends a data set to a tree with one more leaf: the realization carried by
// `base` is kept as-is (shared leaf rows are copied bitwise) and only the new
// leaf's attachment path receives fresh events, seeded from the carried
// allele at an interior junction of the host branch so that every split of
// the extended topology keeps a positive effective length in the data.  The
// new leaf's one-dimensional marginal law is exactly that of a fresh
// simulation on the extended tree.
SiteMatrix extend_sites(const SiteMatrix& base, const RankedTree& base_tree,
                        const RankedTree& extended_tree,
                        const MutationModel& model, uint64_t seed);
SiteMatrix extend_sites(const SiteMatrix& base, const UnrootedTree& base_tree,
                        const UnrootedTree& extended_tree,
                        const MutationModel& model, uint64_t seed);

// Deterministic replay of the event log for one site; returns the alleles at
// the leaves in row order.
std::vector<uint8_t> replay_leaf_alleles(const RankedTree& tree,
                                         const EventLog& log, int site);
std::vector<uint8_t> replay_leaf_alleles(const UnrootedTree& tree,
                                         const EventLog& log, int site);

// Row projection onto a leaf subset (label order preserved).
SiteMatrix project_rows(const SiteMatrix& m,
                        const std::vector<std::string>& labels);

// Plain text format: a header row of leaf labels, then one row per leaf with
// one symbol column per site.
std::string to_text(const SiteMatrix& m, const MutationModel& model);
SiteMatrix parse_text(const std::string& text, const MutationModel& model);

// NEXUS-style DATA block.
std::string to_nexus_characters(const SiteMatrix& m, const MutationModel& model);

// Compact binary sidecar for the event log.  Layout: magic "PHEV", version
// u32, k u64, branch count u32, k root-allele bytes, then per branch and per
// site a varint event count followed by (float64 LE offset, u8 allele) pairs.
std::vector<uint8_t> event_sidecar_bytes(const SiteMatrix& m);
void attach_event_sidecar(SiteMatrix& m, const std::vector<uint8_t>& bytes);

}  // namespace phylo
