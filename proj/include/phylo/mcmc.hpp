#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "phylo/contraction.hpp"
#include "phylo/likelihood.hpp"
#include "phylo/mutation.hpp"
#include "phylo/priors.hpp"
#include "phylo/rand.hpp"
#include "phylo/sites.hpp"
#include "phylo/trees.hpp"

namespace phylo {

// ---------------------------------------------------------------------------
// Proposal primitives.  Each returns the log Hastings ratio of the move it
// applied; structural moves that cannot apply return nullopt and count as a
// rejected proposal.  Exposed so the involution and irreducibility properties
// can be tested directly.
// ---------------------------------------------------------------------------

// Multiply one coordinate by e^u.
double scale_coordinate(RankedTree& tree, int index, double u);
double scale_coordinate(UnrootedTree& tree, int index, double u);
// Multiply every coordinate by e^u.
double scale_all(RankedTree& tree, double u);
double scale_all(UnrootedTree& tree, double u);

// Swap the order of mergers e and e+1 when neither consumes the other's
// product; holding times stay attached to their rank slots.
std::optional<double> swap_adjacent_mergers(RankedTree& tree, int e);
// Re-draw which pair merges at event e among the lineages alive there;
// pair_choice indexes the binom(alive, 2) candidate pairs.  The lineage the
// old pair freed takes the replaced lineage's later slot.
std::optional<double> repick_merger(RankedTree& tree, int e, int pair_choice);
int merger_pair_choices(const RankedTree& tree, int e);

// Nearest-neighbor interchange across internal edge `edge`: detach one
// non-shared edge at each endpoint (picked by 0/1 flags in a fixed incidence
// order) and swap their attachment points.  Applying the same move twice
// restores the tree.
std::optional<double> nni(UnrootedTree& tree, int edge, int end_u_choice,
                          int end_v_choice);

// Redraw holding time `index` from its marginal law (a Gibbs move under the
// coalescent prior); returns the log Hastings ratio.
double redraw_holding_time(RankedTree& tree, int index, Rng& rng);

// ---------------------------------------------------------------------------

enum class ProposalKind : int {
  branch_scale = 0,
  all_scale = 1,
  topology = 2,
  node_age = 3,
};
constexpr int kProposalKinds = 4;

struct ProposalWeights {
  double branch_scale = 0.4;
  double all_scale = 0.1;
  double topology = 0.3;
  double node_age = 0.2;  // coalescent chains only
};

struct ChainSettings {
  long iterations = 200000;
  long burn_in = 100000;
  long thinning = 100;
  ProposalWeights weights;
  double scale_step = 0.5;  // half-width of the log-multiplier window
  bool adapt_scale = false; // tune during the first half of burn-in only
};

struct ChainConfig {
  PriorKind kind = PriorKind::kingman;
  int n = 4;
  double lambda = 1.0;
  ChainSettings settings;
  uint64_t seed = 1;
  bool prior_only = false;
  const MutationModel* model = nullptr;  // required unless prior_only
  const SiteMatrix* data = nullptr;      // required unless prior_only
  TopologyMode report_mode = TopologyMode::rooted_unranked;
};

struct ChainSample {
  long iteration = 0;
  double log_likelihood = 0.0;
  double log_prior = 0.0;
  std::string topology_key;
  std::variant<RankedTree, UnrootedTree> tree;
};

struct ChainTrace {
  std::vector<ChainSample> samples;
  std::array<long, kProposalKinds> proposed{};
  std::array<long, kProposalKinds> accepted{};
  long iterations = 0;
  double final_scale_step = 0.0;
};

ChainTrace run_chain(const ChainConfig& config);

double posterior_support(const ChainTrace& trace, const std::string& true_key);
double posterior_support(const ChainTrace& trace, const RankedTree& true_tree,
                         TopologyMode mode);
double posterior_support(const ChainTrace& trace, const UnrootedTree& true_tree,
                         TopologyMode mode);

struct ChainDiagnostics {
  std::array<double, kProposalKinds> acceptance_rate{};
  double overall_acceptance = 0.0;
  double ess = 0.0;  // of the log-likelihood series
  std::vector<double> log_likelihood_series;
};
ChainDiagnostics diagnostics(const ChainTrace& trace);

// Trace CSV: "iteration,log_likelihood,log_prior,topology_key" rows.
std::string trace_csv(const ChainTrace& trace);
// Newick lines for the retained trees, one per sample.
std::string trace_newick(const ChainTrace& trace);

}  // namespace phylo
