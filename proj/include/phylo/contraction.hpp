#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "phylo/mutation.hpp"
#include "phylo/priors.hpp"
#include "phylo/trees.hpp"

namespace phylo {

enum class PriorKind { kingman, uniform };
std::string to_string(PriorKind kind);
PriorKind prior_kind_from_string(const std::string& s);

// The tree-dependent constant that converts a Euclidean parameter distance
// into a KL / second-variation bound near a data-generating tree:
//
//   B_n = [4 gamma w! / min_a r(a)]
//         * [psi_sup (n-1) |H|^{n-1}]
//         / [ (min_{a, t>=0} exp(Qt)_{aa})^{n-2} * eta^{n w} ],
//
// with psi_sup the largest partial derivative of the branch-length map
// (n-1 for the coalescent parametrization, 1 for direct branch lengths).
// For the truncation level 0 < f < 1/(2 eta):
//   KL  <= B_n f^{-n w}   ||x - x0||_2     and
//   V0  <= B_n^2 f^{-2nw} ||x - x0||_2^2
// whenever both parameter vectors keep external branches above f.
struct DivergenceBound {
  double bn = 0.0;
  double log_bn = 0.0;
  double kl_coefficient = 0.0;  // B_n f^{-n w}
  double v0_coefficient = 0.0;  // squared
};
DivergenceBound divergence_bound(const MutationModel& model, double psi_sup,
                                 int n, double f);
double psi_derivative_sup(PriorKind kind, int n);

// Rate sequences used when checking the sufficient conditions at finite
// (n, k):
//   coalescent:  zeta^2 = C (log k)^{3/2} / k,  eps^2 = C (log k)^{3/2+beta} / k,
//                f = exp(-(C+4) k zeta^2) / (n (n-1)),  g = (C+4+delta) k zeta^2,
//   uniform:     the same shapes with 2C in place of C, f divided by 2 n lambda
//                and g divided by lambda.
struct ContractionSchedule {
  double zeta_sq = 0.0;
  double eps_sq = 0.0;
  double f = 0.0;
  double log_f = 0.0;  // f underflows quickly; keep the log
  double g = 0.0;
};

struct ContractionConfig {
  PriorKind kind = PriorKind::kingman;
  int n = 4;
  double k = 1e6;
  double C = 1.0;
  double beta = 1.5;
  double delta = 1.0;
  double lambda = 1.0;  // uniform prior rate
  int w = 1;
  double log_bn = 0.0;

  ContractionSchedule schedule() const;
};

// Entropy-style bound, evaluated in log space:
//   m* (log g - log eps^2 - n w log f) - k eps^2   vs
//   -(log |T_n| + m* log(4 B_n)).
struct EntropyCheck {
  double lhs_log = 0.0;
  double rhs_log = 0.0;
  bool satisfied = false;
};
EntropyCheck entropy_condition(const ContractionConfig& config,
                               double log_topology_count, int m_star);

// Monte Carlo mass of the sieve complement {min external <= f or max branch
// >= g} under the prior, with the analytic exponential-tail bound.
struct RemainingMassCheck {
  double estimate = 0.0;
  double std_error = 0.0;
  double analytic_bound = 0.0;
  long samples = 0;
  long violations = 0;
  bool within_bound = false;  // estimate <= bound + 3 stderr
};
RemainingMassCheck remaining_mass(const KingmanPrior& prior, double f, double g,
                                  long samples, uint64_t seed);
RemainingMassCheck remaining_mass(const UniformPrior& prior, double f, double g,
                                  long samples, uint64_t seed);

// Prior mass of the Euclidean ball around the data-generating parameters,
// intersected with the external-branch floor, conditional on the topology;
// multiplied by the exact topology mass.  The box product
//   prod_i 2 rate_i delta exp(-rate_i x0_i),  delta = radius / sqrt(m),
// lower-bounds the ball mass whenever the box stays inside the constraint
// set (box_valid reports that).
struct PriorMassCheck {
  double topology_mass = 0.0;
  double ball_estimate = 0.0;
  double std_error = 0.0;
  double box_lower_bound = 0.0;
  bool box_valid = false;
  double product = 0.0;  // topology_mass * ball_estimate
  long samples = 0;
};
PriorMassCheck prior_mass_near_truth(const KingmanPrior& prior,
                                     const RankedTree& tree0, double radius,
                                     double f_floor, long samples,
                                     uint64_t seed);
PriorMassCheck prior_mass_near_truth(const UniformPrior& prior,
                                     const UnrootedTree& tree0, double radius,
                                     double f_floor, long samples,
                                     uint64_t seed);

}  // namespace phylo
