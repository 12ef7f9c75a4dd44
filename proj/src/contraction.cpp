#include "phylo/contraction.hpp"

#include <cmath>
#include <stdexcept>

#include "phylo/util.hpp"

namespace phylo {

std::string to_string(PriorKind kind) {
  return kind == PriorKind::kingman ? "kingman" : "uniform";
}

PriorKind prior_kind_from_string(const std::string& s) {
  if (s == "kingman") return PriorKind::kingman;
  if (s == "uniform") return PriorKind::uniform;
  throw std::invalid_argument("unknown prior kind: " + s);
}

double psi_derivative_sup(PriorKind kind, int n) {
  return kind == PriorKind::kingman ? static_cast<double>(n - 1) : 1.0;
}

DivergenceBound divergence_bound(const MutationModel& model, double psi_sup,
                                 int n, double f) {
  if (n < 2) throw std::invalid_argument("divergence_bound: n must be >= 2");
  if (psi_sup <= 0.0)
    throw std::invalid_argument("divergence_bound: psi_sup must be positive");
  if (f <= 0.0 || f >= 1.0 / (2.0 * model.eta()))
    throw std::invalid_argument("divergence_bound: need 0 < f < 1/(2 eta)");

  const double min_root = model.root_dist().minCoeff();
  const double min_diag = model.min_diagonal_transition();
  double log_w_fact = 0.0;
  for (int i = 2; i <= model.w(); ++i) log_w_fact += std::log(static_cast<double>(i));

  DivergenceBound out;
  out.log_bn = std::log(4.0 * model.gamma()) + log_w_fact - std::log(min_root) +
               std::log(psi_sup) + std::log(static_cast<double>(n - 1)) +
               (n - 1) * std::log(static_cast<double>(model.size())) -
               (n - 2) * std::log(min_diag) -
               static_cast<double>(n) * model.w() * std::log(model.eta());
  out.bn = std::exp(out.log_bn);
  const double log_coeff =
      out.log_bn - static_cast<double>(n) * model.w() * std::log(f);
  out.kl_coefficient = std::exp(log_coeff);
  out.v0_coefficient = std::exp(2.0 * log_coeff);
  return out;
}

ContractionSchedule ContractionConfig::schedule() const {
  if (k <= 1.0) throw std::invalid_argument("ContractionConfig: k must exceed 1");
  if (beta <= 1.0) throw std::invalid_argument("ContractionConfig: beta must exceed 1");
  if (C <= 0.0 || delta <= 0.0)
    throw std::invalid_argument("ContractionConfig: C and delta must be positive");
  const double lg = std::log(k);
  const double scale = (kind == PriorKind::kingman) ? C : 2.0 * C;
  ContractionSchedule s;
  s.zeta_sq = scale * std::pow(lg, 1.5) / k;
  s.eps_sq = scale * std::pow(lg, 1.5 + beta) / k;
  const double kz = k * s.zeta_sq;
  if (kind == PriorKind::kingman) {
    s.log_f = -(C + 4.0) * kz - std::log(static_cast<double>(n) * (n - 1));
    s.g = (C + 4.0 + delta) * kz;
  } else {
    s.log_f = -(C + 4.0) * kz - std::log(2.0 * n * lambda);
    s.g = (C + 4.0 + delta) * kz / lambda;
  }
  s.f = std::exp(s.log_f);
  return s;
}

EntropyCheck entropy_condition(const ContractionConfig& config,
                               double log_topology_count, int m_star) {
  if (m_star <= 0)
    throw std::invalid_argument("entropy_condition: m_star must be positive");
  const auto s = config.schedule();
  EntropyCheck out;
  out.lhs_log = m_star * (std::log(s.g) - std::log(s.eps_sq) -
                          static_cast<double>(config.n) * config.w * s.log_f) -
                config.k * s.eps_sq;
  out.rhs_log = -(log_topology_count +
                  m_star * (std::log(4.0) + config.log_bn));
  out.satisfied = out.lhs_log <= out.rhs_log;
  return out;
}

namespace {

RemainingMassCheck finish_remaining(long violations, long samples,
                                    double analytic) {
  RemainingMassCheck out;
  out.samples = samples;
  out.violations = violations;
  out.estimate = static_cast<double>(violations) / samples;
  out.std_error =
      std::sqrt(out.estimate * (1.0 - out.estimate) / samples);
  out.analytic_bound = analytic;
  out.within_bound = out.estimate <= analytic + 3.0 * out.std_error;
  return out;
}

}  // namespace

RemainingMassCheck remaining_mass(const KingmanPrior& prior, double f, double g,
                                  long samples, uint64_t seed) {
  if (samples < 1000)
    throw std::invalid_argument("remaining_mass: need at least 10^3 samples");
  if (f <= 0.0 || g <= 0.0)
    throw std::invalid_argument("remaining_mass: f and g must be positive");
  Rng rng(seed);
  long violations = 0;
  for (long i = 0; i < samples; ++i) {
    const RankedTree tree = sample(prior, rng);
    const auto bm = branch_map(tree);
    double max_branch = 0.0;
    for (const auto& b : bm) max_branch = std::max(max_branch, b.length);
    if (min_external_length(bm) <= f || max_branch >= g) ++violations;
  }
  // Lower tail: the shortest external branch is the most recent holding time,
  // Exp(binom(n,2)).  Upper tail: a union bound over the n-1 coordinates at
  // the slowest rate 1; at the leaf counts checked here it also dominates the
  // sums of coordinates a branch can span.
  std::vector<double> rates(prior.n - 1);
  for (int i = 0; i < prior.n - 1; ++i) rates[i] = holding_rate(i);
  const double analytic =
      exp_lower_tail_bound(binom2(prior.n), f) + exp_max_tail_bound(rates, g);
  return finish_remaining(violations, samples, analytic);
}

RemainingMassCheck remaining_mass(const UniformPrior& prior, double f, double g,
                                  long samples, uint64_t seed) {
  if (samples < 1000)
    throw std::invalid_argument("remaining_mass: need at least 10^3 samples");
  if (f <= 0.0 || g <= 0.0)
    throw std::invalid_argument("remaining_mass: f and g must be positive");
  Rng rng(seed);
  long violations = 0;
  for (long i = 0; i < samples; ++i) {
    const UnrootedTree tree = sample(prior, rng);
    const auto bm = branch_map(tree);
    double max_branch = 0.0;
    for (const auto& b : bm) max_branch = std::max(max_branch, b.length);
    if (min_external_length(bm) <= f || max_branch >= g) ++violations;
  }
  const int m = 2 * prior.n - 3;
  std::vector<double> rates(m, prior.lambda);
  const double analytic =
      prior.n * exp_lower_tail_bound(prior.lambda, f) +
      exp_max_tail_bound(rates, g);
  return finish_remaining(violations, samples, analytic);
}

namespace {

PriorMassCheck finish_prior_mass(double topology_mass, long hits, long samples,
                                 std::span<const double> rates,
                                 std::span<const double> x0, double radius,
                                 double f_floor, double min_external_of_box) {
  PriorMassCheck out;
  out.samples = samples;
  out.topology_mass = topology_mass;
  out.ball_estimate = static_cast<double>(hits) / samples;
  out.std_error =
      std::sqrt(out.ball_estimate * (1.0 - out.ball_estimate) / samples);
  out.product = out.topology_mass * out.ball_estimate;

  const double delta = radius / std::sqrt(static_cast<double>(x0.size()));
  out.box_valid = min_external_of_box - delta > f_floor;
  double box = 1.0;
  for (size_t i = 0; i < x0.size(); ++i) {
    if (x0[i] - delta <= 0.0) out.box_valid = false;
    box *= 2.0 * rates[i] * delta * std::exp(-rates[i] * x0[i]);
  }
  out.box_lower_bound = out.box_valid ? box : 0.0;
  return out;
}

}  // namespace

PriorMassCheck prior_mass_near_truth(const KingmanPrior& prior,
                                     const RankedTree& tree0, double radius,
                                     double f_floor, long samples,
                                     uint64_t seed) {
  if (radius <= 0.0)
    throw std::invalid_argument("prior_mass_near_truth: radius must be positive");
  tree0.validate();
  if (tree0.n != prior.n)
    throw std::invalid_argument("prior_mass_near_truth: leaf count mismatch");
  const int m = prior.n - 1;
  Rng rng(seed);
  long hits = 0;
  std::vector<double> x(m);
  for (long i = 0; i < samples; ++i) {
    for (int c = 0; c < m; ++c) x[c] = rng.exponential(holding_rate(c));
    double d2 = 0.0;
    for (int c = 0; c < m; ++c) {
      const double d = x[c] - tree0.holding_times[c];
      d2 += d * d;
    }
    // The minimum external branch is the most recent holding time.
    if (d2 <= radius * radius && x[m - 1] > f_floor) ++hits;
  }
  std::vector<double> rates(m);
  for (int c = 0; c < m; ++c) rates[c] = holding_rate(c);
  return finish_prior_mass(1.0 / ranked_topology_count(prior.n), hits, samples,
                           rates, tree0.holding_times, radius, f_floor,
                           tree0.holding_times[m - 1]);
}

PriorMassCheck prior_mass_near_truth(const UniformPrior& prior,
                                     const UnrootedTree& tree0, double radius,
                                     double f_floor, long samples,
                                     uint64_t seed) {
  if (radius <= 0.0)
    throw std::invalid_argument("prior_mass_near_truth: radius must be positive");
  tree0.validate();
  if (tree0.n != prior.n)
    throw std::invalid_argument("prior_mass_near_truth: leaf count mismatch");
  const int m = 2 * prior.n - 3;
  std::vector<double> x0(m);
  for (int c = 0; c < m; ++c) x0[c] = tree0.edges[c].length;
  std::vector<bool> external(m, false);
  double min_ext0 = 0.0;
  bool first = true;
  for (int c = 0; c < m; ++c) {
    external[c] = tree0.edges[c].u < prior.n || tree0.edges[c].v < prior.n;
    if (external[c] && (first || x0[c] < min_ext0)) {
      min_ext0 = x0[c];
      first = false;
    }
  }

  Rng rng(seed);
  long hits = 0;
  std::vector<double> x(m);
  for (long i = 0; i < samples; ++i) {
    double d2 = 0.0, min_ext = -1.0;
    for (int c = 0; c < m; ++c) {
      x[c] = rng.exponential(prior.lambda);
      const double d = x[c] - x0[c];
      d2 += d * d;
      if (external[c] && (min_ext < 0.0 || x[c] < min_ext)) min_ext = x[c];
    }
    if (d2 <= radius * radius && min_ext > f_floor) ++hits;
  }
  std::vector<double> rates(m, prior.lambda);
  return finish_prior_mass(1.0 / unrooted_topology_count(prior.n), hits,
                           samples, rates, x0, radius, f_floor, min_ext0);
}

}  // namespace phylo
