#include "phylo/priors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "phylo/util.hpp"

namespace phylo {

double holding_rate(int index) {
  if (index < 0) throw std::invalid_argument("holding_rate: negative index");
  return binom2(index + 2);
}

double ranked_topology_count(int n) {
  double c = 1.0;
  for (int i = 2; i <= n; ++i) c *= binom2(i);
  return c;
}

double log_ranked_topology_count(int n) {
  double c = 0.0;
  for (int i = 2; i <= n; ++i) c += std::log(binom2(i));
  return c;
}

double unrooted_topology_count(int n) {
  double c = 1.0;
  for (int j = 1; 2 * j - 1 <= 2 * n - 5; ++j) c *= 2 * j - 1;
  return c;
}

double log_unrooted_topology_count(int n) {
  double c = 0.0;
  for (int j = 1; 2 * j - 1 <= 2 * n - 5; ++j) c += std::log(2.0 * j - 1);
  return c;
}

RankedTree sample(const KingmanPrior& prior, Rng& rng) {
  if (prior.n < 2) throw std::invalid_argument("KingmanPrior: n must be >= 2");
  const int n = prior.n;
  RankedTree tree;
  tree.n = n;
  for (int i = 0; i < n; ++i) tree.leaf_labels.push_back(std::to_string(i + 1));
  tree.holding_times.resize(n - 1);
  std::vector<int> alive(n);
  for (int i = 0; i < n; ++i) alive[i] = i;
  for (int e = 0; e < n - 1; ++e) {
    const int m = n - e;  // lineages alive before this merger
    tree.holding_times[m - 2] = rng.exponential(binom2(m));
    const int i = rng.uniform_int(m);
    int j = rng.uniform_int(m - 1);
    if (j >= i) ++j;
    int a = alive[i], b = alive[j];
    if (a > b) std::swap(a, b);
    tree.mergers.emplace_back(a, b);
    alive[std::min(i, j)] = n + e;
    alive.erase(alive.begin() + std::max(i, j));
  }
  tree.validate();
  return tree;
}

UnrootedTree sample(const UniformPrior& prior, Rng& rng) {
  if (prior.n < 4) throw std::invalid_argument("UniformPrior: n must be >= 4");
  if (prior.lambda <= 0.0)
    throw std::invalid_argument("UniformPrior: lambda must be positive");
  // Three-leaf star, then sequential attachment up to n leaves.
  UnrootedTree tree;
  tree.n = 3;
  tree.leaf_labels = {"1", "2", "3"};
  for (int i = 0; i < 3; ++i)
    tree.edges.push_back({3, i, rng.exponential(prior.lambda)});
  for (int m = 3; m < prior.n; ++m)
    tree = extend_uniform(tree, prior.lambda, rng);
  tree.validate();
  return tree;
}

double log_density(const KingmanPrior& prior, const RankedTree& tree) {
  tree.validate();
  if (tree.n != prior.n)
    throw std::invalid_argument("log_density: leaf count mismatch");
  double ld = -log_ranked_topology_count(prior.n);
  for (int i = 0; i < prior.n - 1; ++i) {
    const double rate = holding_rate(i);
    ld += std::log(rate) - rate * tree.holding_times[i];
  }
  return ld;
}

double log_density(const UniformPrior& prior, const UnrootedTree& tree) {
  tree.validate();
  if (tree.n != prior.n)
    throw std::invalid_argument("log_density: leaf count mismatch");
  double total = 0.0;
  for (const auto& e : tree.edges) total += e.length;
  return (2.0 * prior.n - 3.0) * std::log(prior.lambda) -
         log_unrooted_topology_count(prior.n) - prior.lambda * total;
}

std::vector<RankedTree> nested_kingman_sequence(int n_min, int n_max, Rng& rng) {
  if (n_min < 2 || n_max < n_min)
    throw std::invalid_argument("nested_kingman_sequence: bad range");
  std::vector<RankedTree> out;
  out.push_back(sample(KingmanPrior{n_min}, rng));
  for (int n = n_min; n < n_max; ++n)
    out.push_back(extend_kingman(out.back(), rng));
  return out;
}

std::vector<UnrootedTree> nested_uniform_sequence(int n_min, int n_max,
                                                  double lambda, Rng& rng) {
  if (n_min < 4 || n_max < n_min)
    throw std::invalid_argument("nested_uniform_sequence: bad range");
  std::vector<UnrootedTree> out;
  out.push_back(sample(UniformPrior{n_min, lambda}, rng));
  for (int n = n_min; n < n_max; ++n)
    out.push_back(extend_uniform(out.back(), lambda, rng));
  return out;
}

namespace {

ShapeRow shape_row(int n, std::span<const double> coords, double lambda,
                   double floor_power) {
  ShapeRow row;
  row.n = n;
  row.total_length = 0.0;
  row.min_coordinate = coords[0];
  for (double x : coords) {
    row.total_length += x;
    row.min_coordinate = std::min(row.min_coordinate, x);
  }
  row.coordinate_floor = std::pow(static_cast<double>(n), floor_power);
  row.normalized_per_n = lambda * row.total_length / n;
  row.normalized_per_coord =
      lambda * row.total_length / static_cast<double>(coords.size());
  return row;
}

}  // namespace

std::vector<ShapeRow> shape_diagnostics(std::span<const RankedTree> sequence) {
  std::vector<ShapeRow> rows;
  for (const auto& tree : sequence)
    rows.push_back(shape_row(tree.n, tree.holding_times, 1.0, -4.0));
  return rows;
}

std::vector<ShapeRow> shape_diagnostics(std::span<const UnrootedTree> sequence,
                                        double lambda) {
  std::vector<ShapeRow> rows;
  for (const auto& tree : sequence) {
    std::vector<double> coords;
    coords.reserve(tree.edges.size());
    for (const auto& e : tree.edges) coords.push_back(e.length);
    rows.push_back(shape_row(tree.n, coords, lambda, -2.0));
  }
  return rows;
}

double exp_lower_tail_bound(double rate, double f) {
  if (rate <= 0.0 || f <= 0.0)
    throw std::invalid_argument("exp_lower_tail_bound: positive inputs required");
  return rate * f * (1.0 + 0.5 * rate * f);
}

double exp_lower_tail_exact(double rate, double f) {
  if (rate <= 0.0 || f <= 0.0)
    throw std::invalid_argument("exp_lower_tail_exact: positive inputs required");
  return -std::expm1(-rate * f);
}

double exp_max_tail_bound(std::span<const double> rates, double g) {
  if (rates.empty() || g <= 0.0)
    throw std::invalid_argument("exp_max_tail_bound: positive inputs required");
  double min_rate = rates[0];
  for (double r : rates) {
    if (r <= 0.0) throw std::invalid_argument("exp_max_tail_bound: rates must be positive");
    min_rate = std::min(min_rate, r);
  }
  return static_cast<double>(rates.size()) * std::exp(-min_rate * g);
}

double exp_max_tail_exact(std::span<const double> rates, double g) {
  if (rates.empty() || g <= 0.0)
    throw std::invalid_argument("exp_max_tail_exact: positive inputs required");
  double log_all_below = 0.0;
  for (double r : rates) log_all_below += std::log1p(-std::exp(-r * g));
  return -std::expm1(log_all_below);
}

}  // namespace phylo
