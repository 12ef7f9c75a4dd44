#include "phylo/divergences.hpp"

#include <cmath>
#include <stdexcept>

namespace phylo {

LeafDistribution leaf_distribution(const RootedView& view,
                                   const MutationModel& model) {
  const int n = view.n_leaves;
  const int h = model.size();
  const double entries = std::pow(static_cast<double>(h), n);
  if (entries > 1e7)
    throw std::domain_error("leaf_distribution: table size guard exceeded");

  LeafDistribution dist;
  dist.n = n;
  dist.h = h;
  dist.p.assign(static_cast<size_t>(entries), 0.0);

  std::vector<uint8_t> pattern(n, 0);
  double total = 0.0;
  for (size_t idx = 0; idx < dist.p.size(); ++idx) {
    size_t rem = idx;
    for (int r = n - 1; r >= 0; --r) {
      pattern[r] = static_cast<uint8_t>(rem % h);
      rem /= h;
    }
    dist.p[idx] = site_likelihood(view, model, pattern);
    total += dist.p[idx];
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw std::runtime_error("leaf_distribution: table does not normalize");
  for (double& v : dist.p) v /= total;
  return dist;
}

LeafDistribution leaf_distribution(const RankedTree& tree,
                                   const MutationModel& model) {
  return leaf_distribution(RootedView::from_ranked(tree), model);
}

LeafDistribution leaf_distribution(const UnrootedTree& tree,
                                   const MutationModel& model) {
  return leaf_distribution(RootedView::from_unrooted(tree, tree.n), model);
}

namespace {

void check_pair(const LeafDistribution& p0, const LeafDistribution& p) {
  if (p0.n != p.n || p0.h != p.h || p0.size() != p.size())
    throw std::invalid_argument("divergence: support mismatch");
}

}  // namespace

double kl_divergence(const LeafDistribution& p0, const LeafDistribution& p) {
  check_pair(p0, p);
  double kl = 0.0;
  for (size_t i = 0; i < p0.size(); ++i) {
    if (p0.p[i] == 0.0) continue;
    if (p.p[i] <= 0.0)
      throw std::invalid_argument("kl_divergence: support mismatch");
    kl += p0.p[i] * std::log(p0.p[i] / p.p[i]);
  }
  return kl;
}

double kl_variation(const LeafDistribution& p0, const LeafDistribution& p) {
  check_pair(p0, p);
  double kl = 0.0, second = 0.0;
  for (size_t i = 0; i < p0.size(); ++i) {
    if (p0.p[i] == 0.0) continue;
    if (p.p[i] <= 0.0)
      throw std::invalid_argument("kl_variation: support mismatch");
    const double lr = std::log(p0.p[i] / p.p[i]);
    kl += p0.p[i] * lr;
    second += p0.p[i] * lr * lr;
  }
  return second - kl * kl;
}

double hellinger_sq(const LeafDistribution& p0, const LeafDistribution& p) {
  check_pair(p0, p);
  double s = 0.0;
  for (size_t i = 0; i < p0.size(); ++i) {
    const double d = std::sqrt(p0.p[i]) - std::sqrt(p.p[i]);
    s += d * d;
  }
  return 0.5 * s;
}

double hellinger(const LeafDistribution& p0, const LeafDistribution& p) {
  return std::sqrt(hellinger_sq(p0, p));
}

double total_variation(const LeafDistribution& p0, const LeafDistribution& p) {
  check_pair(p0, p);
  double s = 0.0;
  for (size_t i = 0; i < p0.size(); ++i) s += std::abs(p0.p[i] - p.p[i]);
  return 0.5 * s;
}

}  // namespace phylo
