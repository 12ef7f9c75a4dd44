#include "phylo/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "phylo/sites.hpp"
#include "phylo/util.hpp"

namespace phylo {

namespace {

std::vector<int> make_postorder(const std::vector<std::vector<int>>& children,
                                int root) {
  std::vector<int> order, stack = {root};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (int c : children[v]) stack.push_back(c);
  }
  std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace

RootedView RootedView::from_ranked(const RankedTree& tree) {
  tree.validate();
  const int n = tree.n;
  RootedView view;
  view.n_nodes = tree.node_count();
  view.n_leaves = n;
  view.root = tree.root();
  view.parent.assign(view.n_nodes, -1);
  view.parent_length.assign(view.n_nodes, 0.0);
  view.children.assign(view.n_nodes, {});
  view.row_of_leaf.assign(view.n_nodes, -1);

  for (const auto& b : branch_map(tree)) {
    view.parent[b.v] = b.u;
    view.parent_length[b.v] = b.length;
    view.children[b.u].push_back(b.v);
  }
  const auto order = label_order(tree.leaf_labels);
  for (int r = 0; r < n; ++r) view.row_of_leaf[order[r]] = r;
  view.postorder = make_postorder(view.children, view.root);
  return view;
}

RootedView RootedView::from_unrooted(const UnrootedTree& tree, int root_node) {
  tree.validate();
  if (root_node < tree.n || root_node >= tree.node_count())
    throw std::invalid_argument("RootedView: root must be an internal node");
  RootedView view;
  view.n_nodes = tree.node_count();
  view.n_leaves = tree.n;
  view.root = root_node;
  view.parent.assign(view.n_nodes, -1);
  view.parent_length.assign(view.n_nodes, 0.0);
  view.children.assign(view.n_nodes, {});
  view.row_of_leaf.assign(view.n_nodes, -1);

  const auto inc = tree.incident_edges();
  std::vector<int> stack = {root_node};
  std::vector<bool> seen(view.n_nodes, false);
  seen[root_node] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int ei : inc[v]) {
      const auto& e = tree.edges[ei];
      const int w = e.u == v ? e.v : e.u;
      if (seen[w]) continue;
      seen[w] = true;
      view.parent[w] = v;
      view.parent_length[w] = e.length;
      view.children[v].push_back(w);
      stack.push_back(w);
    }
  }
  const auto order = label_order(tree.leaf_labels);
  for (int r = 0; r < tree.n; ++r) view.row_of_leaf[order[r]] = r;
  view.postorder = make_postorder(view.children, view.root);
  return view;
}

RootedView RootedView::from_parents(std::vector<int> parent,
                                    std::vector<double> parent_length,
                                    int n_leaves) {
  RootedView view;
  view.n_nodes = static_cast<int>(parent.size());
  view.n_leaves = n_leaves;
  view.parent = std::move(parent);
  view.parent_length = std::move(parent_length);
  view.children.assign(view.n_nodes, {});
  view.row_of_leaf.assign(view.n_nodes, -1);
  for (int v = 0; v < view.n_nodes; ++v) {
    if (view.parent[v] < 0)
      view.root = v;
    else
      view.children[view.parent[v]].push_back(v);
  }
  for (int r = 0; r < n_leaves; ++r) view.row_of_leaf[r] = r;
  view.postorder = make_postorder(view.children, view.root);
  return view;
}

const Eigen::MatrixXd& TransitionCache::at(double t) {
  uint64_t key;
  std::memcpy(&key, &t, sizeof key);
  auto it = cache_.find(key);
  if (it == cache_.end()) it = cache_.emplace(key, model_->transition(t)).first;
  return it->second;
}

namespace {

// Postorder partial-likelihood sweep returning log P(pattern).  `partial` is
// caller-provided scratch of size n_nodes * |H|.
double pruning_log(const RootedView& view, const MutationModel& model,
                   std::span<const uint8_t> pattern, TransitionCache& cache,
                   std::vector<double>& partial) {
  const int h = model.size();
  if (static_cast<int>(pattern.size()) != view.n_leaves)
    throw std::invalid_argument("site_likelihood: pattern length mismatch");
  for (uint8_t a : pattern)
    if (a >= h) throw std::invalid_argument("site_likelihood: allele out of range");
  partial.assign(static_cast<size_t>(view.n_nodes) * h, 0.0);

  double log_scale = 0.0;
  for (int v : view.postorder) {
    double* pv = &partial[static_cast<size_t>(v) * h];
    if (view.children[v].empty()) {
      pv[pattern[view.row_of_leaf[v]]] = 1.0;
      continue;
    }
    for (int a = 0; a < h; ++a) pv[a] = 1.0;
    for (int c : view.children[v]) {
      const Eigen::MatrixXd& p = cache.at(view.parent_length[c]);
      const double* pc = &partial[static_cast<size_t>(c) * h];
      for (int a = 0; a < h; ++a) {
        double s = 0.0;
        for (int b = 0; b < h; ++b) s += p(a, b) * pc[b];
        pv[a] *= s;
      }
    }
    double mx = 0.0;
    for (int a = 0; a < h; ++a) mx = std::max(mx, pv[a]);
    if (mx > 0.0 && mx < 1e-256) {
      for (int a = 0; a < h; ++a) pv[a] /= mx;
      log_scale += std::log(mx);
    }
  }
  double value = 0.0;
  const double* pr = &partial[static_cast<size_t>(view.root) * h];
  for (int a = 0; a < h; ++a) value += model.root_dist()(a) * pr[a];
  if (value <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(value) + log_scale;
}

}  // namespace

double site_likelihood(const RootedView& view, const MutationModel& model,
                       std::span<const uint8_t> pattern) {
  TransitionCache cache(model);
  std::vector<double> scratch;
  return std::exp(pruning_log(view, model, pattern, cache, scratch));
}

double site_likelihood_brute_force(const RootedView& view,
                                   const MutationModel& model,
                                   std::span<const uint8_t> pattern) {
  const int h = model.size();
  if (static_cast<int>(pattern.size()) != view.n_leaves)
    throw std::invalid_argument("brute force: pattern length mismatch");
  std::vector<int> internals;
  for (int v = 0; v < view.n_nodes; ++v)
    if (!view.children[v].empty()) internals.push_back(v);

  double terms = std::pow(static_cast<double>(h),
                          static_cast<double>(internals.size()));
  if (terms > 1e7)
    throw std::domain_error("brute force: enumeration guard exceeded");

  TransitionCache cache(model);
  std::vector<int> state(view.n_nodes, 0);
  for (int v = 0; v < view.n_nodes; ++v)
    if (view.children[v].empty()) state[v] = pattern[view.row_of_leaf[v]];

  std::vector<int> assign(internals.size(), 0);
  double total = 0.0;
  while (true) {
    for (size_t i = 0; i < internals.size(); ++i) state[internals[i]] = assign[i];
    double term = model.root_dist()(state[view.root]);
    for (int v = 0; v < view.n_nodes && term > 0.0; ++v) {
      if (view.parent[v] < 0) continue;
      term *= cache.at(view.parent_length[v])(state[view.parent[v]], state[v]);
    }
    total += term;
    size_t i = 0;
    for (; i < assign.size(); ++i) {
      if (++assign[i] < h) break;
      assign[i] = 0;
    }
    if (i == assign.size()) break;
  }
  return total;
}

double log_likelihood(const RootedView& view, const MutationModel& model,
                      const SiteMatrix& data) {
  LikelihoodEvaluator eval(model, data);
  return eval.eval(view);
}

double root_invariance_max_deviation(const UnrootedTree& tree,
                                     const MutationModel& model,
                                     std::span<const uint8_t> pattern) {
  if (!model.reversible())
    throw std::invalid_argument(
        "root_invariance: requires a reversible model");
  std::vector<double> values;
  for (int v = tree.n; v < tree.node_count(); ++v) {
    const auto view = RootedView::from_unrooted(tree, v);
    values.push_back(site_likelihood(view, model, pattern));
  }
  double dev = 0.0;
  for (double a : values)
    for (double b : values) dev = std::max(dev, std::abs(a - b));
  return dev;
}

LikelihoodEvaluator::LikelihoodEvaluator(const MutationModel& model,
                                         const SiteMatrix& data)
    : model_(&model), cache_(model) {
  const int n = data.rows();
  // Column compression: identical site patterns are evaluated once.
  std::unordered_map<std::string, size_t> index;
  for (int s = 0; s < data.k; ++s) {
    std::string col(n, '\0');
    for (int r = 0; r < n; ++r) col[r] = static_cast<char>(data.at(r, s));
    auto [it, inserted] = index.emplace(col, patterns_.size());
    if (inserted) {
      patterns_.emplace_back(col.begin(), col.end());
      weights_.push_back(0.0);
    }
    weights_[it->second] += 1.0;
  }
}

double LikelihoodEvaluator::eval(const RootedView& view) {
  cache_.clear();
  double total = 0.0;
  for (size_t i = 0; i < patterns_.size(); ++i)
    total += weights_[i] * pruning_log(view, *model_, patterns_[i], cache_, partial_);
  return total;
}

double LikelihoodEvaluator::operator()(const RankedTree& tree) {
  return eval(RootedView::from_ranked(tree));
}

double LikelihoodEvaluator::operator()(const UnrootedTree& tree) {
  return eval(RootedView::from_unrooted(tree, tree.n));
}

}  // namespace phylo
