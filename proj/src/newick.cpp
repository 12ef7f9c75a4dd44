#include "phylo/newick.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "phylo/util.hpp"

namespace phylo {

namespace {

struct ParseNode {
  std::string label;
  double length = -1.0;  // to parent; -1 when absent
  std::vector<int> children;
  bool has_length = false;
  int finish = -1;  // completion rank: the order length tokens appear in text
};

struct Parsed {
  std::vector<ParseNode> nodes;
  int root = -1;
};

// Recursive-descent Newick reader; records nodes and, implicitly, the order
// in which branch lengths appear in the text (child completion order).
class Reader {
 public:
  explicit Reader(const std::string& text) : s_(text) {}

  Parsed run() {
    skip_ws();
    Parsed out;
    out.root = node(out);
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != ';')
      throw std::runtime_error("newick: missing terminating ';'");
    return out;
  }

 private:
  int node(Parsed& out) {
    skip_ws();
    const int id = static_cast<int>(out.nodes.size());
    out.nodes.emplace_back();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      while (true) {
        const int child = node(out);
        out.nodes[id].children.push_back(child);
        skip_ws();
        if (pos_ >= s_.size()) throw std::runtime_error("newick: unbalanced '('");
        if (s_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (s_[pos_] == ')') {
          ++pos_;
          break;
        }
        throw std::runtime_error("newick: expected ',' or ')'");
      }
    }
    skip_ws();
    std::string label;
    while (pos_ < s_.size() &&
           std::string("(),:;").find(s_[pos_]) == std::string::npos &&
           !std::isspace(static_cast<unsigned char>(s_[pos_])))
      label += s_[pos_++];
    out.nodes[id].label = label;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ':') {
      ++pos_;
      skip_ws();
      size_t used = 0;
      out.nodes[id].length = std::stod(s_.substr(pos_), &used);
      out.nodes[id].has_length = true;
      pos_ += used;
    }
    out.nodes[id].finish = finish_++;
    return id;
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  const std::string& s_;
  size_t pos_ = 0;
  int finish_ = 0;
};

}  // namespace

// ------------------------------------------------------------- ranked trees

std::string to_newick(const RankedTree& tree) {
  tree.validate();
  const int n = tree.n;
  std::vector<double> height(tree.node_count(), 0.0);
  std::vector<std::string> text(tree.node_count());
  for (int i = 0; i < n; ++i) text[i] = tree.leaf_labels[i];
  for (int e = 0; e < n - 1; ++e) {
    height[n + e] = tree.height_of_event(e);
    const auto [a, b] = tree.mergers[e];
    text[n + e] = "(" + text[a] + ":" + format_double(height[n + e] - height[a]) +
                  "," + text[b] + ":" + format_double(height[n + e] - height[b]) +
                  ")";
  }
  return text[tree.root()] + ";";
}

RankedTree parse_ranked_newick(const std::string& s) {
  Parsed p = Reader(s).run();
  for (int i = 0; i < static_cast<int>(p.nodes.size()); ++i) {
    const auto& nd = p.nodes[i];
    if (!nd.children.empty() && nd.children.size() != 2)
      throw std::runtime_error("ranked newick: tree must be strictly binary");
    if (i != p.root && !nd.has_length)
      throw std::runtime_error("ranked newick: every branch needs a length");
    if (nd.children.empty() && nd.label.empty())
      throw std::runtime_error("ranked newick: unlabeled leaf");
  }

  // Depths from the root, then heights above the leaf level.
  std::vector<double> depth(p.nodes.size(), 0.0);
  std::vector<int> order;  // preorder
  order.push_back(p.root);
  for (size_t i = 0; i < order.size(); ++i)
    for (int c : p.nodes[order[i]].children) {
      depth[c] = depth[order[i]] + p.nodes[c].length;
      order.push_back(c);
    }

  std::vector<int> leaves, internals;
  for (int i = 0; i < static_cast<int>(p.nodes.size()); ++i)
    (p.nodes[i].children.empty() ? leaves : internals).push_back(i);
  const int n = static_cast<int>(leaves.size());
  if (n < 2) throw std::runtime_error("ranked newick: need at least two leaves");

  double max_depth = 0.0, min_depth = 0.0;
  for (size_t i = 0; i < leaves.size(); ++i) {
    const double d = depth[leaves[i]];
    if (i == 0) max_depth = min_depth = d;
    max_depth = std::max(max_depth, d);
    min_depth = std::min(min_depth, d);
  }
  if (max_depth - min_depth > 1e-9 * std::max(1.0, max_depth))
    throw std::runtime_error("ranked newick: tree is not ultrametric");

  std::vector<double> height(p.nodes.size());
  for (size_t i = 0; i < p.nodes.size(); ++i) height[i] = max_depth - depth[i];

  std::sort(internals.begin(), internals.end(),
            [&](int a, int b) { return height[a] < height[b]; });
  for (size_t e = 1; e < internals.size(); ++e)
    if (height[internals[e]] - height[internals[e - 1]] <=
        1e-12 * std::max(1.0, max_depth))
      throw std::runtime_error("ranked newick: tied internal node times");

  // Leaf ids follow label order.
  std::vector<std::string> labels;
  for (int leaf : leaves) labels.push_back(p.nodes[leaf].label);
  const auto ord = label_order(labels);

  RankedTree tree;
  tree.n = n;
  tree.leaf_labels.resize(n);
  std::vector<int> lineage(p.nodes.size(), -1);
  for (int r = 0; r < n; ++r) {
    tree.leaf_labels[r] = labels[ord[r]];
    lineage[leaves[ord[r]]] = r;
  }
  double prev = 0.0;
  for (int e = 0; e < n - 1; ++e) {
    const int nd = internals[e];
    tree.holding_times.insert(tree.holding_times.begin(), height[nd] - prev);
    prev = height[nd];
    int a = lineage[p.nodes[nd].children[0]];
    int b = lineage[p.nodes[nd].children[1]];
    if (a > b) std::swap(a, b);
    tree.mergers.emplace_back(a, b);
    lineage[nd] = n + e;
  }
  tree.validate();
  return tree;
}

// ------------------------------------------------------------ unrooted trees

std::string to_newick(const UnrootedTree& tree) {
  tree.validate();
  const auto inc = tree.incident_edges();
  const int start = tree.n;  // first internal node

  auto desc = [&](auto&& self, int v, int from_edge) -> std::string {
    if (v < tree.n) return tree.leaf_labels[v];
    std::string s = "(";
    bool first = true;
    for (int ei : inc[v]) {
      if (ei == from_edge) continue;
      const auto& e = tree.edges[ei];
      const int w = e.u == v ? e.v : e.u;
      if (!first) s += ",";
      first = false;
      s += self(self, w, ei) + ":" + format_double(e.length);
    }
    return s + ")";
  };
  return desc(desc, start, -1) + ";";
}

std::string unrooted_sidecar_json(const UnrootedTree& tree) {
  tree.validate();
  nlohmann::json j;
  j["n"] = tree.n;
  j["leaf_labels"] = tree.leaf_labels;
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& e : tree.edges) edges.push_back({e.u, e.v, e.length});
  return j.dump(2);
}

UnrootedTree parse_unrooted_sidecar(const std::string& sidecar_json) {
  const auto j = nlohmann::json::parse(sidecar_json);
  UnrootedTree tree;
  tree.n = j.at("n").get<int>();
  tree.leaf_labels = j.at("leaf_labels").get<std::vector<std::string>>();
  for (const auto& e : j.at("edges"))
    tree.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(),
                          e.at(2).get<double>()});
  tree.validate();
  return tree;
}

UnrootedTree parse_unrooted_newick(const std::string& s) {
  Parsed p = Reader(s).run();
  if (p.nodes[p.root].children.size() != 3)
    throw std::runtime_error("unrooted newick: expected a trifurcating root");
  for (int i = 0; i < static_cast<int>(p.nodes.size()); ++i) {
    const auto& nd = p.nodes[i];
    if (i != p.root && !nd.children.empty() && nd.children.size() != 2)
      throw std::runtime_error("unrooted newick: internal nodes must be binary");
    if (i != p.root && !nd.has_length)
      throw std::runtime_error("unrooted newick: every branch needs a length");
  }

  std::vector<int> leaves, internals;
  for (int i = 0; i < static_cast<int>(p.nodes.size()); ++i)
    (p.nodes[i].children.empty() ? leaves : internals).push_back(i);
  const int n = static_cast<int>(leaves.size());

  std::vector<std::string> labels;
  for (int leaf : leaves) labels.push_back(p.nodes[leaf].label);
  const auto ord = label_order(labels);

  UnrootedTree tree;
  tree.n = n;
  tree.leaf_labels.resize(n);
  std::vector<int> id(p.nodes.size(), -1);
  for (int r = 0; r < n; ++r) {
    tree.leaf_labels[r] = labels[ord[r]];
    id[leaves[ord[r]]] = r;
  }
  // Internal ids in preorder; edge indices in the order lengths appear in the
  // text, i.e. child-completion order within the reader's node numbering.
  int next_internal = n;
  std::vector<int> pre = {p.root};
  for (size_t i = 0; i < pre.size(); ++i) {
    const int v = pre[i];
    if (!p.nodes[v].children.empty()) id[v] = next_internal++;
    for (int c : p.nodes[v].children) pre.push_back(c);
  }
  std::vector<std::pair<int, int>> by_finish;  // (completion rank, parent)
  std::vector<int> child_of(p.nodes.size(), -1);
  for (int v = 0; v < static_cast<int>(p.nodes.size()); ++v)
    for (int c : p.nodes[v].children) {
      by_finish.emplace_back(p.nodes[c].finish, v);
      child_of[p.nodes[c].finish] = c;
    }
  std::sort(by_finish.begin(), by_finish.end());
  for (const auto& [fin, v] : by_finish) {
    const int c = child_of[fin];
    tree.edges.push_back({id[v], id[c], p.nodes[c].length});
  }
  tree.validate();
  return tree;
}

std::string nexus_trees_block(
    const std::vector<std::pair<std::string, std::string>>& named_newicks) {
  std::string out = "#NEXUS\nBEGIN TREES;\n";
  for (const auto& [name, newick] : named_newicks)
    out += "  TREE " + name + " = " + newick + "\n";
  out += "END;\n";
  return out;
}

}  // namespace phylo
