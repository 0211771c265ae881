#include "ccx/graph.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace ccx {

CausalGraph::CausalGraph(std::vector<std::string> nodes,
                         std::vector<std::pair<std::string, std::string>> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {}

bool CausalGraph::has_node(const std::string& name) const {
  return std::find(nodes_.begin(), nodes_.end(), name) != nodes_.end();
}

bool CausalGraph::has_edge(const std::string& parent, const std::string& child) const {
  return std::find(edges_.begin(), edges_.end(), std::make_pair(parent, child)) != edges_.end();
}

std::vector<std::string> CausalGraph::parents_of(const std::string& child) const {
  std::vector<std::string> out;
  for (const auto& [p, c] : edges_)
    if (c == child) out.push_back(p);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> CausalGraph::children_of(const std::string& parent) const {
  std::vector<std::string> out;
  for (const auto& [p, c] : edges_)
    if (p == parent) out.push_back(c);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string CausalGraph::find_cycle_node() const {
  // Kahn peeling; any node left unpeeled sits on or behind a cycle, the
  // lexicographically smallest leftover with all-leftover ancestry is reported.
  std::map<std::string, int> indegree;
  for (const auto& n : nodes_) indegree[n] = 0;
  for (const auto& [p, c] : edges_) {
    if (indegree.count(p) && indegree.count(c)) indegree[c]++;
  }
  std::set<std::string> ready;
  for (const auto& [n, d] : indegree)
    if (d == 0) ready.insert(n);
  std::size_t peeled = 0;
  while (!ready.empty()) {
    std::string n = *ready.begin();
    ready.erase(ready.begin());
    ++peeled;
    for (const auto& [p, c] : edges_) {
      if (p == n && indegree.count(c) && --indegree[c] == 0) ready.insert(c);
    }
  }
  if (peeled == nodes_.size()) return {};
  for (const auto& [n, d] : indegree)
    if (d > 0) return n;
  return {};
}

std::vector<std::string> topological_order(const CausalGraph& graph) {
  std::string cyclic = graph.find_cycle_node();
  if (!cyclic.empty()) throw QueryError("graph has a cycle through node '" + cyclic + "'");

  // depth = longest path from any root; parents always end up strictly above.
  std::map<std::string, int> depth;
  std::vector<std::string> order = graph.nodes();
  std::sort(order.begin(), order.end());
  bool changed = true;
  for (const auto& n : order) depth[n] = 0;
  while (changed) {
    changed = false;
    for (const auto& [p, c] : graph.edges()) {
      if (!depth.count(p) || !depth.count(c)) continue;
      if (depth[c] < depth[p] + 1) {
        depth[c] = depth[p] + 1;
        changed = true;
      }
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](const std::string& a, const std::string& b) { return depth[a] < depth[b]; });
  return order;
}

}  // namespace ccx
