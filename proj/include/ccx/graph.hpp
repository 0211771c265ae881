#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ccx/types.hpp"

namespace ccx {

// Directed causal structure over concept names. Must be acyclic for any
// inference to run; `find_cycle_node` reports a witness instead of asserting.
class CausalGraph {
 public:
  CausalGraph() = default;
  CausalGraph(std::vector<std::string> nodes,
              std::vector<std::pair<std::string, std::string>> edges);

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<std::pair<std::string, std::string>>& edges() const { return edges_; }

  bool has_node(const std::string& name) const;
  bool has_edge(const std::string& parent, const std::string& child) const;

  // Parent names of `child`, lexicographically ordered. This order fixes the
  // truth-table key layout and the canonical function indexing everywhere.
  std::vector<std::string> parents_of(const std::string& child) const;
  std::vector<std::string> children_of(const std::string& parent) const;

  // Empty when acyclic, otherwise the name of some node on a cycle.
  std::string find_cycle_node() const;

 private:
  std::vector<std::string> nodes_;
  std::vector<std::pair<std::string, std::string>> edges_;
};

// Deterministic topological order: nodes sorted by (longest-path depth from
// the roots, then name), so independent nodes come out lexicographically.
// Throws QueryError naming a node on the cycle when the graph is cyclic.
std::vector<std::string> topological_order(const CausalGraph& graph);

}  // namespace ccx
