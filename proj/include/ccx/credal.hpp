#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ccx/fscm.hpp"

namespace ccx {

// Allowed deterministic mechanisms for one child, a subset of the canonical
// set of all functions from parent assignments to child values.
struct FunctionFamily {
  std::string child;
  std::vector<std::string> parents;
  std::vector<std::vector<int>> allowed;  // same layout as StructuralFunctionTable
};

// Partially specified SCM: families without exogenous distributions.
struct Pscm {
  Vocabulary vocab;
  CausalGraph graph;
  std::vector<FunctionFamily> families;  // aligned with vocab order
};

// Per-node conditional tables p(child | parents). A column may be absent
// (e.g. a parent configuration never observed), in which case it contributes
// no constraints.
struct NodeConditional {
  // columns[pa_rank] = distribution over the child domain, or nullopt.
  std::vector<std::optional<std::vector<double>>> columns;
};

struct Conditionals {
  std::vector<NodeConditional> nodes;  // aligned with vocab order
};

// Linear description of the credal set K(u): equality rows with 0/1
// coefficients (one per constrained (pa, child-value) pair, last value of each
// column dropped as redundant) plus the probability simplex.
struct CredalPolytope {
  std::string variable;
  std::size_t dimension = 0;                  // number of allowed functions
  std::vector<std::vector<double>> rows;      // equality coefficients
  std::vector<double> rhs;
};

struct VertexSet {
  std::string variable;
  std::vector<std::vector<double>> vertices;
};

struct CredalOptions {
  std::size_t max_canonical_functions = std::size_t{1} << 20;
  // Cap on basis subsets tried during vertex enumeration.
  std::size_t max_basis_combinations = 5'000'000;
  // Exhaustive bound search runs when the vertex-product count stays within
  // this budget; beyond it the interval is sampled (exact = false).
  std::size_t max_exact_products = 1'000'000;
  std::size_t sample_count = 20'000;
  std::uint64_t sample_seed = 0;
};

// All |Ω_child|^(#parent assignments) functions in canonical index order: the
// value tuple over lexicographic parent assignments read as a mixed-radix
// number, first assignment most significant.
FunctionFamily canonical_family(const std::string& child, const std::vector<std::string>& parents,
                                int child_card, const std::vector<int>& parent_cards,
                                const CredalOptions& options = {});

// Builds a Pscm whose every family is canonical for the given graph.
Pscm canonical_pscm(const Vocabulary& vocab, const CausalGraph& graph,
                    const CredalOptions& options = {});

// p(child = v | pa) = sum of weights of functions mapping pa to v.
NodeConditional induced_conditional(const FunctionFamily& family, const std::vector<double>& weights,
                                    int child_card);
// All-columns-constrained conditionals induced by an FSCM's own weights.
Conditionals induced_conditionals(const Fscm& model);

// Maximum-likelihood conditional counts from concept rows (coded, vocabulary
// order). Unseen parent configurations yield absent columns; optional
// add-one smoothing fills every column instead.
Conditionals empirical_conditionals(const Pscm& pscm, const std::vector<Assignment>& rows,
                                    bool add_one_smoothing = false);

// Equality system tying family weights to an empirical conditional. Throws
// QueryError("family inconsistent with data...") when no weight vector can
// reproduce the conditional.
CredalPolytope credal_constraints(const FunctionFamily& family, const NodeConditional& conditional,
                                  int child_card);

// Complete vertex enumeration by basic-feasible-solution sweep over the
// equality system intersected with the simplex.
VertexSet enumerate_vertices(const CredalPolytope& polytope, const CredalOptions& options = {});

// Any probability-valued query evaluated against a fully specified model.
using FscmQuery = std::function<double(const Fscm&)>;

struct BoundsDiagnostics {
  std::size_t vertex_products = 0;
  std::size_t evaluations = 0;
  std::size_t skipped_impossible = 0;
  std::vector<std::size_t> vertices_per_node;
};

// Min and max of `query` over the Cartesian product of per-node credal
// vertex sets. Multilinear queries (all counterfactual and sufficiency
// queries with fully constrained conditionals) attain their extrema at
// vertex products, so the exhaustive sweep is exact.
Interval counterfactual_bounds(const Pscm& pscm, const Conditionals& conditionals,
                               const FscmQuery& query, const CredalOptions& options = {},
                               BoundsDiagnostics* diagnostics = nullptr);

// The unique FSCM consistent with the conditionals. Refuses underdetermined
// inputs: a polytope with more than one vertex raises QueryError
// ("underdetermined: N vertices ...") naming two witnesses.
Fscm unique_fscm(const Pscm& pscm, const Conditionals& conditionals,
                 const CredalOptions& options = {});

// Per-node vertex sets for the model (shared by bounds and unique_fscm).
std::vector<VertexSet> credal_vertex_sets(const Pscm& pscm, const Conditionals& conditionals,
                                          const CredalOptions& options = {});

}  // namespace ccx
