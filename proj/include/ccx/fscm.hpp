#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ccx/graph.hpp"
#include "ccx/types.hpp"

namespace ccx {

// Deterministic structural mechanism for one child: entry u is a total map
// from parent assignments (mixed-radix rank, lexicographic parent-name order,
// first parent most significant) to a child value code. Roots hold constant
// functions with a single entry each.
struct StructuralFunctionTable {
  std::string child;
  std::vector<std::string> parents;         // lexicographically ordered names
  std::vector<std::vector<int>> functions;  // functions[u][pa_rank] = child code
};

// Distribution over the function indices of one family.
struct ExogenousDistribution {
  std::string variable;
  std::vector<double> probabilities;
};

// Fully specified Markovian SCM over a discrete concept vocabulary. One
// family and one exogenous distribution per node, exogenous variables
// mutually independent by construction. Plain data; run `validate` before
// inference (query entry points do so and throw SpecError on violations).
struct Fscm {
  Vocabulary vocab;
  CausalGraph graph;
  std::vector<StructuralFunctionTable> families;   // aligned with vocab order
  std::vector<ExogenousDistribution> exogenous;    // aligned with vocab order
};

struct ValidationIssue {
  std::string code;  // "cycle", "missing-family", "weight-sum", "domain-mismatch", ...
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Report-style structural check: cycles, missing or malformed families,
// weight-sum errors, domain mismatches, duplicate functions.
ValidationReport validate(const Fscm& model);

// Per-node posterior over function indices given a total observation.
struct Abduction {
  std::vector<std::vector<double>> posteriors;  // aligned with vocab order
};

// Distribution over joint assignments of a queried node subset.
struct DiscreteDistribution {
  std::vector<int> nodes;             // queried node indices, ascending
  std::vector<int> cards;             // domain sizes of `nodes`
  std::vector<double> probabilities;  // by mixed-radix rank over node domains

  // `values` aligned with `nodes`.
  double probability_of(const std::vector<int>& values) const {
    return probabilities.at(mixed_radix_rank(values, cards));
  }
};

using EventPredicate = std::function<bool(const Assignment&)>;

// Compiled structural view of an Fscm. Holds a pointer to the model;
// exogenous weights are read live, so a bounds sweep can rewrite weights
// between queries without re-indexing. Everything else must stay untouched.
class ScmIndex {
 public:
  explicit ScmIndex(const Fscm& model);

  const Fscm& model() const { return *model_; }
  int node_count() const { return n_; }
  const std::vector<int>& topo_order() const { return topo_; }
  const std::vector<int>& parents(int node) const { return parents_[node]; }
  std::size_t parent_space(int node) const { return pa_space_[node]; }

  // Rank of the parent assignment read out of a (possibly partial) assignment;
  // all parents of `node` must be set.
  std::size_t parent_rank(int node, const Assignment& values) const;

  // Nodes reachable from the intervened set via >= 1 edge, minus the set itself.
  std::vector<char> descendant_mask(const Assignment& intervened) const;

  // --- inference ---------------------------------------------------------

  // Unique endogenous assignment for one exogenous index per node; intervened
  // nodes take their intervention value ignoring parents.
  Assignment evaluate(const std::vector<int>& function_indices,
                      const Assignment* intervention = nullptr) const;

  // Probability of a total assignment (product of per-node consistent weight
  // sums; Markovian factorization).
  double joint_probability(const Assignment& total) const;

  // Posterior over function indices per node given a total observation.
  // Throws QueryError("impossible evidence") when the observation has zero
  // probability.
  Abduction abduct(const Assignment& observed) const;

  // Abduction-action-prediction: probability that the counterfactual world
  // under `intervention`, given the total `observed` evidence, satisfies
  // `event`. Enumerates the descendant value space (capped).
  double counterfactual(const Assignment& observed, const Assignment& intervention,
                        const EventPredicate& event) const;

  // Counterfactual joint over the descendant set; shared by the explanation
  // engine. Returned distribution is over descendant nodes ascending.
  DiscreteDistribution counterfactual_descendants(const Abduction& abduction,
                                                  const Assignment& observed,
                                                  const Assignment& intervention) const;

  // Truncated-factorization interventional distribution over `query_nodes`
  // given a partial condition restricted to non-descendants of the intervened
  // set. Conditioning on a descendant throws
  // QueryError("counterfactual query required ...").
  DiscreteDistribution interventional(const Assignment& intervention,
                                      const Assignment& condition,
                                      const std::vector<int>& query_nodes) const;

  // i.i.d. endogenous samples, deterministic for a fixed seed.
  std::vector<Assignment> sample(std::uint64_t seed, int n) const;
  Assignment sample_one(SplitRng& rng) const;

  // Weight of functions mapping parent rank -> value under distribution `w`.
  double consistent_mass(int node, std::size_t pa_rank, int value,
                         const std::vector<double>& w) const;

  std::size_t descendant_enumeration_cap = std::size_t{1} << 20;

 private:
  const Fscm* model_;
  int n_ = 0;
  std::vector<int> topo_;
  std::vector<std::vector<int>> parents_;    // parent node indices, lex-name order
  std::vector<std::vector<int>> children_;
  std::vector<std::size_t> pa_space_;
};

// Spec-level convenience wrappers (build the index per call).
Assignment evaluate(const Fscm& model, const std::vector<int>& function_indices,
                    const Assignment* intervention = nullptr);
double joint_probability(const Fscm& model, const Assignment& total);
Abduction abduct(const Fscm& model, const Assignment& observed);
double counterfactual(const Fscm& model, const Assignment& observed,
                      const Assignment& intervention, const EventPredicate& event);
DiscreteDistribution interventional(const Fscm& model, const Assignment& intervention,
                                    const Assignment& condition,
                                    const std::vector<int>& query_nodes);
std::vector<Assignment> sample(const Fscm& model, std::uint64_t seed, int n);

}  // namespace ccx
