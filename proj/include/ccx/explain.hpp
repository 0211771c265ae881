#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ccx/credal.hpp"
#include "ccx/world.hpp"

namespace ccx {

// The three framework components: a causal model over the vocabulary (fully
// specified, or partially specified with conditionals), the concept-to-data
// map, and the black-box classifier under explanation.
struct ModelBundle {
  std::shared_ptr<const Fscm> fscm;  // point mode when set
  std::shared_ptr<const Pscm> pscm;  // interval mode when set
  Conditionals conditionals;         // interval mode only
  SyntheticTabularMap map;
  std::shared_ptr<const BlackBoxClassifier> classifier;
  CredalOptions credal_options;

  bool interval_mode() const { return pscm != nullptr; }
  const Vocabulary& vocab() const { return map.vocab(); }
};

// Subgroup context: shared concept values plus an optional shared prediction.
struct SubgroupContext {
  Assignment z_s;
  std::optional<int> yhat;
};

struct PsDiagnostics {
  std::vector<std::string> descendants;  // marginalized concepts, by name
  std::size_t descendant_space = 0;      // |Ω_z̄̄|
  std::size_t terms_evaluated = 0;
  std::size_t member_count = 0;  // subgroup queries only
  BoundsDiagnostics bounds;      // interval mode only
};

struct PsResult {
  bool is_interval = false;
  double value = 0.0;
  Interval interval;
  PsDiagnostics diagnostics;

  double point() const { return value; }
};

// Local probability of sufficiency: the counterfactual probability that the
// prediction would have been `target` under the intervention, given the
// observed instance. Descendants of the intervened set are marginalized
// exactly; non-descendants and w stay at their observed values.
PsResult local_ps(const ModelBundle& bundle, const Instance& instance,
                  const Assignment& intervention, int target);

// Full counterfactual outcome distribution over the classifier's output
// domain for a local context (point mode only).
std::vector<double> local_outcome_distribution(const ModelBundle& bundle, const Instance& instance,
                                               const Assignment& intervention);

// Empirical subgroup sufficiency: plain mean of member-wise local values in
// dataset order (fixed summation order, bit-stable). Reports the member count.
PsResult subgroup_ps(const ModelBundle& bundle, const Dataset& dataset,
                     const SubgroupContext& subgroup, const Assignment& intervention, int target);

// p(ŷ = target | do(z̄ = z̄')): truncated factorization with z and w
// marginalized by exact enumeration. Needs no context.
PsResult global_interventional(const ModelBundle& bundle, const Assignment& intervention,
                               int target);

// Interventional baseline for a local context: descendants of the intervened
// set are resampled from their prior conditionals (observed descendant values
// discarded), non-descendants conditioned at their observed values.
PsResult cbn_interventional(const ModelBundle& bundle, const Assignment& intervention,
                            const Assignment& condition, const std::vector<int>& w_context,
                            int target);
// Convenience wrapper conditioning on every observed non-descendant.
PsResult cbn_local(const ModelBundle& bundle, const Instance& instance,
                   const Assignment& intervention, int target);

// Baseline treating all concepts as independent: no descendants, every
// non-intervened concept frozen at its observed value. Deterministic 0/1
// for a local context, a mean of indicators for a subgroup.
PsResult independence_ps(const ModelBundle& bundle, const Instance& instance,
                         const Assignment& intervention, int target);
PsResult independence_ps_subgroup(const ModelBundle& bundle, const Dataset& dataset,
                                  const SubgroupContext& subgroup, const Assignment& intervention,
                                  int target);

struct AttributionRow {
  std::string concept;
  std::string value;  // intervened value label
  PsResult result;
  std::size_t member_count = 0;
};

struct AttributionReport {
  std::vector<AttributionRow> rows;  // sorted by descending sufficiency
};

// Candidate (concept, value) pair by name; empty list means every
// non-observed value of every concept.
struct AttributionCandidate {
  std::string concept;
  std::string value;
};

// Sufficiency of each singleton intervention. Local context: the instance's
// own non-observed values. Subgroup context: members whose observed value
// differs from the candidate (plus the base subgroup filter).
AttributionReport singleton_attributions(const ModelBundle& bundle, const Instance& instance,
                                         int target,
                                         const std::vector<AttributionCandidate>& candidates = {});
AttributionReport singleton_attributions(const ModelBundle& bundle, const Dataset& dataset,
                                         const SubgroupContext& subgroup, int target,
                                         const std::vector<AttributionCandidate>& candidates = {});

struct ContrastiveExplanation {
  Assignment intervention;
  double p = 0.0;
  int cardinality = 0;
};

// Exhaustive search over interventions with |z̄| <= max_cardinality and
// per-variable values differing from the observed ones; keeps those with
// local sufficiency >= p_threshold, ranked by (cardinality ascending,
// p descending, lexicographic intervention).
std::vector<ContrastiveExplanation> contrastive_search(const ModelBundle& bundle,
                                                       const Instance& instance, int target,
                                                       double p_threshold, int max_cardinality);

// Deterministic ranking key shared with the oracle.
std::string intervention_key(const Vocabulary& vocab, const Assignment& intervention);

}  // namespace ccx
