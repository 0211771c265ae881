#include "ccx/explain.hpp"

#include <algorithm>
#include <cmath>

namespace ccx {

namespace {

void check_intervention(const Vocabulary& vocab, const Assignment& intervention) {
  if (static_cast<int>(intervention.size()) != vocab.size())
    throw QueryError("intervention is not aligned with the vocabulary");
  int count = 0;
  for (int i = 0; i < vocab.size(); ++i) {
    if (intervention[i] == kUnset) continue;
    ++count;
    if (intervention[i] < 0 || intervention[i] >= vocab.cardinality(i))
      throw QueryError("intervention value out of domain for '" + vocab.concept(i).name + "'");
  }
  if (count == 0) throw QueryError("intervention must be non-empty");
}

void check_target(const BlackBoxClassifier& classifier, int target) {
  if (target < 0 || target >= static_cast<int>(classifier.output_domain().size()))
    throw QueryError("target label is outside the classifier output domain");
}

// Eq.-style local counterfactual: marginalize the intervened set's
// descendants under the abduction posterior, push every completion through
// h ∘ α with the instance's w held fixed, and read off the outcome mass.
std::vector<double> outcome_distribution(const Fscm& model, const SyntheticTabularMap& map,
                                         const BlackBoxClassifier& classifier,
                                         const Instance& instance, const Assignment& intervention,
                                         PsDiagnostics* diag) {
  ScmIndex index(model);
  Abduction abduction = index.abduct(instance.z);
  DiscreteDistribution desc = index.counterfactual_descendants(abduction, instance.z, intervention);

  Assignment world(instance.z.size(), kUnset);
  for (std::size_t i = 0; i < instance.z.size(); ++i)
    world[i] = intervention[i] != kUnset ? intervention[i] : instance.z[i];

  std::vector<double> outcome(classifier.output_domain().size(), 0.0);
  for (std::size_t rank = 0; rank < desc.probabilities.size(); ++rank) {
    std::vector<int> values = mixed_radix_unrank(rank, desc.cards);
    for (std::size_t k = 0; k < desc.nodes.size(); ++k) world[desc.nodes[k]] = values[k];
    const double p = desc.probabilities[rank];
    if (p == 0.0) continue;
    outcome[classifier.classify(map.decode(world, instance.w))] += p;
  }
  if (diag) {
    diag->descendants.clear();
    for (int node : desc.nodes) diag->descendants.push_back(model.vocab.concept(node).name);
    diag->descendant_space = desc.probabilities.size();
    diag->terms_evaluated = desc.probabilities.size();
  }
  return outcome;
}

// Runs `query` on the point model, or bounds it over the credal members.
PsResult evaluate(const ModelBundle& bundle, const FscmQuery& query, PsDiagnostics diag = {}) {
  PsResult result;
  result.diagnostics = std::move(diag);
  if (bundle.interval_mode()) {
    result.is_interval = true;
    result.interval = counterfactual_bounds(*bundle.pscm, bundle.conditionals, query,
                                            bundle.credal_options, &result.diagnostics.bounds);
  } else {
    result.value = query(*bundle.fscm);
  }
  return result;
}

void require_model(const ModelBundle& bundle) {
  if (!bundle.fscm && !bundle.pscm) throw SpecError("bundle has no causal model");
  if (!bundle.classifier) throw SpecError("bundle has no classifier");
}

}  // namespace

std::vector<double> local_outcome_distribution(const ModelBundle& bundle, const Instance& instance,
                                               const Assignment& intervention) {
  require_model(bundle);
  if (bundle.interval_mode())
    throw QueryError("outcome distribution requires a fully specified model");
  validate_instance(bundle.map, *bundle.classifier, instance);
  check_intervention(bundle.vocab(), intervention);
  return outcome_distribution(*bundle.fscm, bundle.map, *bundle.classifier, instance, intervention,
                              nullptr);
}

PsResult local_ps(const ModelBundle& bundle, const Instance& instance,
                  const Assignment& intervention, int target) {
  require_model(bundle);
  validate_instance(bundle.map, *bundle.classifier, instance);
  check_intervention(bundle.vocab(), intervention);
  check_target(*bundle.classifier, target);

  PsDiagnostics diag;
  bool diag_filled = false;
  auto query = [&](const Fscm& model) {
    auto outcome = outcome_distribution(model, bundle.map, *bundle.classifier, instance,
                                        intervention, diag_filled ? nullptr : &diag);
    diag_filled = true;
    return outcome[target];
  };
  if (bundle.interval_mode()) {
    PsResult result = evaluate(bundle, query);
    result.diagnostics.descendants = diag.descendants;
    result.diagnostics.descendant_space = diag.descendant_space;
    result.diagnostics.terms_evaluated = diag.terms_evaluated;
    return result;
  }
  PsResult result;
  result.value = query(*bundle.fscm);
  result.diagnostics = diag;
  return result;
}

namespace {

SubgroupContext normalized(const SubgroupContext& subgroup, const Vocabulary& vocab) {
  SubgroupContext out = subgroup;
  if (out.z_s.empty()) out.z_s.assign(vocab.size(), kUnset);
  if (static_cast<int>(out.z_s.size()) != vocab.size())
    throw QueryError("subgroup condition is not aligned with the vocabulary");
  return out;
}

}  // namespace

PsResult subgroup_ps(const ModelBundle& bundle, const Dataset& dataset,
                     const SubgroupContext& raw_subgroup, const Assignment& intervention,
                     int target) {
  require_model(bundle);
  check_intervention(bundle.vocab(), intervention);
  check_target(*bundle.classifier, target);
  SubgroupContext subgroup = normalized(raw_subgroup, bundle.vocab());

  // Sufficiency reading: a shared prediction with a changed target requires
  // the intervened variables pinned (and changed) by the subgroup condition.
  if (subgroup.yhat && *subgroup.yhat != target) {
    for (int i = 0; i < bundle.vocab().size(); ++i) {
      if (intervention[i] == kUnset) continue;
      if (subgroup.z_s[i] == kUnset)
        throw QueryError("sufficiency subgroup must condition on intervened variable '" +
                         bundle.vocab().concept(i).name + "'");
      if (subgroup.z_s[i] == intervention[i])
        throw QueryError("sufficiency subgroup pins '" + bundle.vocab().concept(i).name +
                         "' at the intervened value; nothing would change");
    }
  }

  Dataset members = filter(dataset, subgroup.z_s, subgroup.yhat);
  if (members.instances.empty()) throw QueryError("empty subgroup");

  auto mean_query = [&](const Fscm& model) {
    double sum = 0.0;
    for (const auto& member : members.instances) {
      auto outcome = outcome_distribution(model, bundle.map, *bundle.classifier, member,
                                          intervention, nullptr);
      sum += outcome[target];
    }
    return sum / static_cast<double>(members.instances.size());
  };

  PsResult result = evaluate(bundle, mean_query);
  result.diagnostics.member_count = members.instances.size();
  return result;
}

PsResult global_interventional(const ModelBundle& bundle, const Assignment& intervention,
                               int target) {
  require_model(bundle);
  check_intervention(bundle.vocab(), intervention);
  check_target(*bundle.classifier, target);

  const Vocabulary& vocab = bundle.vocab();
  std::vector<int> cards;
  for (int i = 0; i < vocab.size(); ++i) cards.push_back(vocab.cardinality(i));
  const std::size_t z_space = mixed_radix_size(cards, std::size_t{1} << 20);
  const std::size_t w_space = bundle.map.w_space();

  auto query = [&, cards](const Fscm& model) {
    ScmIndex index(model);
    double total = 0.0;
    for (std::size_t rank = 0; rank < z_space; ++rank) {
      Assignment world = mixed_radix_unrank(rank, cards);
      bool fits = true;
      double p = 1.0;
      for (int node : index.topo_order()) {
        if (intervention[node] != kUnset) {
          if (world[node] != intervention[node]) {
            fits = false;
            break;
          }
          continue;
        }
        p *= index.consistent_mass(node, index.parent_rank(node, world), world[node],
                                   model.exogenous[node].probabilities);
        if (p == 0.0) break;
      }
      if (!fits || p == 0.0) continue;
      double hit = 0.0;
      for (std::size_t wr = 0; wr < w_space; ++wr) {
        std::vector<int> w = bundle.map.w_from_rank(wr);
        if (bundle.classifier->classify(bundle.map.decode(world, w)) == target) hit += 1.0;
      }
      total += p * hit / static_cast<double>(w_space);
    }
    return total;
  };
  return evaluate(bundle, query);
}

PsResult cbn_interventional(const ModelBundle& bundle, const Assignment& intervention,
                            const Assignment& condition, const std::vector<int>& w_context,
                            int target) {
  require_model(bundle);
  check_intervention(bundle.vocab(), intervention);
  check_target(*bundle.classifier, target);

  const Vocabulary& vocab = bundle.vocab();
  std::vector<int> cards;
  for (int i = 0; i < vocab.size(); ++i) cards.push_back(vocab.cardinality(i));
  const std::size_t z_space = mixed_radix_size(cards, std::size_t{1} << 20);

  auto query = [&, cards](const Fscm& model) {
    ScmIndex index(model);
    // contract: conditioning below the intervention would need a counterfactual
    std::vector<char> desc = index.descendant_mask(intervention);
    for (int i = 0; i < vocab.size(); ++i) {
      if (condition[i] == kUnset) continue;
      if (desc[i])
        throw QueryError("counterfactual query required: condition on '" +
                         vocab.concept(i).name + "', a descendant of the intervened set");
      if (intervention[i] != kUnset)
        throw QueryError("cannot condition on intervened variable '" + vocab.concept(i).name + "'");
    }
    double mass = 0.0;
    double hit = 0.0;
    for (std::size_t rank = 0; rank < z_space; ++rank) {
      Assignment world = mixed_radix_unrank(rank, cards);
      bool fits = true;
      for (int i = 0; i < vocab.size() && fits; ++i) {
        if (intervention[i] != kUnset && world[i] != intervention[i]) fits = false;
        if (condition[i] != kUnset && world[i] != condition[i]) fits = false;
      }
      if (!fits) continue;
      double p = 1.0;
      for (int node : index.topo_order()) {
        if (intervention[node] != kUnset) continue;
        p *= index.consistent_mass(node, index.parent_rank(node, world), world[node],
                                   model.exogenous[node].probabilities);
        if (p == 0.0) break;
      }
      if (p == 0.0) continue;
      mass += p;
      if (bundle.classifier->classify(bundle.map.decode(world, w_context)) == target) hit += p;
    }
    if (mass <= 0.0) throw QueryError("impossible evidence: condition has zero probability");
    return hit / mass;
  };
  return evaluate(bundle, query);
}

PsResult cbn_local(const ModelBundle& bundle, const Instance& instance,
                   const Assignment& intervention, int target) {
  require_model(bundle);
  validate_instance(bundle.map, *bundle.classifier, instance);
  check_intervention(bundle.vocab(), intervention);

  // condition on every observed non-descendant, resample the rest
  const CausalGraph& graph = bundle.fscm ? bundle.fscm->graph : bundle.pscm->graph;
  Assignment condition(instance.z.size(), kUnset);
  {
    // reuse ScmIndex by building the mask from whichever model is present
    std::vector<char> desc;
    if (bundle.fscm) {
      desc = ScmIndex(*bundle.fscm).descendant_mask(intervention);
    } else {
      // graph-only mask: walk children transitively
      const Vocabulary& vocab = bundle.vocab();
      std::vector<char> mask(vocab.size(), 0);
      std::vector<int> stack;
      for (int i = 0; i < vocab.size(); ++i)
        if (intervention[i] != kUnset) stack.push_back(i);
      while (!stack.empty()) {
        int node = stack.back();
        stack.pop_back();
        for (const auto& child : graph.children_of(vocab.concept(node).name)) {
          int c = vocab.require(child);
          if (!mask[c]) {
            mask[c] = 1;
            stack.push_back(c);
          }
        }
      }
      for (int i = 0; i < vocab.size(); ++i)
        if (intervention[i] != kUnset) mask[i] = 0;
      desc = mask;
    }
    for (std::size_t i = 0; i < instance.z.size(); ++i) {
      if (intervention[i] == kUnset && !desc[i]) condition[i] = instance.z[i];
    }
  }
  return cbn_interventional(bundle, intervention, condition, instance.w, target);
}

PsResult independence_ps(const ModelBundle& bundle, const Instance& instance,
                         const Assignment& intervention, int target) {
  require_model(bundle);
  validate_instance(bundle.map, *bundle.classifier, instance);
  check_intervention(bundle.vocab(), intervention);
  check_target(*bundle.classifier, target);

  Assignment world = instance.z;
  for (std::size_t i = 0; i < world.size(); ++i)
    if (intervention[i] != kUnset) world[i] = intervention[i];
  PsResult result;
  result.value =
      bundle.classifier->classify(bundle.map.decode(world, instance.w)) == target ? 1.0 : 0.0;
  return result;
}

PsResult independence_ps_subgroup(const ModelBundle& bundle, const Dataset& dataset,
                                  const SubgroupContext& raw_subgroup,
                                  const Assignment& intervention, int target) {
  require_model(bundle);
  check_intervention(bundle.vocab(), intervention);
  check_target(*bundle.classifier, target);
  SubgroupContext subgroup = normalized(raw_subgroup, bundle.vocab());
  Dataset members = filter(dataset, subgroup.z_s, subgroup.yhat);
  if (members.instances.empty()) throw QueryError("empty subgroup");
  double sum = 0.0;
  for (const auto& member : members.instances) {
    Assignment world = member.z;
    for (std::size_t i = 0; i < world.size(); ++i)
      if (intervention[i] != kUnset) world[i] = intervention[i];
    sum += bundle.classifier->classify(bundle.map.decode(world, member.w)) == target ? 1.0 : 0.0;
  }
  PsResult result;
  result.value = sum / static_cast<double>(members.instances.size());
  result.diagnostics.member_count = members.instances.size();
  return result;
}

namespace {

std::vector<AttributionCandidate> default_candidates(const Vocabulary& vocab) {
  std::vector<AttributionCandidate> out;
  for (int i = 0; i < vocab.size(); ++i) {
    for (const auto& label : vocab.concept(i).domain) out.push_back({vocab.concept(i).name, label});
  }
  return out;
}

void sort_rows(std::vector<AttributionRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const AttributionRow& a, const AttributionRow& b) {
    double av = a.result.is_interval ? a.result.interval.lower : a.result.value;
    double bv = b.result.is_interval ? b.result.interval.lower : b.result.value;
    if (av != bv) return av > bv;
    if (a.concept != b.concept) return a.concept < b.concept;
    return a.value < b.value;
  });
}

}  // namespace

AttributionReport singleton_attributions(const ModelBundle& bundle, const Instance& instance,
                                         int target,
                                         const std::vector<AttributionCandidate>& candidates) {
  const Vocabulary& vocab = bundle.vocab();
  auto list = candidates.empty() ? default_candidates(vocab) : candidates;
  AttributionReport report;
  for (const auto& candidate : list) {
    int node = vocab.require(candidate.concept);
    int code = vocab.code_of(node, candidate.value);
    if (code < 0)
      throw QueryError("candidate value '" + candidate.value + "' not in the domain of '" +
                       candidate.concept + "'");
    if (instance.z[node] == code) continue;  // not a change for this instance
    Assignment do_(vocab.size(), kUnset);
    do_[node] = code;
    AttributionRow row;
    row.concept = candidate.concept;
    row.value = candidate.value;
    row.result = local_ps(bundle, instance, do_, target);
    row.member_count = 1;
    report.rows.push_back(std::move(row));
  }
  sort_rows(report.rows);
  return report;
}

AttributionReport singleton_attributions(const ModelBundle& bundle, const Dataset& dataset,
                                         const SubgroupContext& raw_subgroup, int target,
                                         const std::vector<AttributionCandidate>& candidates) {
  const Vocabulary& vocab = bundle.vocab();
  auto list = candidates.empty() ? default_candidates(vocab) : candidates;
  SubgroupContext subgroup = normalized(raw_subgroup, vocab);
  Dataset base = filter(dataset, subgroup.z_s, subgroup.yhat);
  AttributionReport report;
  for (const auto& candidate : list) {
    int node = vocab.require(candidate.concept);
    int code = vocab.code_of(node, candidate.value);
    if (code < 0)
      throw QueryError("candidate value '" + candidate.value + "' not in the domain of '" +
                       candidate.concept + "'");
    // members whose observed value actually changes under the intervention
    Dataset members;
    for (const auto& instance : base.instances)
      if (instance.z[node] != code) members.instances.push_back(instance);
    if (members.instances.empty()) continue;

    Assignment do_(vocab.size(), kUnset);
    do_[node] = code;
    auto mean_query = [&](const Fscm& model) {
      double sum = 0.0;
      for (const auto& member : members.instances) {
        auto outcome = outcome_distribution(model, bundle.map, *bundle.classifier, member, do_,
                                            nullptr);
        sum += outcome[target];
      }
      return sum / static_cast<double>(members.instances.size());
    };
    AttributionRow row;
    row.concept = candidate.concept;
    row.value = candidate.value;
    row.result = evaluate(bundle, mean_query);
    row.member_count = members.instances.size();
    row.result.diagnostics.member_count = members.instances.size();
    report.rows.push_back(std::move(row));
  }
  sort_rows(report.rows);
  return report;
}

std::string intervention_key(const Vocabulary& vocab, const Assignment& intervention) {
  std::string key;
  for (int i = 0; i < vocab.size(); ++i) {
    if (intervention[i] == kUnset) continue;
    if (!key.empty()) key += ",";
    key += vocab.concept(i).name + "=" + vocab.label_of(i, intervention[i]);
  }
  return key;
}

std::vector<ContrastiveExplanation> contrastive_search(const ModelBundle& bundle,
                                                       const Instance& instance, int target,
                                                       double p_threshold, int max_cardinality) {
  require_model(bundle);
  validate_instance(bundle.map, *bundle.classifier, instance);
  check_target(*bundle.classifier, target);
  if (!(p_threshold > 0.0 && p_threshold <= 1.0))
    throw QueryError("probability threshold must lie in (0, 1]");
  const Vocabulary& vocab = bundle.vocab();
  if (max_cardinality < 0 || max_cardinality > vocab.size())
    throw QueryError("max cardinality must lie in [0, |z|]");

  std::vector<ContrastiveExplanation> found;
  std::vector<int> subset;
  // enumerate concept subsets up to the cap, then all changed value
  // combinations within each subset
  auto evaluate_subset = [&]() {
    std::vector<std::vector<int>> choices;  // per subset member: values != observed
    for (int node : subset) {
      std::vector<int> values;
      for (int v = 0; v < vocab.cardinality(node); ++v)
        if (v != instance.z[node]) values.push_back(v);
      choices.push_back(std::move(values));
    }
    std::vector<std::size_t> pick(subset.size(), 0);
    while (true) {
      Assignment do_(vocab.size(), kUnset);
      for (std::size_t k = 0; k < subset.size(); ++k) do_[subset[k]] = choices[k][pick[k]];
      PsResult result = local_ps(bundle, instance, do_, target);
      double p = result.is_interval ? result.interval.lower : result.value;
      if (p >= p_threshold) {
        found.push_back({do_, p, static_cast<int>(subset.size())});
      }
      std::size_t k = subset.size();
      bool carried = false;
      while (k-- > 0) {
        if (++pick[k] < choices[k].size()) {
          carried = true;
          break;
        }
        pick[k] = 0;
      }
      if (!carried) break;
    }
  };

  std::function<void(int, int)> descend = [&](int start, int remaining) {
    if (!subset.empty()) evaluate_subset();
    if (remaining == 0) return;
    for (int node = start; node < vocab.size(); ++node) {
      subset.push_back(node);
      descend(node + 1, remaining - 1);
      subset.pop_back();
    }
  };
  descend(0, max_cardinality);

  std::stable_sort(found.begin(), found.end(),
                   [&](const ContrastiveExplanation& a, const ContrastiveExplanation& b) {
                     if (a.cardinality != b.cardinality) return a.cardinality < b.cardinality;
                     if (a.p != b.p) return a.p > b.p;
                     return intervention_key(vocab, a.intervention) <
                            intervention_key(vocab, b.intervention);
                   });
  return found;
}

}  // namespace ccx
