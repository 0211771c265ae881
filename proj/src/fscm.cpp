#include "ccx/fscm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace ccx {

ValidationReport validate(const Fscm& model) {
  ValidationReport report;
  auto add = [&](const std::string& code, const std::string& message) {
    report.issues.push_back({code, message});
  };

  std::set<std::string> names;
  for (const auto& c : model.vocab.concepts()) {
    if (!names.insert(c.name).second) add("duplicate-name", "concept '" + c.name + "' declared twice");
    if (c.domain.size() < 2) add("domain-size", "concept '" + c.name + "' needs cardinality >= 2");
    std::set<std::string> labels(c.domain.begin(), c.domain.end());
    if (labels.size() != c.domain.size())
      add("domain-duplicate", "concept '" + c.name + "' has duplicate domain labels");
  }

  for (const auto& n : model.graph.nodes()) {
    if (model.vocab.index_of(n) < 0) add("unknown-node", "graph node '" + n + "' is not a declared concept");
  }
  for (const auto& [p, c] : model.graph.edges()) {
    if (!model.graph.has_node(p)) add("unknown-edge-endpoint", "edge parent '" + p + "' is not a node");
    if (!model.graph.has_node(c)) add("unknown-edge-endpoint", "edge child '" + c + "' is not a node");
  }
  std::string cyclic = model.graph.find_cycle_node();
  if (!cyclic.empty()) add("cycle", "graph has a cycle through node '" + cyclic + "'");

  const int n = model.vocab.size();
  if (static_cast<int>(model.families.size()) != n) {
    add("missing-family", "expected one family per concept (" + std::to_string(n) + "), got " +
                              std::to_string(model.families.size()));
    return report;  // indices below would be meaningless
  }
  if (static_cast<int>(model.exogenous.size()) != n)
    add("missing-exogenous", "expected one exogenous distribution per concept");

  for (int i = 0; i < n; ++i) {
    const auto& fam = model.families[i];
    const std::string& name = model.vocab.concept(i).name;
    if (fam.child != name) {
      add("family-order", "family at position " + std::to_string(i) + " is for '" + fam.child +
                              "', expected '" + name + "'");
      continue;
    }
    auto expected_parents = model.graph.parents_of(name);
    if (fam.parents != expected_parents)
      add("parents-mismatch", "family for '" + name + "' does not list its graph parents in order");
    std::size_t pa_space = 1;
    bool ok_parents = true;
    for (const auto& p : fam.parents) {
      int pi = model.vocab.index_of(p);
      if (pi < 0) {
        add("unknown-parent", "family for '" + name + "' references unknown parent '" + p + "'");
        ok_parents = false;
        break;
      }
      pa_space *= static_cast<std::size_t>(model.vocab.cardinality(pi));
    }
    if (!ok_parents) continue;
    if (fam.functions.empty()) add("empty-family", "family for '" + name + "' has no functions");
    const int child_card = model.vocab.cardinality(i);
    std::set<std::vector<int>> seen;
    for (std::size_t u = 0; u < fam.functions.size(); ++u) {
      const auto& f = fam.functions[u];
      if (f.size() != pa_space) {
        add("function-arity", "function " + std::to_string(u) + " of '" + name +
                                  "' is not total over the parent assignments");
        continue;
      }
      for (int v : f) {
        if (v < 0 || v >= child_card) {
          add("domain-mismatch", "function " + std::to_string(u) + " of '" + name +
                                     "' emits a value outside the child domain");
          break;
        }
      }
      if (!seen.insert(f).second)
        add("duplicate-function", "family for '" + name + "' lists function " + std::to_string(u) +
                                      " twice");
    }
    if (i < static_cast<int>(model.exogenous.size())) {
      const auto& exo = model.exogenous[i];
      if (exo.probabilities.size() != fam.functions.size()) {
        add("weight-count", "exogenous weights for '" + name + "' do not match the function count");
      } else {
        double total = 0.0;
        for (double w : exo.probabilities) {
          if (w < 0.0) add("negative-weight", "negative exogenous weight for '" + name + "'");
          total += w;
        }
        if (std::abs(total - 1.0) > kNormalizationTol)
          add("weight-sum", "exogenous weights for '" + name + "' sum to " + std::to_string(total));
      }
    }
  }
  return report;
}

ScmIndex::ScmIndex(const Fscm& model) : model_(&model) {
  ValidationReport report = validate(model);
  if (!report.ok()) {
    throw SpecError("invalid model: " + report.issues.front().code + ": " +
                    report.issues.front().message);
  }
  n_ = model.vocab.size();
  auto order_names = topological_order(model.graph);
  topo_.reserve(order_names.size());
  for (const auto& name : order_names) topo_.push_back(model.vocab.require(name));

  parents_.resize(n_);
  children_.resize(n_);
  pa_space_.assign(n_, 1);
  for (int i = 0; i < n_; ++i) {
    for (const auto& p : model.families[i].parents) parents_[i].push_back(model.vocab.require(p));
    for (int p : parents_[i]) {
      children_[p].push_back(i);
      pa_space_[i] *= static_cast<std::size_t>(model.vocab.cardinality(p));
    }
  }
}

std::size_t ScmIndex::parent_rank(int node, const Assignment& values) const {
  std::size_t r = 0;
  for (int p : parents_[node]) {
    if (values[p] == kUnset) throw QueryError("parent value unset while ranking assignment");
    r = r * static_cast<std::size_t>(model_->vocab.cardinality(p)) + static_cast<std::size_t>(values[p]);
  }
  return r;
}

std::vector<char> ScmIndex::descendant_mask(const Assignment& intervened) const {
  std::vector<char> mask(n_, 0);
  std::vector<int> stack;
  for (int i = 0; i < n_; ++i)
    if (intervened[i] != kUnset) stack.push_back(i);
  while (!stack.empty()) {
    int node = stack.back();
    stack.pop_back();
    for (int c : children_[node]) {
      if (!mask[c]) {
        mask[c] = 1;
        stack.push_back(c);
      }
    }
  }
  for (int i = 0; i < n_; ++i)
    if (intervened[i] != kUnset) mask[i] = 0;  // intervened nodes are clamped, not resampled
  return mask;
}

Assignment ScmIndex::evaluate(const std::vector<int>& function_indices,
                              const Assignment* intervention) const {
  if (static_cast<int>(function_indices.size()) != n_)
    throw QueryError("expected one function index per node");
  Assignment out(n_, kUnset);
  for (int node : topo_) {
    if (intervention && (*intervention)[node] != kUnset) {
      out[node] = (*intervention)[node];
      continue;
    }
    const auto& fam = model_->families[node];
    int u = function_indices[node];
    if (u < 0 || u >= static_cast<int>(fam.functions.size()))
      throw QueryError("function index out of range for '" + fam.child + "'");
    out[node] = fam.functions[u][parent_rank(node, out)];
  }
  return out;
}

double ScmIndex::consistent_mass(int node, std::size_t pa_rank, int value,
                                 const std::vector<double>& w) const {
  const auto& fam = model_->families[node];
  double mass = 0.0;
  for (std::size_t u = 0; u < fam.functions.size(); ++u) {
    if (fam.functions[u][pa_rank] == value) mass += w[u];
  }
  return mass;
}

double ScmIndex::joint_probability(const Assignment& total) const {
  if (static_cast<int>(total.size()) != n_ || !is_total(total))
    throw QueryError("joint_probability requires a total assignment");
  double p = 1.0;
  for (int node : topo_) {
    p *= consistent_mass(node, parent_rank(node, total), total[node],
                         model_->exogenous[node].probabilities);
    if (p == 0.0) return 0.0;
  }
  return p;
}

Abduction ScmIndex::abduct(const Assignment& observed) const {
  if (static_cast<int>(observed.size()) != n_ || !is_total(observed))
    throw QueryError("abduction requires a total observation");
  Abduction result;
  result.posteriors.resize(n_);
  for (int node = 0; node < n_; ++node) {
    const auto& fam = model_->families[node];
    const auto& prior = model_->exogenous[node].probabilities;
    std::size_t rank = parent_rank(node, observed);
    std::vector<double> post(prior.size(), 0.0);
    double mass = 0.0;
    for (std::size_t u = 0; u < prior.size(); ++u) {
      if (fam.functions[u][rank] == observed[node]) {
        post[u] = prior[u];
        mass += prior[u];
      }
    }
    if (mass <= 0.0) throw QueryError("impossible evidence: observation of '" + fam.child +
                                      "' has zero probability");
    for (double& v : post) v /= mass;
    result.posteriors[node] = std::move(post);
  }
  return result;
}

DiscreteDistribution ScmIndex::counterfactual_descendants(const Abduction& abduction,
                                                          const Assignment& observed,
                                                          const Assignment& intervention) const {
  std::vector<char> mask = descendant_mask(intervention);
  DiscreteDistribution dist;
  for (int i = 0; i < n_; ++i) {
    if (mask[i]) {
      dist.nodes.push_back(i);
      dist.cards.push_back(model_->vocab.cardinality(i));
    }
  }
  std::size_t space = mixed_radix_size(dist.cards, descendant_enumeration_cap);
  dist.probabilities.assign(space, 0.0);

  // Counterfactual world: intervened nodes clamped, non-descendants hold their
  // observed values, descendants enumerated. The descendant joint factorizes
  // over the per-node posteriors because each node's mechanism is local.
  Assignment world(n_, kUnset);
  for (int i = 0; i < n_; ++i) {
    if (intervention[i] != kUnset)
      world[i] = intervention[i];
    else if (!mask[i])
      world[i] = observed[i];
  }
  for (std::size_t rank = 0; rank < space; ++rank) {
    std::vector<int> values = mixed_radix_unrank(rank, dist.cards);
    for (std::size_t k = 0; k < dist.nodes.size(); ++k) world[dist.nodes[k]] = values[k];
    double p = 1.0;
    for (int node : dist.nodes) {
      p *= consistent_mass(node, parent_rank(node, world), world[node],
                           abduction.posteriors[node]);
      if (p == 0.0) break;
    }
    dist.probabilities[rank] = p;
  }
  return dist;
}

double ScmIndex::counterfactual(const Assignment& observed, const Assignment& intervention,
                                const EventPredicate& event) const {
  if (assigned_count(intervention) == 0) throw QueryError("intervention must be non-empty");
  Abduction abduction = abduct(observed);
  DiscreteDistribution desc = counterfactual_descendants(abduction, observed, intervention);

  Assignment world(n_, kUnset);
  for (int i = 0; i < n_; ++i) {
    world[i] = intervention[i] != kUnset ? intervention[i] : observed[i];
  }
  double total = 0.0;
  for (std::size_t rank = 0; rank < desc.probabilities.size(); ++rank) {
    double p = desc.probabilities[rank];
    if (p == 0.0) continue;
    std::vector<int> values = mixed_radix_unrank(rank, desc.cards);
    for (std::size_t k = 0; k < desc.nodes.size(); ++k) world[desc.nodes[k]] = values[k];
    if (event(world)) total += p;
  }
  return total;
}

DiscreteDistribution ScmIndex::interventional(const Assignment& intervention,
                                              const Assignment& condition,
                                              const std::vector<int>& query_nodes) const {
  std::vector<char> desc = descendant_mask(intervention);
  for (int i = 0; i < n_; ++i) {
    if (condition[i] == kUnset) continue;
    if (desc[i])
      throw QueryError("counterfactual query required: condition on '" +
                       model_->vocab.concept(i).name + "', a descendant of the intervened set");
    if (intervention[i] != kUnset)
      throw QueryError("cannot condition on intervened variable '" +
                       model_->vocab.concept(i).name + "'");
  }

  DiscreteDistribution dist;
  dist.nodes = query_nodes;
  std::sort(dist.nodes.begin(), dist.nodes.end());
  for (int node : dist.nodes) dist.cards.push_back(model_->vocab.cardinality(node));
  dist.probabilities.assign(mixed_radix_size(dist.cards, descendant_enumeration_cap), 0.0);

  // Truncated factorization: sweep the full joint, weigh non-intervened nodes
  // by their conditional mass, drop terms violating the condition.
  std::vector<int> cards;
  for (int i = 0; i < n_; ++i) cards.push_back(model_->vocab.cardinality(i));
  std::size_t space = mixed_radix_size(cards, descendant_enumeration_cap);
  double condition_mass = 0.0;
  for (std::size_t rank = 0; rank < space; ++rank) {
    Assignment world = mixed_radix_unrank(rank, cards);
    bool fits = true;
    for (int i = 0; i < n_ && fits; ++i) {
      if (intervention[i] != kUnset && world[i] != intervention[i]) fits = false;
      if (condition[i] != kUnset && world[i] != condition[i]) fits = false;
    }
    if (!fits) continue;
    double p = 1.0;
    for (int node : topo_) {
      if (intervention[node] != kUnset) continue;
      p *= consistent_mass(node, parent_rank(node, world), world[node],
                           model_->exogenous[node].probabilities);
      if (p == 0.0) break;
    }
    if (p == 0.0) continue;
    condition_mass += p;
    std::vector<int> qvals;
    qvals.reserve(dist.nodes.size());
    for (int node : dist.nodes) qvals.push_back(world[node]);
    dist.probabilities[mixed_radix_rank(qvals, dist.cards)] += p;
  }
  if (condition_mass <= 0.0) throw QueryError("impossible evidence: condition has zero probability");
  for (double& p : dist.probabilities) p /= condition_mass;
  return dist;
}

Assignment ScmIndex::sample_one(SplitRng& rng) const {
  std::vector<int> u(n_, 0);
  for (int node : topo_) {
    const auto& w = model_->exogenous[node].probabilities;
    double draw = rng.next_unit();
    double acc = 0.0;
    int pick = static_cast<int>(w.size()) - 1;
    for (std::size_t k = 0; k < w.size(); ++k) {
      acc += w[k];
      if (draw < acc) {
        pick = static_cast<int>(k);
        break;
      }
    }
    u[node] = pick;
  }
  return evaluate(u, nullptr);
}

std::vector<Assignment> ScmIndex::sample(std::uint64_t seed, int n) const {
  if (n < 0) throw QueryError("sample count must be non-negative");
  SplitRng rng(seed);
  std::vector<Assignment> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(sample_one(rng));
  return out;
}

Assignment evaluate(const Fscm& model, const std::vector<int>& function_indices,
                    const Assignment* intervention) {
  return ScmIndex(model).evaluate(function_indices, intervention);
}

double joint_probability(const Fscm& model, const Assignment& total) {
  return ScmIndex(model).joint_probability(total);
}

Abduction abduct(const Fscm& model, const Assignment& observed) {
  return ScmIndex(model).abduct(observed);
}

double counterfactual(const Fscm& model, const Assignment& observed,
                      const Assignment& intervention, const EventPredicate& event) {
  return ScmIndex(model).counterfactual(observed, intervention, event);
}

DiscreteDistribution interventional(const Fscm& model, const Assignment& intervention,
                                    const Assignment& condition,
                                    const std::vector<int>& query_nodes) {
  return ScmIndex(model).interventional(intervention, condition, query_nodes);
}

std::vector<Assignment> sample(const Fscm& model, std::uint64_t seed, int n) {
  return ScmIndex(model).sample(seed, n);
}

}  // namespace ccx
