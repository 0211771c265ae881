#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ccx/fscm.hpp"
#include "ccx/rule.hpp"

namespace ccx {

// Deterministic decoder α(z, w) = x and encoder α⁻¹(x) = (z, w) over an
// integer-coded tabular feature space: one slot per concept (topological
// order) followed by nuisance slots for w. Concept and nuisance slots are
// disjoint, so z ⊥⊥ w survives the round trip by construction.
class SyntheticTabularMap {
 public:
  SyntheticTabularMap() = default;
  SyntheticTabularMap(const Vocabulary& vocab, const CausalGraph& graph, int w_slots,
                      int w_cardinality = 2);

  const Vocabulary& vocab() const { return vocab_; }
  int feature_dim() const { return vocab_.size() + w_slots_; }
  int w_slots() const { return w_slots_; }
  int w_cardinality() const { return w_cardinality_; }
  std::size_t w_space() const;
  int slot_of_node(int node) const { return slot_of_node_.at(node); }
  int node_of_slot(int slot) const { return node_of_slot_.at(slot); }

  std::vector<int> decode(const Assignment& z, const std::vector<int>& w) const;
  std::pair<Assignment, std::vector<int>> encode(const std::vector<int>& x) const;

  // nuisance vector for a flat rank in [0, w_space)
  std::vector<int> w_from_rank(std::size_t rank) const;

 private:
  Vocabulary vocab_;
  std::vector<int> slot_of_node_;
  std::vector<int> node_of_slot_;
  int w_slots_ = 0;
  int w_cardinality_ = 2;
};

// Deterministic total classifier h(x) = ŷ over a declared finite output
// domain; predictions are codes into `output_domain`.
class BlackBoxClassifier {
 public:
  virtual ~BlackBoxClassifier() = default;
  virtual const std::vector<std::string>& output_domain() const = 0;
  virtual int classify(const std::vector<int>& x) const = 0;
};

// Classifier defined by a boolean rule over feature slots. Concept slots are
// referenced by concept name, nuisance slots as w0, w1, ... The rule may read
// nuisance slots; that is how fixtures model behaviour the vocabulary cannot
// explain.
class RuleClassifier : public BlackBoxClassifier {
 public:
  RuleClassifier(RuleExprPtr rule, const SyntheticTabularMap& map,
                 std::vector<std::string> output_domain, int on_true_code, int on_false_code);

  const std::vector<std::string>& output_domain() const override { return output_domain_; }
  int classify(const std::vector<int>& x) const override;

  const RuleExpr& rule() const { return bound_.expr(); }
  int on_true_code() const { return on_true_; }
  int on_false_code() const { return on_false_; }

 private:
  BoundRule bound_;
  std::vector<std::string> output_domain_;
  int on_true_ = 1;
  int on_false_ = 0;
};

struct Instance {
  Assignment z;
  std::vector<int> w;
  std::vector<int> x;
  int yhat = 0;
};

struct Dataset {
  std::vector<Instance> instances;
  std::uint64_t seed = 0;
  std::string model_id;

  std::size_t size() const { return instances.size(); }
};

// Builds a consistent instance (x = decode(z, w), ŷ = classify(x)).
Instance make_instance(const SyntheticTabularMap& map, const BlackBoxClassifier& classifier,
                       const Assignment& z, const std::vector<int>& w);

// Entry validation for externally supplied instances; throws QueryError when
// x or ŷ disagree with the map/classifier.
void validate_instance(const SyntheticTabularMap& map, const BlackBoxClassifier& classifier,
                       const Instance& instance);

// n i.i.d. instances: z from the model, w uniform over nuisance codes,
// deterministic for a fixed seed.
Dataset generate_dataset(const Fscm& model, const SyntheticTabularMap& map,
                         const BlackBoxClassifier& classifier, int n, std::uint64_t seed);

// Order-preserving subsequence matching a partial concept assignment and an
// optional prediction.
Dataset filter(const Dataset& dataset, const Assignment& condition,
               std::optional<int> yhat = std::nullopt);

// Dataset CSV: header `concept:<name>,...,w:<i>,...,yhat`, integer codes,
// LF line endings. Concept columns follow feature order.
void write_csv(std::ostream& out, const SyntheticTabularMap& map, const Dataset& dataset);
Dataset read_csv(std::istream& in, const SyntheticTabularMap& map,
                 const BlackBoxClassifier& classifier);

}  // namespace ccx
