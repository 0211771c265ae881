#include "ccx/world.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>

namespace ccx {

SyntheticTabularMap::SyntheticTabularMap(const Vocabulary& vocab, const CausalGraph& graph,
                                         int w_slots, int w_cardinality)
    : vocab_(vocab), w_slots_(w_slots), w_cardinality_(w_cardinality) {
  if (w_slots < 0) throw SpecError("nuisance slot count must be non-negative");
  if (w_cardinality < 1) throw SpecError("nuisance cardinality must be positive");
  auto order = topological_order(graph);
  if (static_cast<int>(order.size()) != vocab.size())
    throw SpecError("graph nodes do not match the vocabulary");
  slot_of_node_.assign(vocab.size(), -1);
  node_of_slot_.assign(vocab.size(), -1);
  for (int slot = 0; slot < static_cast<int>(order.size()); ++slot) {
    int node = vocab.require(order[slot]);
    slot_of_node_[node] = slot;
    node_of_slot_[slot] = node;
  }
}

std::size_t SyntheticTabularMap::w_space() const {
  std::size_t space = 1;
  for (int i = 0; i < w_slots_; ++i) space *= static_cast<std::size_t>(w_cardinality_);
  return space;
}

std::vector<int> SyntheticTabularMap::w_from_rank(std::size_t rank) const {
  std::vector<int> cards(w_slots_, w_cardinality_);
  return mixed_radix_unrank(rank, cards);
}

std::vector<int> SyntheticTabularMap::decode(const Assignment& z, const std::vector<int>& w) const {
  if (static_cast<int>(z.size()) != vocab_.size() || !is_total(z))
    throw QueryError("decode requires a total concept assignment");
  if (static_cast<int>(w.size()) != w_slots_)
    throw QueryError("decode requires " + std::to_string(w_slots_) + " nuisance values");
  std::vector<int> x(feature_dim(), 0);
  for (int node = 0; node < vocab_.size(); ++node) {
    if (z[node] < 0 || z[node] >= vocab_.cardinality(node))
      throw QueryError("concept value out of domain for '" + vocab_.concept(node).name + "'");
    x[slot_of_node_[node]] = z[node];
  }
  for (int i = 0; i < w_slots_; ++i) {
    if (w[i] < 0 || w[i] >= w_cardinality_)
      throw QueryError("nuisance value out of range in slot " + std::to_string(i));
    x[vocab_.size() + i] = w[i];
  }
  return x;
}

std::pair<Assignment, std::vector<int>> SyntheticTabularMap::encode(const std::vector<int>& x) const {
  if (static_cast<int>(x.size()) != feature_dim())
    throw QueryError("feature vector has wrong dimensionality");
  Assignment z(vocab_.size(), kUnset);
  for (int node = 0; node < vocab_.size(); ++node) {
    int code = x[slot_of_node_[node]];
    if (code < 0 || code >= vocab_.cardinality(node))
      throw QueryError("feature slot for '" + vocab_.concept(node).name + "' holds an invalid code");
    z[node] = code;
  }
  std::vector<int> w(x.begin() + vocab_.size(), x.end());
  for (int i = 0; i < w_slots_; ++i) {
    if (w[i] < 0 || w[i] >= w_cardinality_)
      throw QueryError("nuisance slot " + std::to_string(i) + " holds an invalid code");
  }
  return {std::move(z), std::move(w)};
}

namespace {

// Resolves rule predicates against the tabular layout: concepts by name,
// nuisance slots as w<i>.
class MapSlotResolver : public SlotResolver {
 public:
  explicit MapSlotResolver(const SyntheticTabularMap& map) : map_(&map) {}

  BoundPredicate resolve(const std::string& name, const std::string& value) const override {
    const Vocabulary& vocab = map_->vocab();
    int node = vocab.index_of(name);
    if (node >= 0) {
      int code = vocab.code_of(node, value);
      if (code < 0) {
        // domain labels win; bare integers fall back to the code itself
        try {
          std::size_t used = 0;
          int parsed = std::stoi(value, &used);
          if (used == value.size() && parsed >= 0 && parsed < vocab.cardinality(node)) code = parsed;
        } catch (...) {
        }
      }
      if (code < 0)
        throw SpecError("value '" + value + "' is not in the domain of concept '" + name + "'");
      return {map_->slot_of_node(node), code};
    }
    if (name.size() > 1 && name[0] == 'w') {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
      if (digits) {
        int index = std::stoi(name.substr(1));
        if (index >= map_->w_slots())
          throw SpecError("rule references undeclared nuisance slot '" + name + "'");
        int code = -1;
        try {
          std::size_t used = 0;
          code = std::stoi(value, &used);
          if (used != value.size()) code = -1;
        } catch (...) {
        }
        if (code < 0 || code >= map_->w_cardinality())
          throw SpecError("value '" + value + "' is out of range for nuisance slot '" + name + "'");
        return {map_->vocab().size() + index, code};
      }
    }
    throw SpecError("rule references undeclared slot '" + name + "'");
  }

 private:
  const SyntheticTabularMap* map_;
};

}  // namespace

RuleClassifier::RuleClassifier(RuleExprPtr rule, const SyntheticTabularMap& map,
                               std::vector<std::string> output_domain, int on_true_code,
                               int on_false_code)
    : bound_(std::move(rule), MapSlotResolver(map)),
      output_domain_(std::move(output_domain)),
      on_true_(on_true_code),
      on_false_(on_false_code) {
  if (output_domain_.size() < 2) throw SpecError("classifier output domain needs >= 2 labels");
  auto in_range = [&](int code) { return code >= 0 && code < static_cast<int>(output_domain_.size()); };
  if (!in_range(on_true_) || !in_range(on_false_))
    throw SpecError("classifier output mapping is outside the output domain");
}

int RuleClassifier::classify(const std::vector<int>& x) const {
  return bound_.eval(x) ? on_true_ : on_false_;
}

Instance make_instance(const SyntheticTabularMap& map, const BlackBoxClassifier& classifier,
                       const Assignment& z, const std::vector<int>& w) {
  Instance instance;
  instance.z = z;
  instance.w = w;
  instance.x = map.decode(z, w);
  instance.yhat = classifier.classify(instance.x);
  return instance;
}

void validate_instance(const SyntheticTabularMap& map, const BlackBoxClassifier& classifier,
                       const Instance& instance) {
  std::vector<int> x = map.decode(instance.z, instance.w);
  if (x != instance.x) throw QueryError("inconsistent instance: x does not equal decode(z, w)");
  int yhat = classifier.classify(x);
  if (yhat != instance.yhat)
    throw QueryError("inconsistent instance: prediction does not equal classify(x)");
}

Dataset generate_dataset(const Fscm& model, const SyntheticTabularMap& map,
                         const BlackBoxClassifier& classifier, int n, std::uint64_t seed) {
  if (n < 0) throw QueryError("dataset size must be non-negative");
  ScmIndex index(model);
  Dataset dataset;
  dataset.seed = seed;
  dataset.instances.reserve(static_cast<std::size_t>(n));
  SplitRng rng(seed);
  for (int i = 0; i < n; ++i) {
    Assignment z = index.sample_one(rng);
    std::vector<int> w(map.w_slots());
    for (int k = 0; k < map.w_slots(); ++k)
      w[k] = static_cast<int>(uniform_index(static_cast<std::uint64_t>(map.w_cardinality()), rng));
    dataset.instances.push_back(make_instance(map, classifier, z, w));
  }
  return dataset;
}

Dataset filter(const Dataset& dataset, const Assignment& condition, std::optional<int> yhat) {
  Dataset out;
  out.seed = dataset.seed;
  out.model_id = dataset.model_id;
  for (const auto& instance : dataset.instances) {
    bool keep = true;
    for (std::size_t i = 0; i < condition.size() && keep; ++i) {
      if (condition[i] != kUnset && instance.z[i] != condition[i]) keep = false;
    }
    if (keep && yhat && instance.yhat != *yhat) keep = false;
    if (keep) out.instances.push_back(instance);
  }
  return out;
}

void write_csv(std::ostream& out, const SyntheticTabularMap& map, const Dataset& dataset) {
  const Vocabulary& vocab = map.vocab();
  for (int slot = 0; slot < vocab.size(); ++slot) {
    out << (slot ? "," : "") << "concept:" << vocab.concept(map.node_of_slot(slot)).name;
  }
  for (int i = 0; i < map.w_slots(); ++i) out << ",w:" << i;
  out << ",yhat\n";
  for (const auto& instance : dataset.instances) {
    for (int slot = 0; slot < vocab.size(); ++slot) {
      out << (slot ? "," : "") << instance.z[map.node_of_slot(slot)];
    }
    for (int i = 0; i < map.w_slots(); ++i) out << "," << instance.w[i];
    out << "," << instance.yhat << "\n";
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

int parse_code(const std::string& text, std::size_t row, const std::string& column) {
  try {
    std::size_t used = 0;
    int value = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return value;
  } catch (...) {
    throw SpecError("row " + std::to_string(row) + ": column '" + column +
                    "' holds a non-integer value '" + text + "'");
  }
}

}  // namespace

Dataset read_csv(std::istream& in, const SyntheticTabularMap& map,
                 const BlackBoxClassifier& classifier) {
  std::string line;
  if (!std::getline(in, line)) throw SpecError("empty dataset file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const Vocabulary& vocab = map.vocab();

  std::vector<int> node_of_column;
  std::vector<int> w_of_column;
  int yhat_column = -1;
  auto header = split_csv_line(line);
  node_of_column.assign(header.size(), -1);
  w_of_column.assign(header.size(), -1);
  std::vector<char> node_seen(vocab.size(), 0);
  std::vector<char> w_seen(map.w_slots(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name.rfind("concept:", 0) == 0) {
      int node = vocab.index_of(name.substr(8));
      if (node < 0) throw SpecError("dataset column '" + name + "' is not a declared concept");
      node_of_column[c] = node;
      node_seen[node] = 1;
    } else if (name.rfind("w:", 0) == 0) {
      int index = parse_code(name.substr(2), 0, name);
      if (index < 0 || index >= map.w_slots())
        throw SpecError("dataset column '" + name + "' is not a declared nuisance slot");
      w_of_column[c] = index;
      w_seen[index] = 1;
    } else if (name == "yhat") {
      yhat_column = static_cast<int>(c);
    } else {
      throw SpecError("unrecognized dataset column '" + name + "'");
    }
  }
  for (int i = 0; i < vocab.size(); ++i)
    if (!node_seen[i]) throw SpecError("dataset is missing column for concept '" +
                                       vocab.concept(i).name + "'");
  for (int i = 0; i < map.w_slots(); ++i)
    if (!w_seen[i]) throw SpecError("dataset is missing nuisance column w:" + std::to_string(i));
  if (yhat_column < 0) throw SpecError("dataset is missing the yhat column");

  Dataset dataset;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw SpecError("row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " cells, found " +
                      std::to_string(cells.size()));
    Assignment z(vocab.size(), kUnset);
    std::vector<int> w(map.w_slots(), 0);
    int yhat = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      int code = parse_code(cells[c], row, header[c]);
      if (node_of_column[c] >= 0)
        z[node_of_column[c]] = code;
      else if (w_of_column[c] >= 0)
        w[w_of_column[c]] = code;
      else
        yhat = code;
    }
    Instance instance = make_instance(map, classifier, z, w);
    if (instance.yhat != yhat)
      throw SpecError("row " + std::to_string(row) +
                      ": stored prediction disagrees with the classifier");
    dataset.instances.push_back(std::move(instance));
    ++row;
  }
  return dataset;
}

}  // namespace ccx
