#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ccx/types.hpp"

namespace ccx {

// Boolean expression over slot predicates, e.g.
//   GrayHair=0 & (Glasses=0 | Makeup=1)
// Grammar: expr := term ('|' term)* ; term := factor ('&' factor)* ;
// factor := '!' factor | '(' expr ')' | IDENT '=' VALUE.
struct RuleExpr {
  enum class Kind { Predicate, Not, And, Or };

  Kind kind = Kind::Predicate;
  std::string name;   // predicate only
  std::string value;  // predicate only (domain label or integer literal)
  std::vector<std::shared_ptr<RuleExpr>> children;

  int line = 1;
  int column = 1;
};

using RuleExprPtr = std::shared_ptr<RuleExpr>;

// Throws SpecError with line/column on the first syntax error.
RuleExprPtr parse_rule(const std::string& text);

// Canonical textual form; reparses to an equal tree.
std::string rule_to_string(const RuleExpr& expr);

// Predicate resolved against a concrete slot layout.
struct BoundPredicate {
  int slot = 0;
  int code = 0;
};

class SlotResolver {
 public:
  virtual ~SlotResolver() = default;
  // Throws SpecError for undeclared names or invalid values.
  virtual BoundPredicate resolve(const std::string& name, const std::string& value) const = 0;
};

// Expression compiled to slot/code pairs for direct evaluation over coded
// feature vectors.
class BoundRule {
 public:
  BoundRule() = default;
  BoundRule(RuleExprPtr expr, const SlotResolver& resolver);

  bool eval(const std::vector<int>& features) const;
  const RuleExpr& expr() const { return *expr_; }

 private:
  struct Node {
    RuleExpr::Kind kind;
    BoundPredicate predicate;
    std::vector<int> children;
  };
  int compile(const RuleExpr& expr, const SlotResolver& resolver);
  bool eval_node(int node, const std::vector<int>& features) const;

  RuleExprPtr expr_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace ccx
