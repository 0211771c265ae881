#include "ccx/rule.hpp"

#include <cctype>

namespace ccx {

namespace {

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;
  int column = 1;

  void advance() {
    if (pos < text.size()) {
      if (text[pos] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
      ++pos;
    }
  }
  char peek() const { return pos < text.size() ? text[pos] : '\0'; }
  bool done() const { return pos >= text.size(); }

  void skip_space() {
    while (!done() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw SpecError("rule syntax error at line " + std::to_string(line) + ", column " +
                    std::to_string(column) + ": " + message);
  }
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_value_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

RuleExprPtr parse_expr(Cursor& cur);

RuleExprPtr parse_predicate(Cursor& cur) {
  auto node = std::make_shared<RuleExpr>();
  node->kind = RuleExpr::Kind::Predicate;
  node->line = cur.line;
  node->column = cur.column;
  if (!is_ident_start(cur.peek())) cur.fail("expected a predicate, '!' or '('");
  while (is_ident_char(cur.peek())) {
    node->name.push_back(cur.peek());
    cur.advance();
  }
  cur.skip_space();
  if (cur.peek() != '=') cur.fail("expected '=' after '" + node->name + "'");
  cur.advance();
  cur.skip_space();
  if (!is_value_char(cur.peek())) cur.fail("expected a value after '='");
  while (is_value_char(cur.peek())) {
    node->value.push_back(cur.peek());
    cur.advance();
  }
  return node;
}

RuleExprPtr parse_factor(Cursor& cur) {
  cur.skip_space();
  if (cur.peek() == '!') {
    auto node = std::make_shared<RuleExpr>();
    node->kind = RuleExpr::Kind::Not;
    node->line = cur.line;
    node->column = cur.column;
    cur.advance();
    node->children.push_back(parse_factor(cur));
    return node;
  }
  if (cur.peek() == '(') {
    cur.advance();
    auto inner = parse_expr(cur);
    cur.skip_space();
    if (cur.peek() != ')') cur.fail("expected ')'");
    cur.advance();
    return inner;
  }
  return parse_predicate(cur);
}

RuleExprPtr parse_term(Cursor& cur) {
  auto first = parse_factor(cur);
  cur.skip_space();
  if (cur.peek() != '&') return first;
  auto node = std::make_shared<RuleExpr>();
  node->kind = RuleExpr::Kind::And;
  node->line = first->line;
  node->column = first->column;
  node->children.push_back(std::move(first));
  while (cur.peek() == '&') {
    cur.advance();
    node->children.push_back(parse_factor(cur));
    cur.skip_space();
  }
  return node;
}

RuleExprPtr parse_expr(Cursor& cur) {
  auto first = parse_term(cur);
  cur.skip_space();
  if (cur.peek() != '|') return first;
  auto node = std::make_shared<RuleExpr>();
  node->kind = RuleExpr::Kind::Or;
  node->line = first->line;
  node->column = first->column;
  node->children.push_back(std::move(first));
  while (cur.peek() == '|') {
    cur.advance();
    node->children.push_back(parse_term(cur));
    cur.skip_space();
  }
  return node;
}

void to_string_impl(const RuleExpr& expr, std::string& out, int parent_precedence) {
  // precedence: Or = 0, And = 1, Not = 2, Predicate = 3
  int prec = 3;
  switch (expr.kind) {
    case RuleExpr::Kind::Or:
      prec = 0;
      break;
    case RuleExpr::Kind::And:
      prec = 1;
      break;
    case RuleExpr::Kind::Not:
      prec = 2;
      break;
    case RuleExpr::Kind::Predicate:
      prec = 3;
      break;
  }
  const bool needs_parens = prec < parent_precedence;
  if (needs_parens) out.push_back('(');
  switch (expr.kind) {
    case RuleExpr::Kind::Predicate:
      out += expr.name;
      out.push_back('=');
      out += expr.value;
      break;
    case RuleExpr::Kind::Not:
      out.push_back('!');
      to_string_impl(*expr.children[0], out, 3);
      break;
    case RuleExpr::Kind::And:
      for (std::size_t i = 0; i < expr.children.size(); ++i) {
        if (i) out += " & ";
        to_string_impl(*expr.children[i], out, 2);
      }
      break;
    case RuleExpr::Kind::Or:
      for (std::size_t i = 0; i < expr.children.size(); ++i) {
        if (i) out += " | ";
        to_string_impl(*expr.children[i], out, 1);
      }
      break;
  }
  if (needs_parens) out.push_back(')');
}

}  // namespace

RuleExprPtr parse_rule(const std::string& text) {
  Cursor cur{text};
  cur.skip_space();
  if (cur.done()) cur.fail("empty rule");
  auto expr = parse_expr(cur);
  cur.skip_space();
  if (!cur.done()) cur.fail("unexpected trailing input");
  return expr;
}

std::string rule_to_string(const RuleExpr& expr) {
  std::string out;
  to_string_impl(expr, out, 0);
  return out;
}

BoundRule::BoundRule(RuleExprPtr expr, const SlotResolver& resolver) : expr_(std::move(expr)) {
  root_ = compile(*expr_, resolver);
}

int BoundRule::compile(const RuleExpr& expr, const SlotResolver& resolver) {
  Node node;
  node.kind = expr.kind;
  if (expr.kind == RuleExpr::Kind::Predicate) {
    node.predicate = resolver.resolve(expr.name, expr.value);
  } else {
    for (const auto& child : expr.children) node.children.push_back(compile(*child, resolver));
  }
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

bool BoundRule::eval_node(int index, const std::vector<int>& features) const {
  const Node& node = nodes_[index];
  switch (node.kind) {
    case RuleExpr::Kind::Predicate:
      return features[node.predicate.slot] == node.predicate.code;
    case RuleExpr::Kind::Not:
      return !eval_node(node.children[0], features);
    case RuleExpr::Kind::And:
      for (int child : node.children)
        if (!eval_node(child, features)) return false;
      return true;
    case RuleExpr::Kind::Or:
      for (int child : node.children)
        if (eval_node(child, features)) return true;
      return false;
  }
  return false;
}

bool BoundRule::eval(const std::vector<int>& features) const {
  if (root_ < 0) throw SpecError("rule not bound");
  return eval_node(root_, features);
}

}  // namespace ccx
