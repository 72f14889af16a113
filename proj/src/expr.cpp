#include "confstab/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "confstab/errors.hpp"

namespace confstab {

struct Expr::Node {
  enum class Kind { constant, variable, unary, binary };
  Kind kind;
  double value = 0.0;
  int var_index = 0;  // 0-based
  char op = 0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

const std::map<std::string, double (*)(double)>& function_table() {
  static const std::map<std::string, double (*)(double)> table = {
      {"sin", std::sin},   {"cos", std::cos},   {"tan", std::tan},  {"exp", std::exp},
      {"log", std::log},   {"sqrt", std::sqrt}, {"abs", std::fabs}, {"sinh", std::sinh},
      {"cosh", std::cosh}, {"tanh", std::tanh}, {"asin", std::asin}, {"acos", std::acos},
      {"atan", std::atan}};
  return table;
}

class Parser {
 public:
  Parser(const std::string& text, char var_prefix) : text_(text), prefix_(var_prefix) {}

  NodePtr run() {
    NodePtr e = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression error at position " + std::to_string(pos_) + ": " + what +
                      " in '" + text_ + "'");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr make_const(double v) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Node::Kind::constant;
    n->value = v;
    return n;
  }

  NodePtr make_binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Node::Kind::binary;
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  NodePtr expression() {
    NodePtr e = term();
    for (;;) {
      if (consume('+'))
        e = make_binary('+', e, term());
      else if (consume('-'))
        e = make_binary('-', e, term());
      else
        return e;
    }
  }

  NodePtr term() {
    NodePtr e = power_operand();
    for (;;) {
      if (consume('*'))
        e = make_binary('*', e, power_operand());
      else if (consume('/'))
        e = make_binary('/', e, power_operand());
      else
        return e;
    }
  }

  NodePtr power_operand() {
    NodePtr base = unary();
    if (consume('^')) return make_binary('^', base, power_operand());  // right assoc
    return base;
  }

  NodePtr unary() {
    if (consume('-')) {
      auto n = std::make_shared<Expr::Node>();
      n->kind = Expr::Node::Kind::unary;
      n->lhs = unary();
      return n;
    }
    return primary();
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expression();
      if (!consume(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    std::size_t end = pos_;
    while (end < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.' ||
            text_[end] == 'e' || text_[end] == 'E' ||
            ((text_[end] == '+' || text_[end] == '-') && end > pos_ &&
             (text_[end - 1] == 'e' || text_[end - 1] == 'E'))))
      ++end;
    try {
      const double v = std::stod(text_.substr(pos_, end - pos_));
      pos_ = end;
      return make_const(v);
    } catch (const std::exception&) {
      fail("malformed number");
    }
  }

  NodePtr identifier() {
    std::size_t end = pos_;
    while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                                  text_[end] == '_'))
      ++end;
    const std::string name = text_.substr(pos_, end - pos_);
    pos_ = end;
    if (name == "pi") return make_const(M_PI);
    if (name == "e") return make_const(M_E);
    if (name.size() > 1 && name[0] == prefix_) {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
      if (digits) {
        const int idx = std::stoi(name.substr(1));
        if (idx < 1) fail("variable indices are 1-based");
        auto n = std::make_shared<Expr::Node>();
        n->kind = Expr::Node::Kind::variable;
        n->var_index = idx - 1;
        return n;
      }
    }
    auto it = function_table().find(name);
    if (it == function_table().end()) fail("unknown identifier '" + name + "'");
    if (!consume('(')) fail("function '" + name + "' needs '('");
    NodePtr arg = expression();
    if (!consume(')')) fail("missing ')' after function argument");
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Node::Kind::unary;
    n->fn = it->second;
    n->lhs = std::move(arg);
    return n;
  }

  const std::string& text_;
  char prefix_;
  std::size_t pos_ = 0;
};

double eval_node(const Expr::Node& n, const Vec& vars) {
  switch (n.kind) {
    case Expr::Node::Kind::constant:
      return n.value;
    case Expr::Node::Kind::variable:
      if (n.var_index >= vars.size())
        throw ConfigError("expression references variable beyond the provided dimension");
      return vars[n.var_index];
    case Expr::Node::Kind::unary: {
      const double a = eval_node(*n.lhs, vars);
      return n.fn ? n.fn(a) : -a;
    }
    case Expr::Node::Kind::binary: {
      const double a = eval_node(*n.lhs, vars);
      const double b = eval_node(*n.rhs, vars);
      switch (n.op) {
        case '+':
          return a + b;
        case '-':
          return a - b;
        case '*':
          return a * b;
        case '/':
          return a / b;
        case '^':
          return std::pow(a, b);
      }
    }
  }
  return 0.0;
}

int max_var_node(const Expr::Node& n) {
  switch (n.kind) {
    case Expr::Node::Kind::constant:
      return 0;
    case Expr::Node::Kind::variable:
      return n.var_index + 1;
    case Expr::Node::Kind::unary:
      return max_var_node(*n.lhs);
    case Expr::Node::Kind::binary:
      return std::max(max_var_node(*n.lhs), max_var_node(*n.rhs));
  }
  return 0;
}

}  // namespace

Expr::Expr(std::shared_ptr<const Node> root, std::string text)
    : root_(std::move(root)), text_(std::move(text)) {}

Expr Expr::parse(const std::string& text, char var_prefix) {
  Parser p(text, var_prefix);
  return Expr(p.run(), text);
}

double Expr::eval(const Vec& vars) const { return eval_node(*root_, vars); }

int Expr::max_var() const { return max_var_node(*root_); }

}  // namespace confstab
