// Small arithmetic expression parser for user-supplied conformal factors and
// chart maps. Variables are x1..xN (ambient coordinates) or u1..uK (chart
// coordinates); the usual operators, parentheses, and elementary functions.
#pragma once

#include <memory>
#include <string>

#include "confstab/linalg.hpp"

namespace confstab {

class Expr {
 public:
  // Throws ConfigError with a position diagnostic on malformed input.
  // `var_prefix` selects the variable family ("x" or "u").
  static Expr parse(const std::string& text, char var_prefix = 'x');

  double eval(const Vec& vars) const;
  // Highest 1-based variable index referenced (0 when constant).
  int max_var() const;
  const std::string& text() const { return text_; }

  struct Node;  // parse-tree node; defined in the implementation

 private:
  explicit Expr(std::shared_ptr<const Node> root, std::string text);
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace confstab
