#pragma once

#include "orbitforge/numerics.hpp"

#include <string>

/// A small arithmetic expression language for user-supplied control laws:
/// state variables x1..xn and time t, the usual operators (+ - * / ^ with
/// unary minus), the constants pi and e, and a fixed set of math functions
/// (sin cos tan asin acos atan atan2 sqrt abs exp log sign floor ceil pow
/// min max hypot).
namespace orbitforge {

class Expr {
 public:
  /// Parses `text` against a state of dimension n_state_vars. Throws
  /// ConfigError (with character position) on syntax errors, unknown
  /// identifiers, or out-of-range state variables.
  static Expr parse(const std::string& text, int n_state_vars);

  double eval(const Vector& x, double t) const { return fn_(x, t); }

 private:
  std::function<double(const Vector&, double)> fn_;
};

}  // namespace orbitforge
