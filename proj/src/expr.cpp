#include "orbitforge/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace orbitforge {

namespace {

using Fn = std::function<double(const Vector&, double)>;

struct Parser {
  const std::string& text;
  std::size_t pos = 0;
  int n_vars;

  explicit Parser(const std::string& s, int n) : text(s), n_vars(n) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression error at position " + std::to_string(pos) +
                      ": " + msg);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  Fn parse_expression() {
    Fn lhs = parse_term();
    while (true) {
      if (eat('+')) {
        Fn rhs = parse_term();
        lhs = [lhs, rhs](const Vector& x, double t) {
          return lhs(x, t) + rhs(x, t);
        };
      } else if (eat('-')) {
        Fn rhs = parse_term();
        lhs = [lhs, rhs](const Vector& x, double t) {
          return lhs(x, t) - rhs(x, t);
        };
      } else {
        return lhs;
      }
    }
  }

  Fn parse_term() {
    Fn lhs = parse_power();
    while (true) {
      if (eat('*')) {
        Fn rhs = parse_power();
        lhs = [lhs, rhs](const Vector& x, double t) {
          return lhs(x, t) * rhs(x, t);
        };
      } else if (eat('/')) {
        Fn rhs = parse_power();
        lhs = [lhs, rhs](const Vector& x, double t) {
          return lhs(x, t) / rhs(x, t);
        };
      } else {
        return lhs;
      }
    }
  }

  Fn parse_power() {
    Fn base = parse_unary();
    if (eat('^')) {
      Fn exp = parse_power();  // right associative
      return [base, exp](const Vector& x, double t) {
        return std::pow(base(x, t), exp(x, t));
      };
    }
    return base;
  }

  Fn parse_unary() {
    if (eat('-')) {
      Fn inner = parse_unary();
      return [inner](const Vector& x, double t) { return -inner(x, t); };
    }
    if (eat('+')) return parse_unary();
    return parse_primary();
  }

  Fn parse_primary() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of expression");
    const char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return parse_identifier();
    }
    if (c == '(') {
      ++pos;
      Fn inner = parse_expression();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Fn parse_number() {
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos += static_cast<std::size_t>(end - begin);
    return [value](const Vector&, double) { return value; };
  }

  std::vector<Fn> parse_args(std::size_t expected) {
    if (!eat('(')) fail("expected '(' after function name");
    std::vector<Fn> args;
    if (!eat(')')) {
      do {
        args.push_back(parse_expression());
      } while (eat(','));
      if (!eat(')')) fail("expected ')'");
    }
    if (args.size() != expected) {
      fail("function expects " + std::to_string(expected) + " argument(s), got " +
           std::to_string(args.size()));
    }
    return args;
  }

  Fn parse_identifier() {
    const std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) {
      ++pos;
    }
    const std::string name = text.substr(start, pos - start);

    if (name == "t") {
      return [](const Vector&, double t) { return t; };
    }
    if (name == "pi") {
      return [](const Vector&, double) { return kPi; };
    }
    if (name == "e") {
      return [](const Vector&, double) { return std::exp(1.0); };
    }
    if (name.size() > 1 && name[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
      }
      if (digits) {
        const int idx = std::stoi(name.substr(1));
        if (idx < 1 || idx > n_vars) {
          pos = start;
          fail("state variable " + name + " out of range (state has " +
               std::to_string(n_vars) + " entries)");
        }
        return [idx](const Vector& x, double) { return x(idx - 1); };
      }
    }

    using Unary = double (*)(double);
    static const std::pair<const char*, Unary> unary_fns[] = {
        {"sin", std::sin},   {"cos", std::cos},   {"tan", std::tan},
        {"asin", std::asin}, {"acos", std::acos}, {"atan", std::atan},
        {"sqrt", std::sqrt}, {"abs", std::fabs},  {"exp", std::exp},
        {"log", std::log},   {"floor", std::floor}, {"ceil", std::ceil},
    };
    for (const auto& [fname, fp] : unary_fns) {
      if (name == fname) {
        auto args = parse_args(1);
        Fn a = args[0];
        return [fp, a](const Vector& x, double t) { return fp(a(x, t)); };
      }
    }
    if (name == "sign") {
      auto args = parse_args(1);
      Fn a = args[0];
      return [a](const Vector& x, double t) {
        const double v = a(x, t);
        return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      };
    }
    using Binary = double (*)(double, double);
    static const std::pair<const char*, Binary> binary_fns[] = {
        {"atan2", std::atan2},
        {"pow", std::pow},
        {"hypot", std::hypot},
        {"min", [](double a, double b) { return a < b ? a : b; }},
        {"max", [](double a, double b) { return a > b ? a : b; }},
    };
    for (const auto& [fname, fp] : binary_fns) {
      if (name == fname) {
        auto args = parse_args(2);
        Fn a = args[0], b = args[1];
        return [fp, a, b](const Vector& x, double t) {
          return fp(a(x, t), b(x, t));
        };
      }
    }
    pos = start;
    fail("unknown identifier '" + name + "'");
  }
};

}  // namespace

Expr Expr::parse(const std::string& text, int n_state_vars) {
  Parser parser(text, n_state_vars);
  Fn fn = parser.parse_expression();
  parser.skip_ws();
  if (parser.pos != text.size()) {
    parser.fail("trailing input");
  }
  Expr e;
  e.fn_ = std::move(fn);
  return e;
}

}  // namespace orbitforge
