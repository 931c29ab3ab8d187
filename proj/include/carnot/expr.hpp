#ifndef CARNOT_EXPR_HPP
#define CARNOT_EXPR_HPP

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "carnot/errors.hpp"

namespace carnot {

/*
 * Immutable scalar expression tree over named coordinates.
 *
 * Supported operations: + - * / unary minus, pow with a constant exponent,
 * and the functions sin cos tan exp log sqrt abs sgn.  Construction applies
 * constant folding and the 0/1 identities, nothing stronger, so a tree built
 * from source text stays recognizable.
 *
 * Conventions: sgn(0) = 0, d(abs) = sgn, d(sgn) = 0.  abs and sgn are treated
 * pointwise; the derivative rules are exact away from the kink and give the
 * usual one-sided values on it.
 */
class Expr {
public:
  enum class Kind { Constant, Coordinate, Negate, Add, Sub, Mul, Div, Pow, Func };
  enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Sgn };

  Expr();  // constant 0

  static Expr constant(double value);
  static Expr coordinate(int index);
  static Expr negate(Expr e);
  static Expr add(Expr a, Expr b);
  static Expr sub(Expr a, Expr b);
  static Expr mul(Expr a, Expr b);
  static Expr div(Expr a, Expr b);
  static Expr pow(Expr base, double exponent);
  static Expr apply(Fn f, Expr arg);

  Kind kind() const;
  double constant_value() const;   // Constant nodes
  int coordinate_index() const;    // Coordinate nodes
  double exponent() const;         // Pow nodes
  Fn fn() const;                   // Func nodes
  const Expr child(int i) const;   // 0 = left/only, 1 = right
  int arity() const;

  bool is_constant() const { return kind() == Kind::Constant; }
  bool is_constant(double v) const;

  /* Evaluate at a point.  Throws DomainError on log/sqrt/pow/division
   * violations.  The point must have at least max_coordinate()+1 entries. */
  double operator()(const Eigen::VectorXd& p) const;

  /* Partial derivative with respect to coordinate index `coord`. */
  Expr derivative(int coord) const;

  /* Largest coordinate index appearing in the tree, or -1. */
  int max_coordinate() const;

  /* Canonical text form.  parse_expr(e.str(), names) rebuilds the same tree
   * (coordinate i is printed with names[i]). */
  std::string str(std::span<const std::string> coord_names) const;

  /* Structural equality (same shape, same constants). */
  bool same_as(const Expr& other) const;

private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/*
 * Parse expression text.  Grammar, loosest binding first:
 *
 *   expr   := term (('+'|'-') term)*
 *   term   := factor (('*'|'/') factor)*
 *   factor := unary ('^' constant)?
 *   unary  := '-' unary | atom
 *   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
 *
 * Unary minus binds tighter than '^', so "-x^2" means (-x)^2.  Exponents must
 * be constants.  Identifiers must be coordinate names from `coords` or one of
 * the built-in functions.  Errors carry the byte offset of the offender.
 */
Expr parse_expr(std::string_view text, std::span<const std::string> coords);

const char* fn_name(Expr::Fn f);

}  // namespace carnot

#endif
