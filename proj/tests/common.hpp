#ifndef CARNOT_TESTS_COMMON_HPP
#define CARNOT_TESTS_COMMON_HPP

#include <random>
#include <string>
#include <vector>

#include "carnot/fields.hpp"

namespace carnot::testing {

inline std::vector<std::string> xyz() { return {"x", "y", "z"}; }

inline Expr parse3(const std::string& s) {
  static const std::vector<std::string> names = {"x", "y", "z"};
  return parse_expr(s, names);
}

/* The standard 3D example: two generators whose bracket fills the missing
 * vertical direction. */
inline Geometry heisenberg() {
  std::vector<std::string> names = xyz();
  VectorField x1({parse_expr("1", names), parse_expr("0", names),
                  parse_expr("-y/2", names)});
  VectorField x2({parse_expr("0", names), parse_expr("1", names),
                  parse_expr("x/2", names)});
  return Geometry(names, {x1, x2});
}

/* Degenerate planar example: the second generator vanishes identically for
 * x <= 0 together with all its derivatives, so no bracket ever recovers the
 * y-direction on that side. */
inline Geometry grushin() {
  std::vector<std::string> names = {"x", "y"};
  VectorField x1({parse_expr("1", names), parse_expr("0", names)});
  VectorField x2({parse_expr("0", names),
                  parse_expr("((x + abs(x))/2)^3", names)});
  return Geometry(names, {x1, x2});
}

/* Full-rank comparison case: the Euclidean plane. */
inline Geometry plane() {
  std::vector<std::string> names = {"x", "y"};
  VectorField x1({parse_expr("1", names), parse_expr("0", names)});
  VectorField x2({parse_expr("0", names), parse_expr("1", names)});
  return Geometry(names, {x1, x2});
}

inline Eigen::VectorXd vec3(double x, double y, double z) {
  Eigen::VectorXd v(3);
  v << x, y, z;
  return v;
}

inline Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

/* Random polynomial vector fields of degree <= 2 with small coefficients,
 * for bracket identity checks. */
inline VectorField random_polynomial_field(std::mt19937& rng, int dim) {
  std::uniform_real_distribution<double> coeff(-0.5, 0.5);
  std::vector<Expr> comps;
  for (int i = 0; i < dim; ++i) {
    Expr acc = Expr::constant(coeff(rng));
    for (int a = 0; a < dim; ++a) {
      acc = Expr::add(acc, Expr::mul(Expr::constant(coeff(rng)),
                                     Expr::coordinate(a)));
      for (int b = a; b < dim; ++b)
        acc = Expr::add(
            acc, Expr::mul(Expr::constant(coeff(rng)),
                           Expr::mul(Expr::coordinate(a), Expr::coordinate(b))));
    }
    comps.push_back(acc);
  }
  return VectorField(std::move(comps));
}

inline Eigen::VectorXd random_point(std::mt19937& rng, int dim, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Eigen::VectorXd p(dim);
  for (int i = 0; i < dim; ++i) p[i] = u(rng);
  return p;
}

/* Dyadic rationals make breakpoint reversal and norm bookkeeping exact in
 * floating point, which the algebraic identities below rely on. */
inline double random_dyadic(std::mt19937& rng, int denom_pow = 10) {
  std::uniform_int_distribution<int> u(0, 1 << denom_pow);
  return double(u(rng)) / double(1 << denom_pow);
}

}  // namespace carnot::testing

#endif
