#ifndef CARNOT_RECONSTRUCT_HPP
#define CARNOT_RECONSTRUCT_HPP

#include <cstdint>

#include "carnot/metrics.hpp"

namespace carnot {

/*
 * A function known only through its derivatives along the generators:
 * h_i = X_i f.  The geometry is carried by value; it is small (shared
 * expression trees).
 */
struct HorizontalDerivatives {
  Geometry geometry;
  std::vector<Expr> h;

  HorizontalDerivatives(Geometry g, std::vector<Expr> derivs);
};

/* The exact horizontal derivatives of a symbolic f, for building test and
 * reference families: (X_i f)(x) = sum_j X_i^j(x) d_j f(x). */
std::vector<Expr> horizontal_derivatives_of(const Geometry& g, const Expr& f);

struct ReconstructOptions {
  SteerOptions steer;
};

/*
 * Recover f(target) from f(x0) by integrating sum_i u_i(t) h_i(gamma(t))
 * along a steered horizontal path, with composite Simpson quadrature on each
 * control segment.  Exact for compatible (h_i) up to steering and quadrature
 * error; for incompatible families the result is route-dependent, which
 * path_independence_check measures.
 */
double reconstruct(const HorizontalDerivatives& d, const Eigen::VectorXd& x0,
                   double f0, const Eigen::VectorXd& target,
                   const ReconstructOptions& opts = {});

/* The quadrature alone, over an already-integrated path. */
double line_integral(const HorizontalDerivatives& d, const HorizontalPath& path);

/*
 * Compare reconstruction along the direct route against routes through
 * random intermediate waypoints.  Returns every route value and the largest
 * pairwise discrepancy; needs at least two routes to succeed.
 */
struct PathIndependenceReport {
  std::vector<double> values;
  double max_discrepancy = 0.0;
  int failed_routes = 0;
};

PathIndependenceReport path_independence_check(
    const HorizontalDerivatives& d, const Eigen::VectorXd& x0, double f0,
    const Eigen::VectorXd& target, int trials, std::uint64_t seed,
    const ReconstructOptions& opts = {});

/*
 * Evidence that f is Lipschitz along horizontal paths but not for the
 * Euclidean metric: the largest |f(p) - f(x0)| / path length over a sampled
 * ball, next to |f(x0 + delta e_ray) - f(x0)| / delta along a degenerate ray
 * at shrinking offsets.
 */
struct LipschitzReport {
  double cc_ratio_max = 0.0;
  std::vector<std::pair<double, double>> euclid_ratios;  // (offset, ratio)
  int samples_used = 0;
};

LipschitzReport cc_lipschitz_check(const HorizontalDerivatives& d,
                                   const Expr& f, const Eigen::VectorXd& x0,
                                   double eps, int n_samples,
                                   std::uint64_t seed, int ray_direction = -1,
                                   std::span<const double> offsets = {},
                                   int segments = 8, double step = 1e-3);

}  // namespace carnot

#endif
