#ifndef CARNOT_FLOWS_HPP
#define CARNOT_FLOWS_HPP

#include "carnot/integrate.hpp"

namespace carnot {

/* One elementary leg of an unrolled bracket flow: follow generator `field`
 * (1-based) for signed time `duration`. */
struct FlowSegment {
  int field;
  double duration;
};

/*
 * Expand the group-commutator flow of a bracket word into elementary legs.
 * A leaf is its own flow; for [A,B] the composite runs A, then B, then A
 * inverted, then B inverted, each at parameter t.  Inversion reverses the
 * leg order and flips every sign.
 */
std::vector<FlowSegment> unroll_bracket(const FormalBracket& b, double t,
                                        bool inverse = false);

/*
 * Evaluate the bracket flow at parameter t by running the unrolled legs with
 * the RK4 integrator.  For a word of weight k this curve has vanishing
 * derivatives at t = 0 up to order k-1, and its k-th derivative over k!
 * equals the bracket field's value.
 */
Eigen::VectorXd bracket_flow(const Geometry& g, const FormalBracket& b,
                             double t, const Eigen::VectorXd& x,
                             double step = 1e-3);

/*
 * Finite-difference verification of that derivative structure at a point.
 * Central stencils of minimal width estimate derivatives of order 1..k, each
 * Richardson-extrapolated from steps h and h/2.  rel_err compares the k-th
 * estimate over k! against the symbolic bracket value (absolute error when
 * the symbolic value vanishes).  `cancellation` flags stencils whose curve
 * samples are too close to the base point to resolve.
 */
struct MichorReport {
  std::vector<Eigen::VectorXd> order_estimates;  // orders 1..k
  double low_order_max = 0.0;                    // max norm over orders < k
  Eigen::VectorXd kth_estimate;                  // order-k estimate / k!
  Eigen::VectorXd reference;                     // symbolic bracket value
  double rel_err = 0.0;
  bool cancellation = false;
};

MichorReport michor_check(const Geometry& g, const FormalBracket& b,
                          const Eigen::VectorXd& x, double h,
                          double step = 1e-3);

}  // namespace carnot

#endif
