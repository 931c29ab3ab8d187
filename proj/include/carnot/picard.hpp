#ifndef CARNOT_PICARD_HPP
#define CARNOT_PICARD_HPP

#include "carnot/integrate.hpp"

namespace carnot {

struct PicardOptions {
  int grid = 512;       // sample points per time piece
  int max_iter = 80;
  double tol = 1e-9;    // sup-norm fixed-point tolerance
  double lipschitz_safety = 1.5;
};

/*
 * Sup-norm Lipschitz bound for the generators over the domain box,
 * estimated by sampling the symbolic Jacobians and taking the induced
 * 1-norm, times the safety factor.
 */
double lipschitz_estimate(const Geometry& g, double safety = 1.5);

/*
 * Solve the horizontal ODE by Picard iteration instead of RK4.  The time
 * interval is cut into pieces whose control L1 norm stays below 1/(3L), which
 * makes the Picard map a contraction on each piece; the fixed points are then
 * chained.  Exists as an independent cross-check of integrate_control.
 *
 * Throws NumericError when an iteration fails to contract (reporting the
 * piece) and IntegrationError when states leave the domain box.
 */
HorizontalPath picard_solve(const Geometry& g, const Control& u,
                            const Eigen::VectorXd& x0,
                            const PicardOptions& opts = {});

}  // namespace carnot

#endif
