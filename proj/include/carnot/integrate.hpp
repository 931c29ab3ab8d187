#ifndef CARNOT_INTEGRATE_HPP
#define CARNOT_INTEGRATE_HPP

#include <Eigen/Dense>
#include <vector>

#include "carnot/control.hpp"
#include "carnot/fields.hpp"

namespace carnot {

/*
 * A sampled horizontal curve: states at increasing times together with the
 * control that produced it.  `length` is the control's L2 path length,
 * sum over segments of |u_j|_2 * dt_j.
 */
struct HorizontalPath {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> points;
  Control control = Control::zero(1);
  double length = 0.0;

  const Eigen::VectorXd& endpoint() const { return points.back(); }
  /* Linear interpolation between recorded samples. */
  Eigen::VectorXd at(double t) const;
  /* Indices [first, last] of the samples covering control segment j.  The
   * integrator guarantees an even number of sub-steps per segment. */
  std::pair<int, int> segment_samples(int seg) const;

  std::vector<std::pair<int, int>> segment_index;  // filled by the integrator
};

/*
 * Classical fixed-step RK4 time-t flow of a single field.  The step count is
 * ceil(|t|/step) and the actual step is t divided by it, so the last step
 * needs no special casing.  Throws IntegrationError if the trajectory leaves
 * the geometry's domain box or stops being finite.
 */
Eigen::VectorXd flow(const Geometry& g, const VectorField& x, double t,
                     const Eigen::VectorXd& x0, double step = 1e-3);

/*
 * Integrate the control system x' = sum_i u_i(t) X_i(x) from x0 over [0,1].
 * `step` caps the RK4 step per unit time; every control segment is cut into
 * an even number of equal sub-steps and all sub-step states are recorded.
 */
HorizontalPath integrate_control(const Geometry& g, const Control& u,
                                 const Eigen::VectorXd& x0, double step = 1e-3);

Eigen::VectorXd endpoint(const Geometry& g, const Control& u,
                         const Eigen::VectorXd& x0, double step = 1e-3);

/* L2 path length of a piecewise-constant control. */
double control_length(const Control& u);

}  // namespace carnot

#endif
