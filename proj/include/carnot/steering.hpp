#ifndef CARNOT_STEERING_HPP
#define CARNOT_STEERING_HPP

#include "carnot/flows.hpp"

namespace carnot {

struct SteerOptions {
  double step = 1e-3;         // RK4 step per unit time
  double tol = 1e-8;          // endpoint tolerance
  int max_depth = 4;          // bracket depth for the growth vector
  double rank_tol = 1e-9;
  int max_newton = 50;
  double initial_radius = 0.5;
  double min_radius = 1e-6;
  double max_condition = 1e6;
  int max_subdivision = 6;    // waypoint splitting rounds in steer()
};

/*
 * Local steering chart at a base point.
 *
 * A bracket basis B_1..B_n from the growth vector gives coordinates
 * t = (t_1..t_n) via
 *
 *   psi(t) = chi_n(s_n) o ... o chi_1(s_1) (x0),
 *
 * where s_i = sigma_i^{-1}(t_i) re-parametrizes the bracket flow of B_i so
 * that psi is C^1 near 0 with d psi / d t_i |_0 = B_i(X)(x0) / w_i!.  For
 * even weights the flow only moves one way, so negative t_i switches to the
 * outer-swapped word C_i, whose leading term has the opposite sign; a
 * matched-derivative argument makes the two halves glue to a C^1 map.
 *
 * The trust radius rho is found by backtracking from initial_radius until
 * psi is defined on the weighted box |t_i| <= rho^{w_i} and its numerical
 * Jacobian at 0 is invertible with condition below max_condition.
 */
class SteeringChart {
public:
  const Geometry& geometry() const { return *geom_; }
  const Eigen::VectorXd& base() const { return base_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  const std::vector<FormalBracket>& basis() const { return basis_; }
  const std::vector<int>& weights() const { return weights_; }
  const std::vector<FormalBracket>& swapped() const { return swapped_; }
  /* Total elementary flow legs across all chart coordinates. */
  int segment_count() const { return segment_count_; }
  double trust_radius() const { return rho_; }
  double condition() const { return condition_; }
  const Eigen::MatrixXd& jacobian0() const { return jacobian0_; }

  Eigen::VectorXd psi(const Eigen::VectorXd& t) const;
  /* Elementary legs realizing psi(t), in application order. */
  std::vector<FlowSegment> unroll(const Eigen::VectorXd& t) const;
  /* s_i(t_i): signed root of t_i / w_i!. */
  double reparam(int i, double ti) const;

private:
  friend SteeringChart build_chart(const Geometry&, const Eigen::VectorXd&,
                                   int, const SteerOptions&);
  const Geometry* geom_ = nullptr;  // not owned; must outlive the chart
  Eigen::VectorXd base_;
  std::vector<FormalBracket> basis_;
  std::vector<int> weights_;
  std::vector<FormalBracket> swapped_;
  int segment_count_ = 0;
  double rho_ = 0.0;
  double condition_ = 0.0;
  Eigen::MatrixXd jacobian0_;
  double step_ = 1e-3;
};

SteeringChart build_chart(const Geometry& g, const Eigen::VectorXd& x0,
                          int max_depth, const SteerOptions& opts = {});

struct SteerResult {
  Control control = Control::zero(1);
  HorizontalPath path;
  Eigen::VectorXd t;                  // chart coordinates reached
  std::vector<FlowSegment> segments;  // elementary legs behind the control
  int newton_iters = 0;
  double endpoint_error = 0.0;
};

/*
 * Invert psi around the target with a damped Newton iteration (forward
 * differences; psi is only C^1, so steps are halved until the residual
 * drops).  The result control plays the legs back as unit-direction
 * piecewise-constant segments on [0,1] with durations proportional to leg
 * times, so its path length equals the summed leg durations.
 */
SteerResult steer_local(const SteeringChart& chart,
                        const Eigen::VectorXd& target,
                        const SteerOptions& opts = {});

/*
 * Global steering: walk waypoints along the straight segment from x0 to the
 * target, spaced at half the local trust radius, re-charting at each reached
 * point.  Legs that fail are split further, up to opts.max_subdivision
 * rounds.  The returned control concatenates all legs with time weights
 * proportional to their lengths and reproduces the target within opts.tol.
 */
Control steer(const Geometry& g, const Eigen::VectorXd& x0,
              const Eigen::VectorXd& target, const SteerOptions& opts = {});

}  // namespace carnot

#endif
