#ifndef CARNOT_CONTROL_HPP
#define CARNOT_CONTROL_HPP

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "carnot/errors.hpp"

namespace carnot {

/*
 * Piecewise-constant control on [0,1]: strictly increasing breakpoints
 * 0 = t_0 < t_1 < ... < t_m = 1 and one value row per segment.  The value on
 * [t_{j-1}, t_j) is row j-1; t = 1 belongs to the last segment.
 */
class Control {
public:
  Control(std::vector<double> breakpoints, Eigen::MatrixXd values);

  static Control zero(int channels);
  static Control constant(const Eigen::VectorXd& value);

  int channels() const { return static_cast<int>(values_.cols()); }
  int segments() const { return static_cast<int>(values_.rows()); }
  std::span<const double> breakpoints() const { return breakpoints_; }
  double duration(int seg) const {
    return breakpoints_[seg + 1] - breakpoints_[seg];
  }
  Eigen::RowVectorXd value(int seg) const { return values_.row(seg); }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::VectorXd at(double t) const;
  int segment_of(double t) const;

  /* L1 norm: sum over channels of the integral of |u_i|. */
  double l1_norm() const;

private:
  std::vector<double> breakpoints_;
  Eigen::MatrixXd values_;
};

/*
 * Concatenation u *_s v: run u time-compressed into [0,s), then v into
 * [s,1], with rates scaled by 1/s and 1/(1-s).  The induced flow is the
 * composition of the two flows and the L1 norms add.
 */
Control concat_controls(const Control& u, const Control& v, double s = 0.5);

/* Time reversal with sign flip: the control of the reversed path. */
Control reverse_control(const Control& u);

/* L1 distance between two controls over a merged breakpoint grid. */
double l1_distance(const Control& u, const Control& v);

/* Same control with extra breakpoints inserted (values duplicated). */
Control refine_control(const Control& u, std::span<const double> extra);

}  // namespace carnot

#endif
