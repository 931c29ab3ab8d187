#include "carnot/control.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace carnot {

Control::Control(std::vector<double> breakpoints, Eigen::MatrixXd values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (breakpoints_.size() < 2)
    throw InputError("control needs at least two breakpoints");
  if (breakpoints_.front() != 0.0 || breakpoints_.back() != 1.0)
    throw InputError("control breakpoints must start at 0 and end at 1");
  for (std::size_t i = 1; i < breakpoints_.size(); ++i)
    if (!(breakpoints_[i - 1] < breakpoints_[i]))
      throw InputError("control breakpoints must be strictly increasing");
  if (values_.rows() != static_cast<Eigen::Index>(breakpoints_.size()) - 1)
    throw InputError("control needs one value row per segment");
  if (values_.cols() < 1) throw InputError("control needs at least one channel");
  if (!values_.allFinite()) throw InputError("control values must be finite");
}

Control Control::zero(int channels) {
  return Control({0.0, 1.0}, Eigen::MatrixXd::Zero(1, channels));
}

Control Control::constant(const Eigen::VectorXd& value) {
  return Control({0.0, 1.0}, value.transpose());
}

int Control::segment_of(double t) const {
  if (t < 0.0 || t > 1.0) throw InputError("control time outside [0,1]");
  // Right-continuous convention; t = 1 falls into the final segment.
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  int seg = static_cast<int>(it - breakpoints_.begin()) - 1;
  return std::min(seg, segments() - 1);
}

Eigen::VectorXd Control::at(double t) const {
  return values_.row(segment_of(t)).transpose();
}

double Control::l1_norm() const {
  double total = 0.0;
  for (int j = 0; j < segments(); ++j)
    total += values_.row(j).cwiseAbs().sum() * duration(j);
  return total;
}

Control concat_controls(const Control& u, const Control& v, double s) {
  if (!(s > 0.0 && s < 1.0)) throw InputError("concat: s must lie in (0,1)");
  if (u.channels() != v.channels())
    throw InputError("concat: channel count mismatch");
  int m = u.segments(), l = v.segments();
  std::vector<double> bp;
  bp.reserve(m + l + 1);
  Eigen::MatrixXd vals(m + l, u.channels());
  bp.push_back(0.0);
  for (int j = 0; j < m; ++j) {
    bp.push_back(u.breakpoints()[j + 1] * s);
    vals.row(j) = u.value(j) / s;
  }
  // bp now ends exactly at s (1 * s).
  for (int j = 0; j < l; ++j) {
    bp.push_back(j + 1 == l ? 1.0 : s + v.breakpoints()[j + 1] * (1.0 - s));
    vals.row(m + j) = v.value(j) / (1.0 - s);
  }
  return Control(std::move(bp), std::move(vals));
}

Control reverse_control(const Control& u) {
  int m = u.segments();
  std::vector<double> bp(m + 1);
  Eigen::MatrixXd vals(m, u.channels());
  bp[0] = 0.0;
  bp[m] = 1.0;
  for (int j = 1; j < m; ++j) bp[j] = 1.0 - u.breakpoints()[m - j];
  for (int j = 0; j < m; ++j) vals.row(j) = -u.value(m - 1 - j);
  return Control(std::move(bp), std::move(vals));
}

double l1_distance(const Control& u, const Control& v) {
  if (u.channels() != v.channels())
    throw InputError("l1_distance: channel count mismatch");
  std::set<double> grid(u.breakpoints().begin(), u.breakpoints().end());
  grid.insert(v.breakpoints().begin(), v.breakpoints().end());
  double total = 0.0;
  double prev = 0.0;
  for (double t : grid) {
    if (t <= prev) continue;
    double mid = 0.5 * (prev + t);
    total += (u.at(mid) - v.at(mid)).cwiseAbs().sum() * (t - prev);
    prev = t;
  }
  return total;
}

Control refine_control(const Control& u, std::span<const double> extra) {
  std::set<double> grid(u.breakpoints().begin(), u.breakpoints().end());
  for (double t : extra) {
    if (t < 0.0 || t > 1.0)
      throw InputError("refine_control: breakpoints must lie in [0,1]");
    grid.insert(t);
  }
  std::vector<double> bp(grid.begin(), grid.end());
  Eigen::MatrixXd vals(bp.size() - 1, u.channels());
  for (std::size_t j = 0; j + 1 < bp.size(); ++j)
    vals.row(j) = u.at(0.5 * (bp[j] + bp[j + 1])).transpose();
  return Control(std::move(bp), std::move(vals));
}

}  // namespace carnot
