#include "carnot/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace carnot {

namespace {

std::string point_str(const Eigen::VectorXd& p) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

void check_state(const Geometry& g, const Eigen::VectorXd& p, double t) {
  if (!p.allFinite()) {
    std::ostringstream os;
    os << "integration produced a non-finite state at t = " << t;
    throw IntegrationError(os.str());
  }
  if (!g.in_domain(p)) {
    std::ostringstream os;
    os << "trajectory left the domain box at t = " << t << ", state "
       << point_str(p);
    throw IntegrationError(os.str());
  }
}

template <class F>
Eigen::VectorXd rk4_step(const F& f, const Eigen::VectorXd& y, double h) {
  Eigen::VectorXd k1 = f(y);
  Eigen::VectorXd k2 = f(y + 0.5 * h * k1);
  Eigen::VectorXd k3 = f(y + 0.5 * h * k2);
  Eigen::VectorXd k4 = f(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Eigen::VectorXd HorizontalPath::at(double t) const {
  if (times.empty()) throw Error("empty path");
  if (t <= times.front()) return points.front();
  if (t >= times.back()) return points.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  int i = static_cast<int>(it - times.begin());
  double t0 = times[i - 1], t1 = times[i];
  double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * points[i - 1] + w * points[i];
}

std::pair<int, int> HorizontalPath::segment_samples(int seg) const {
  return segment_index.at(seg);
}

Eigen::VectorXd flow(const Geometry& g, const VectorField& x, double t,
                     const Eigen::VectorXd& x0, double step) {
  if (step <= 0.0) throw InputError("flow: step must be positive");
  if (x.dim() != g.dim()) throw InputError("flow: field dimension mismatch");
  check_state(g, x0, 0.0);
  if (t == 0.0) return x0;
  int n_steps = static_cast<int>(std::ceil(std::abs(t) / step));
  double h = t / n_steps;
  auto f = [&](const Eigen::VectorXd& y) { return x(y); };
  Eigen::VectorXd y = x0;
  for (int i = 0; i < n_steps; ++i) {
    y = rk4_step(f, y, h);
    check_state(g, y, (i + 1) * h);
  }
  return y;
}

HorizontalPath integrate_control(const Geometry& g, const Control& u,
                                 const Eigen::VectorXd& x0, double step) {
  if (step <= 0.0) throw InputError("integrate_control: step must be positive");
  if (u.channels() != g.num_fields())
    throw InputError("integrate_control: control has " +
                     std::to_string(u.channels()) + " channels, geometry has " +
                     std::to_string(g.num_fields()) + " fields");
  check_state(g, x0, 0.0);

  HorizontalPath path;
  path.control = u;
  path.length = control_length(u);
  path.times.push_back(0.0);
  path.points.push_back(x0);

  Eigen::VectorXd y = x0;
  for (int j = 0; j < u.segments(); ++j) {
    double t0 = u.breakpoints()[j];
    double dt = u.duration(j);
    Eigen::VectorXd uj = u.value(j).transpose();
    auto f = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(g.dim());
      for (int i = 0; i < g.num_fields(); ++i)
        if (uj[i] != 0.0) v += uj[i] * g.field(i)(p);
      return v;
    };
    int n_sub = static_cast<int>(std::ceil(dt / step));
    if (n_sub < 2) n_sub = 2;
    if (n_sub % 2) ++n_sub;  // even, so Simpson's rule applies per segment
    double h = dt / n_sub;
    int first = static_cast<int>(path.points.size()) - 1;
    for (int m = 1; m <= n_sub; ++m) {
      y = rk4_step(f, y, h);
      double t = (m == n_sub) ? u.breakpoints()[j + 1] : t0 + m * h;
      check_state(g, y, t);
      path.times.push_back(t);
      path.points.push_back(y);
    }
    path.segment_index.emplace_back(first, static_cast<int>(path.points.size()) - 1);
  }
  return path;
}

Eigen::VectorXd endpoint(const Geometry& g, const Control& u,
                         const Eigen::VectorXd& x0, double step) {
  return integrate_control(g, u, x0, step).endpoint();
}

double control_length(const Control& u) {
  double total = 0.0;
  for (int j = 0; j < u.segments(); ++j)
    total += u.value(j).norm() * u.duration(j);
  return total;
}

}  // namespace carnot
