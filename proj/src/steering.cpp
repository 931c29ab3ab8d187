#include "carnot/steering.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace carnot {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::string vec_str(const Eigen::VectorXd& p) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

double condition_of(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  double lo = sv[sv.size() - 1];
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return sv[0] / lo;
}

}  // namespace

double SteeringChart::reparam(int i, double ti) const {
  int w = weights_[i];
  if (w == 1) return ti;
  double r = std::pow(std::abs(ti) / factorial(w), 1.0 / w);
  return ti >= 0.0 ? r : -r;
}

std::vector<FlowSegment> SteeringChart::unroll(const Eigen::VectorXd& t) const {
  std::vector<FlowSegment> legs;
  for (int i = 0; i < dim(); ++i) {
    double s = reparam(i, t[i]);
    if (s == 0.0) continue;
    // Even weights flow one way only; negative s switches to the outer-swapped
    // word, evaluated at the signed parameter.
    const FormalBracket& word =
        (weights_[i] % 2 == 0 && s < 0.0) ? swapped_[i] : basis_[i];
    auto part = unroll_bracket(word, s);
    legs.insert(legs.end(), part.begin(), part.end());
  }
  return legs;
}

Eigen::VectorXd SteeringChart::psi(const Eigen::VectorXd& t) const {
  if (t.size() != dim()) throw InputError("psi: wrong chart dimension");
  Eigen::VectorXd y = base_;
  for (const FlowSegment& leg : unroll(t))
    if (leg.duration != 0.0)
      y = flow(*geom_, geom_->field(leg.field - 1), leg.duration, y, step_);
  return y;
}

SteeringChart build_chart(const Geometry& g, const Eigen::VectorXd& x0,
                          int max_depth, const SteerOptions& opts) {
  GrowthVector gv = growth_vector(g, x0, max_depth, opts.rank_tol);
  if (!gv.bracket_generating) {
    std::ostringstream os;
    os << "point " << vec_str(x0)
       << " is not bracket generating at depth " << max_depth
       << "; growth vector (";
    for (std::size_t i = 0; i < gv.ranks.size(); ++i)
      os << (i ? "," : "") << gv.ranks[i];
    os << ")";
    throw SteerError(os.str());
  }

  SteeringChart chart;
  chart.geom_ = &g;
  chart.base_ = x0;
  chart.basis_ = gv.basis;
  chart.weights_ = gv.weights;
  chart.step_ = opts.step;
  for (const auto& b : chart.basis_) {
    chart.swapped_.push_back(b.swap_outer());
    chart.segment_count_ +=
        static_cast<int>(unroll_bracket(b, 1.0).size());
  }

  int n = chart.dim();
  double rho = opts.initial_radius;
  for (; rho >= opts.min_radius; rho *= 0.5) {
    bool ok = true;
    // Probe the weighted box: psi at every corner and the axis extremes must
    // stay inside the domain.
    try {
      for (int mask = 0; mask < (1 << n) && ok; ++mask) {
        Eigen::VectorXd t(n);
        for (int i = 0; i < n; ++i)
          t[i] = ((mask >> i) & 1 ? 1.0 : -1.0) *
                 std::pow(rho, chart.weights_[i]);
        chart.psi(t);
      }
    } catch (const NumericError&) {
      ok = false;
    } catch (const DomainError&) {
      ok = false;
    }
    if (!ok) continue;

    // Central-difference Jacobian at 0.
    Eigen::MatrixXd jac(n, n);
    try {
      for (int i = 0; i < n; ++i) {
        double delta = 1e-4 * std::pow(rho, chart.weights_[i]);
        Eigen::VectorXd tp = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd tm = Eigen::VectorXd::Zero(n);
        tp[i] = delta;
        tm[i] = -delta;
        jac.col(i) = (chart.psi(tp) - chart.psi(tm)) / (2.0 * delta);
      }
    } catch (const NumericError&) {
      continue;
    } catch (const DomainError&) {
      continue;
    }
    double cond = condition_of(jac);
    if (std::isfinite(cond) && cond < opts.max_condition) {
      chart.rho_ = rho;
      chart.condition_ = cond;
      chart.jacobian0_ = jac;
      return chart;
    }
  }
  throw SteerError("no usable trust radius at " + vec_str(x0) +
                   " (backtracked below " + std::to_string(opts.min_radius) +
                   ")");
}

namespace {

/*
 * Play elementary legs back as a control on [0,1]: every leg becomes one
 * segment along a signed coordinate direction, with duration proportional to
 * the leg time and rate scaled so the leg's flow time is reproduced.  With
 * rate magnitude T = sum |tau_m| on every segment, the L2 path length is
 * sum T * dt_m = T, the summed leg durations.
 */
Control control_from_segments(const std::vector<FlowSegment>& legs,
                              int channels) {
  std::vector<FlowSegment> nz;
  for (const auto& leg : legs)
    if (leg.duration != 0.0) nz.push_back(leg);
  double total = 0.0;
  for (const auto& leg : nz) total += std::abs(leg.duration);
  if (nz.empty() || total <= 0.0) return Control::zero(channels);

  std::vector<double> bp{0.0};
  Eigen::MatrixXd vals = Eigen::MatrixXd::Zero(nz.size(), channels);
  int row = 0;
  double acc = 0.0;
  for (std::size_t m = 0; m < nz.size(); ++m) {
    acc += std::abs(nz[m].duration);
    double end = (m + 1 == nz.size()) ? 1.0 : acc / total;
    if (end <= bp.back()) continue;  // underflow-tiny leg: fold away
    bp.push_back(end);
    vals(row++, nz[m].field - 1) = nz[m].duration > 0.0 ? total : -total;
  }
  if (row == 0) return Control::zero(channels);
  vals.conservativeResize(row, channels);
  bp.back() = 1.0;
  return Control(std::move(bp), std::move(vals));
}

SteerOptions with_tol(SteerOptions o, double tol) {
  o.tol = tol;
  return o;
}

}  // namespace

SteerResult steer_local(const SteeringChart& chart,
                        const Eigen::VectorXd& target,
                        const SteerOptions& opts) {
  int n = chart.dim();
  if (target.size() != n) throw InputError("steer_local: dimension mismatch");
  const Geometry& g = chart.geometry();

  auto box_limit = [&](int i) {
    return std::pow(chart.trust_radius(), chart.weights()[i]);
  };
  auto clamp_box = [&](Eigen::VectorXd t) {
    for (int i = 0; i < n; ++i) {
      double lim = box_limit(i);
      t[i] = std::clamp(t[i], -lim, lim);
    }
    return t;
  };

  Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd value = chart.base();
  double residual = (value - target).norm();
  Eigen::VectorXd best_t = t;
  double best_residual = residual;
  int iters = 0;

  for (; iters < opts.max_newton && best_residual > opts.tol; ++iters) {
    Eigen::MatrixXd jac(n, n);
    if (iters == 0) {
      jac = chart.jacobian0();
    } else {
      // Forward differences around the current iterate.  psi is only C^1, so
      // there is no point in high-order stencils here.
      for (int i = 0; i < n; ++i) {
        double delta = std::max(1e-8, 1e-6 * box_limit(i));
        Eigen::VectorXd tp = t;
        tp[i] += delta;
        jac.col(i) = (chart.psi(clamp_box(tp)) - value) / delta;
      }
    }
    Eigen::VectorXd dir = jac.colPivHouseholderQr().solve(target - value);
    if (!dir.allFinite()) break;

    // Damping: halve the step until the residual improves.
    double lambda = 1.0;
    bool accepted = false;
    for (int half = 0; half < 20; ++half, lambda *= 0.5) {
      Eigen::VectorXd trial = clamp_box(t + lambda * dir);
      Eigen::VectorXd trial_value;
      try {
        trial_value = chart.psi(trial);
      } catch (const NumericError&) {
        continue;
      } catch (const DomainError&) {
        continue;
      }
      double trial_residual = (trial_value - target).norm();
      if (trial_residual < residual) {
        t = trial;
        value = trial_value;
        residual = trial_residual;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (residual < best_residual) {
      best_residual = residual;
      best_t = t;
    }
  }

  if (best_residual > opts.tol) {
    bool on_boundary = false;
    for (int i = 0; i < n; ++i)
      if (std::abs(best_t[i]) >= 0.999 * box_limit(i)) on_boundary = true;
    std::ostringstream os;
    os << "steer_local: "
       << (on_boundary ? "target outside the trust region"
                       : "Newton iteration stagnated")
       << " (best residual " << best_residual << ", tol " << opts.tol
       << ", target " << vec_str(target) << ")";
    throw SteerError(os.str());
  }

  SteerResult res;
  res.t = best_t;
  res.segments = chart.unroll(best_t);
  res.newton_iters = iters;
  res.control = control_from_segments(res.segments, g.num_fields());
  res.path = integrate_control(g, res.control, chart.base(), opts.step);
  res.endpoint_error = (res.path.endpoint() - target).norm();
  return res;
}

Control steer(const Geometry& g, const Eigen::VectorXd& x0,
              const Eigen::VectorXd& target, const SteerOptions& opts) {
  if (x0.size() != g.dim() || target.size() != g.dim())
    throw InputError("steer: dimension mismatch");
  if (!g.in_domain(x0)) throw InputError("steer: start point outside domain");
  if (!g.in_domain(target))
    throw InputError("steer: target point outside domain");

  if ((target - x0).norm() == 0.0) return Control::zero(g.num_fields());

  SteeringChart first = build_chart(g, x0, opts.max_depth, opts);
  double spacing = 0.5 * first.trust_radius();
  int legs = std::max(1, static_cast<int>(std::ceil((target - x0).norm() / spacing)));

  // Waypoints along the straight segment; failed legs get split in place.
  std::vector<Eigen::VectorXd> pending;
  for (int j = legs; j >= 1; --j)
    pending.push_back(x0 + (target - x0) * (double(j) / legs));

  std::vector<FlowSegment> all_legs;
  Eigen::VectorXd current = x0;
  bool have_first = true;
  double leg_tol = std::max(1e-12, 0.25 * opts.tol);
  int splits = 0;
  int waypoint_index = 0;

  while (!pending.empty()) {
    Eigen::VectorXd next = pending.back();
    SteeringChart chart = have_first && (current - x0).norm() == 0.0
                              ? first
                              : [&] {
                                  try {
                                    return build_chart(g, current,
                                                       opts.max_depth, opts);
                                  } catch (const SteerError& e) {
                                    throw SteerError(
                                        "steer: waypoint " +
                                        std::to_string(waypoint_index) + ": " +
                                        e.what());
                                  }
                                }();
    have_first = false;
    try {
      SteerResult local = steer_local(chart, next, with_tol(opts, leg_tol));
      all_legs.insert(all_legs.end(), local.segments.begin(),
                      local.segments.end());
      current = local.path.endpoint();
      pending.pop_back();
      ++waypoint_index;
    } catch (const SteerError&) {
      if (++splits > opts.max_subdivision * std::max(1, legs))
        throw SteerError(
            "steer: local steering kept failing after subdividing waypoints " +
            std::to_string(splits) + " times");
      pending.push_back(0.5 * (current + next));
    }
  }

  Control out = control_from_segments(all_legs, g.num_fields());
  Eigen::VectorXd reached = endpoint(g, out, x0, opts.step);
  double err = (reached - target).norm();
  if (err > opts.tol) {
    std::ostringstream os;
    os << "steer: accumulated endpoint error " << err << " exceeds tol "
       << opts.tol;
    throw SteerError(os.str());
  }
  return out;
}

}  // namespace carnot
