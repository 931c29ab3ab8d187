#include "carnot/metrics.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace carnot {

double path_length(const Geometry& g, const Control& u) {
  if (u.channels() != g.num_fields())
    throw InputError("path_length: control channel count mismatch");
  return control_length(u);
}

namespace {

int frame_rank(const Geometry& g, const Eigen::VectorXd& p, double tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g.frame(p));
  const auto& sv = svd.singularValues();
  if (!sv.size() || sv[0] <= 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > tol * sv[0]) ++r;
  return r;
}

}  // namespace

DistanceResult distance_upper(const Geometry& g, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y, bool refine,
                              const DistanceOptions& opts) {
  DistanceResult res;

  int k = g.num_fields();
  int rank_here = std::min(frame_rank(g, x, 1e-12), frame_rank(g, y, 1e-12));
  if (rank_here < std::min(k, g.dim())) {
    res.warning = "frame drops rank at a query endpoint; lengths near the "
                  "degenerate locus may be badly conditioned";
  }

  res.control = steer(g, x, y, opts.steer);
  res.upper_bound = path_length(g, res.control);
  res.endpoint_error = (endpoint(g, res.control, x, opts.steer.step) - y).norm();
  if (!refine || res.control.l1_norm() == 0.0) return res;

  // Penalty-method refinement: coordinate descent over the value matrix with
  // an increasing endpoint penalty.  Cheap, derivative-free, and safe: the
  // raw control stays the fallback.
  const double step = opts.steer.step;
  Control best = res.control;
  double best_len = res.upper_bound;

  Control work = res.control;
  auto objective = [&](const Control& u, double lambda, double& len_out,
                       double& err_out) {
    len_out = control_length(u);
    Eigen::VectorXd reached;
    try {
      reached = endpoint(g, u, x, step);
    } catch (const NumericError&) {
      err_out = std::numeric_limits<double>::infinity();
      return std::numeric_limits<double>::infinity();
    }
    err_out = (reached - y).norm();
    return len_out + lambda * err_out * err_out;
  };

  for (double lambda = 1e2; lambda <= 1e6; lambda *= 10.0) {
    for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
      bool improved = false;
      for (int seg = 0; seg < work.segments(); ++seg) {
        for (int ch = 0; ch < work.channels(); ++ch) {
          double len, err;
          double current = objective(work, lambda, len, err);
          double scale = std::max(0.05 * std::abs(work.values()(seg, ch)),
                                  0.01 * std::max(1.0, best_len));
          for (double eta = scale; eta > scale / 16.0; eta *= 0.5) {
            bool moved = false;
            for (double dir : {+1.0, -1.0}) {
              Eigen::MatrixXd vals = work.values();
              vals(seg, ch) += dir * eta;
              Control trial(
                  std::vector<double>(work.breakpoints().begin(),
                                      work.breakpoints().end()),
                  std::move(vals));
              double tlen, terr;
              double tobj = objective(trial, lambda, tlen, terr);
              if (tobj < current) {
                work = std::move(trial);
                current = tobj;
                improved = moved = true;
                break;
              }
            }
            if (moved) break;
          }
        }
      }
      if (!improved) break;
    }
    double len, err;
    objective(work, lambda, len, err);
    if (err <= opts.endpoint_tol && len < best_len) {
      best = work;
      best_len = len;
    }
  }

  res.control = best;
  res.upper_bound = best_len;
  res.endpoint_error = (endpoint(g, best, x, step) - y).norm();
  return res;
}

namespace {

/* Deterministic uniform in [0,1) from a dedicated engine. */
double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

/* Gaussian via Box-Muller; avoids distribution objects whose sequences are
 * implementation-defined, so clouds reproduce bit-for-bit everywhere. */
double gaussian(std::mt19937_64& rng) {
  double u1 = 0.0;
  while (u1 == 0.0) u1 = uniform01(rng);
  double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

BallCloud ball_sample(const Geometry& g, const Eigen::VectorXd& x0, double eps,
                      int n_samples, int segments, std::uint64_t seed,
                      double step) {
  if (eps <= 0.0) throw InputError("ball_sample: eps must be positive");
  if (n_samples < 1 || segments < 1)
    throw InputError("ball_sample: counts must be positive");
  if (!g.in_domain(x0))
    throw InputError("ball_sample: center outside domain");

  int k = g.num_fields();
  BallCloud cloud;
  cloud.center = x0;
  cloud.radius = eps;
  cloud.seed = seed;
  cloud.segments = segments;

  std::vector<double> bp(segments + 1);
  for (int j = 0; j <= segments; ++j) bp[j] = double(j) / segments;
  bp.front() = 0.0;
  bp.back() = 1.0;

  for (int idx = 0; idx < n_samples; ++idx) {
    // One private stream per sample index.
    std::seed_seq sq{static_cast<unsigned>(seed & 0xffffffffu),
                     static_cast<unsigned>(seed >> 32),
                     static_cast<unsigned>(idx)};
    std::mt19937_64 rng(sq);
    for (int attempt = 0;; ++attempt) {
      if (attempt > 200)
        throw NumericError("ball_sample: sample " + std::to_string(idx) +
                           " keeps leaving the domain");
      double len = eps * (1.0 - uniform01(rng));  // length in (0, eps]
      Eigen::MatrixXd vals(segments, k);
      for (int s = 0; s < segments; ++s) {
        Eigen::VectorXd dir(k);
        if (k == 1) {
          dir[0] = uniform01(rng) < 0.5 ? -1.0 : 1.0;
        } else {
          double nrm = 0.0;
          while (nrm == 0.0) {
            for (int c = 0; c < k; ++c) dir[c] = gaussian(rng);
            nrm = dir.norm();
          }
          dir /= nrm;
        }
        vals.row(s) = (len * dir).transpose();
      }
      Control u(bp, std::move(vals));
      try {
        Eigen::VectorXd end = endpoint(g, u, x0, step);
        cloud.endpoints.push_back(std::move(end));
        cloud.lengths.push_back(control_length(u));
        break;
      } catch (const IntegrationError&) {
        ++cloud.discarded;
      }
    }
  }
  return cloud;
}

ExponentFit boxfit_exponent(const Geometry& g, const Eigen::VectorXd& x0,
                            int direction, std::span<const double> radii,
                            bool refine, const DistanceOptions& opts) {
  if (direction < 0 || direction >= g.dim())
    throw InputError("boxfit_exponent: direction out of range");
  if (radii.size() < 2)
    throw InputError("boxfit_exponent: need at least two radii");

  ExponentFit fit;
  for (double h : radii) {
    if (h <= 0.0) throw InputError("boxfit_exponent: radii must be positive");
    Eigen::VectorXd y = x0;
    y[direction] += h;
    try {
      DistanceResult d = distance_upper(g, x0, y, refine, opts);
      fit.radii.push_back(h);
      fit.log_h.push_back(std::log(h));
      fit.log_d.push_back(std::log(d.upper_bound));
    } catch (const NumericError&) {
      fit.dropped.push_back(h);
    }
  }
  if (fit.log_h.size() < 2)
    throw NumericError("boxfit_exponent: fewer than two radii succeeded");

  double mx = 0.0, my = 0.0;
  std::size_t m = fit.log_h.size();
  for (std::size_t i = 0; i < m; ++i) {
    mx += fit.log_h[i];
    my += fit.log_d[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (fit.log_h[i] - mx) * (fit.log_h[i] - mx);
    sxy += (fit.log_h[i] - mx) * (fit.log_d[i] - my);
  }
  fit.slope = sxy / sxx;
  return fit;
}

}  // namespace carnot
