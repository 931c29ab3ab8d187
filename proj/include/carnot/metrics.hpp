#ifndef CARNOT_METRICS_HPP
#define CARNOT_METRICS_HPP

#include <cstdint>

#include "carnot/steering.hpp"

namespace carnot {

/* L2 path length of a control for this geometry (validates channel count). */
double path_length(const Geometry& g, const Control& u);

struct DistanceOptions {
  SteerOptions steer;
  double endpoint_tol = 1e-6;  // validity gate for refined candidates
  int sweeps = 3;              // coordinate-descent sweeps per penalty stage
};

struct DistanceResult {
  double upper_bound = 0.0;
  Control control = Control::zero(1);
  double endpoint_error = 0.0;
  std::string warning;  // set when the frame drops rank at an endpoint
};

/*
 * Upper bound for the Carnot-Caratheodory distance: steer, then optionally
 * shorten the steering control by coordinate descent on the penalty
 * functional length + lambda |endpoint - y|^2 with lambda ramped 1e2..1e6.
 * Breakpoints stay fixed; only values move.  The best control whose endpoint
 * error passes endpoint_tol wins, and the refined bound never exceeds the
 * raw steering length.
 */
DistanceResult distance_upper(const Geometry& g, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y, bool refine = false,
                              const DistanceOptions& opts = {});

/*
 * Random endpoints of horizontal paths of length at most eps.  Each sample
 * draws its own RNG stream from (seed, index), so results do not depend on
 * evaluation order.  Samples whose path leaves the domain box are discarded
 * and redrawn from the same stream.
 */
struct BallCloud {
  Eigen::VectorXd center;
  double radius = 0.0;
  std::vector<Eigen::VectorXd> endpoints;
  std::vector<double> lengths;
  std::uint64_t seed = 0;
  int segments = 0;
  int discarded = 0;
};

BallCloud ball_sample(const Geometry& g, const Eigen::VectorXd& x0, double eps,
                      int n_samples, int segments, std::uint64_t seed,
                      double step = 1e-3);

/*
 * Log-log fit of distance_upper(x0, x0 + h e_dir) against h.  Radii whose
 * steering fails are dropped and reported.  The slope estimates the
 * box-fitting exponent of the direction (1 for horizontal directions,
 * 1/weight for directions reached through brackets).
 */
struct ExponentFit {
  std::vector<double> radii;  // the radii that produced a distance
  std::vector<double> log_h;
  std::vector<double> log_d;
  std::vector<double> dropped;
  double slope = 0.0;
};

ExponentFit boxfit_exponent(const Geometry& g, const Eigen::VectorXd& x0,
                            int direction, std::span<const double> radii,
                            bool refine = false,
                            const DistanceOptions& opts = {});

}  // namespace carnot

#endif
