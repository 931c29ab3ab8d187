#include <doctest.h>

#include <cmath>

#include "carnot/metrics.hpp"
#include "common.hpp"

using namespace carnot;
using namespace carnot::testing;

TEST_CASE("metrics: path length checks channels and sums segment speeds") {
  Geometry g = heisenberg();
  Eigen::MatrixXd v(2, 2);
  v << 3, 4, 0, 1;
  Control u({0.0, 0.5, 1.0}, v);
  CHECK(path_length(g, u) == doctest::Approx(0.5 * 5.0 + 0.5 * 1.0));

  Eigen::MatrixXd w(1, 3);
  w << 1, 1, 1;
  CHECK_THROWS_AS(path_length(g, Control({0.0, 1.0}, w)), InputError);
}

TEST_CASE("metrics: horizontal targets cost their Euclidean distance") {
  Geometry g = heisenberg();
  DistanceResult d = distance_upper(g, vec3(0, 0, 0), vec3(0.05, 0, 0));
  CHECK(d.upper_bound == doctest::Approx(0.05).epsilon(1e-4));
  CHECK(d.endpoint_error < 1e-6);
  CHECK(d.warning.empty());

  // distance from a point to itself is zero with the zero control
  DistanceResult self = distance_upper(g, vec3(1, 1, 0.2), vec3(1, 1, 0.2));
  CHECK(self.upper_bound == 0.0);
  CHECK(self.control.l1_norm() == 0.0);
}

TEST_CASE("metrics: vertical targets cost like the square root") {
  Geometry g = heisenberg();
  for (double z : {0.01, 0.0025}) {
    DistanceResult d = distance_upper(g, vec3(0, 0, 0), vec3(0, 0, z));
    CHECK(d.endpoint_error < 1e-6);
    // four equal legs: bound is 4 sqrt(z), within the acceptance margin
    CHECK(d.upper_bound <= 4.1 * std::sqrt(z));
    double optimal = 2.0 * std::sqrt(M_PI * z);
    CHECK(d.upper_bound >= optimal * (1.0 - 1e-9));  // can't beat the optimum
    CHECK(std::abs(d.upper_bound / optimal - 1.0) < 0.15);
  }
}

TEST_CASE("metrics: refinement never worsens the raw bound") {
  Geometry g = heisenberg();
  DistanceOptions opts;
  opts.steer.step = 5e-3;  // coarser integration keeps the descent cheap
  DistanceResult raw =
      distance_upper(g, vec3(0, 0, 0), vec3(0, 0, 0.01), false, opts);
  DistanceResult ref =
      distance_upper(g, vec3(0, 0, 0), vec3(0, 0, 0.01), true, opts);
  CHECK(ref.upper_bound <= raw.upper_bound + 1e-12);
  CHECK(ref.endpoint_error <= opts.endpoint_tol + 1e-12);
  double optimal = 2.0 * std::sqrt(M_PI * 0.01);
  CHECK(ref.upper_bound >= optimal * (1.0 - 1e-3));
}

TEST_CASE("metrics: planar projection is a lower bound for any route") {
  Geometry g = heisenberg();
  Eigen::VectorXd y = vec3(0.1, 0.2, 0.0);
  DistanceResult d = distance_upper(g, vec3(0, 0, 0), y);
  CHECK(d.endpoint_error < 1e-6);
  CHECK(d.upper_bound >= y.head(2).norm() - 1e-9);
}

TEST_CASE("metrics: degenerate endpoints carry a warning") {
  Geometry g = grushin();
  DistanceResult self = distance_upper(g, vec2(-1, 0), vec2(-1, 0));
  CHECK(!self.warning.empty());

  // a degenerate-frame center can still be steered through brackets
  DistanceResult d = distance_upper(g, vec2(0, 0), vec2(0.1, 0));
  CHECK(!d.warning.empty());
  CHECK(d.upper_bound == doctest::Approx(0.1).epsilon(1e-4));

  // but a non-generating base point fails loudly
  CHECK_THROWS_AS(distance_upper(g, vec2(-1, 0), vec2(-1, 0.5)), SteerError);
}

TEST_CASE("metrics: ball sampling is deterministic per seed and index") {
  Geometry g = heisenberg();
  BallCloud a = ball_sample(g, vec3(0, 0, 0), 0.3, 40, 6, 42);
  BallCloud b = ball_sample(g, vec3(0, 0, 0), 0.3, 40, 6, 42);
  REQUIRE(a.endpoints.size() == 40);
  REQUIRE(b.endpoints.size() == 40);
  for (int i = 0; i < 40; ++i) {
    CHECK((a.endpoints[i] - b.endpoints[i]).norm() == 0.0);
    CHECK(a.lengths[i] == b.lengths[i]);
  }

  // per-index streams: a shorter run is a prefix of a longer one
  BallCloud prefix = ball_sample(g, vec3(0, 0, 0), 0.3, 10, 6, 42);
  for (int i = 0; i < 10; ++i)
    CHECK((prefix.endpoints[i] - a.endpoints[i]).norm() == 0.0);

  // a different seed gives a different cloud
  BallCloud c = ball_sample(g, vec3(0, 0, 0), 0.3, 40, 6, 43);
  double diff = 0.0;
  for (int i = 0; i < 40; ++i) diff += (a.endpoints[i] - c.endpoints[i]).norm();
  CHECK(diff > 1e-6);
}

TEST_CASE("metrics: ball endpoints respect hard reachability bounds") {
  Geometry g = heisenberg();
  const double eps = 0.3;
  BallCloud cloud = ball_sample(g, vec3(0, 0, 0), eps, 60, 6, 42);
  for (size_t i = 0; i < cloud.endpoints.size(); ++i) {
    CHECK(cloud.lengths[i] <= eps + 1e-12);
    // the planar projection moves at unit speed
    CHECK(cloud.endpoints[i].head(2).norm() <= cloud.lengths[i] + 1e-9);
    // open-curve isoperimetry caps the vertical coordinate
    CHECK(std::abs(cloud.endpoints[i][2]) <= eps * eps / M_PI);
  }
}

TEST_CASE("metrics: small balls on the degenerate side stay on the axis") {
  Geometry g = grushin();
  BallCloud cloud = ball_sample(g, vec2(-1, 0), 0.5, 50, 6, 42);
  for (const Eigen::VectorXd& p : cloud.endpoints) {
    CHECK(p[1] == 0.0);  // exactly: the second field vanishes for x <= 0
    CHECK(p[0] >= -1.5 - 1e-9);
    CHECK(p[0] <= -0.5 + 1e-9);
  }
}

TEST_CASE("metrics: larger balls grow a lobe across the degenerate line") {
  Geometry g = grushin();
  // two segments: any sample that picks up y-motion must first have crossed
  // x = 0 on its opening leg, so every off-axis endpoint sits at x > 0
  BallCloud cloud = ball_sample(g, vec2(-1, 0), 1.5, 64, 2, 7);
  double max_y = 0.0, max_x = -10.0;
  for (const Eigen::VectorXd& p : cloud.endpoints) {
    max_y = std::max(max_y, std::abs(p[1]));
    max_x = std::max(max_x, p[0]);
    if (p[1] != 0.0) CHECK(p[0] > 0.0);
  }
  CHECK(max_x > 0.0);      // some samples cross into the working side
  CHECK(max_y > 1e-4);     // and once across, the second direction opens up
}

TEST_CASE("metrics: out-of-domain draws are discarded and redrawn") {
  std::vector<std::string> names = {"x", "y"};
  VectorField x1({parse_expr("1", names), parse_expr("0", names)});
  VectorField x2({parse_expr("0", names), parse_expr("1", names)});
  Eigen::MatrixX2d box(2, 2);
  box << -0.2, 0.2, -0.2, 0.2;
  Geometry g(names, {x1, x2}, box);
  BallCloud cloud = ball_sample(g, vec2(0, 0), 1.0, 5, 4, 3);
  CHECK(cloud.endpoints.size() == 5);
  CHECK(cloud.discarded > 0);
  for (const Eigen::VectorXd& p : cloud.endpoints) CHECK(g.in_domain(p));
}

TEST_CASE("metrics: box-fitting exponents separate the direction types") {
  Geometry g = heisenberg();
  std::vector<double> radii = {1e-3, 1e-2, 1e-1};

  ExponentFit vertical = boxfit_exponent(g, vec3(0, 0, 0), 2, radii);
  CHECK(vertical.slope == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(vertical.dropped.empty());

  ExponentFit horizontal = boxfit_exponent(g, vec3(0, 0, 0), 0, radii);
  CHECK(horizontal.slope == doctest::Approx(1.0).epsilon(1e-3));

  // the fit reports its own sampling table consistently
  REQUIRE(vertical.log_h.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(vertical.log_h[i] == doctest::Approx(std::log(radii[i])));
    CHECK(vertical.log_d[i] ==
          doctest::Approx(std::log(4.0 * std::sqrt(radii[i]))).epsilon(1e-3));
  }
}

TEST_CASE("metrics: exponent fit on a smooth full-rank geometry is linear") {
  Geometry g = grushin();
  std::vector<double> radii = {1e-3, 1e-2, 1e-1};
  ExponentFit fit = boxfit_exponent(g, vec2(0.5, 0.0), 0, radii);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("metrics: exponent fit validates its inputs") {
  Geometry g = heisenberg();
  std::vector<double> radii = {1e-2, 1e-1};
  CHECK_THROWS_AS(boxfit_exponent(g, vec3(0, 0, 0), 5, radii), InputError);
  std::vector<double> one = {1e-2};
  CHECK_THROWS_AS(boxfit_exponent(g, vec3(0, 0, 0), 2, one), InputError);
  std::vector<double> neg = {1e-2, -1.0};
  CHECK_THROWS_AS(boxfit_exponent(g, vec3(0, 0, 0), 2, neg), InputError);
}
