/*
 * Acceptance gate: one self-contained check per shipped guarantee, each with
 * a wall-clock budget.  Prints one [PASS]/[FAIL] line per criterion and exits
 * with the number of failures.
 */

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "carnot/picard.hpp"
#include "carnot/reconstruct.hpp"

using namespace carnot;
using Clock = std::chrono::steady_clock;

namespace {

std::vector<std::string> coords3() { return {"x", "y", "z"}; }

Geometry heisenberg() {
  auto names = coords3();
  VectorField x1({parse_expr("1", names), parse_expr("0", names),
                  parse_expr("-y/2", names)});
  VectorField x2({parse_expr("0", names), parse_expr("1", names),
                  parse_expr("x/2", names)});
  return Geometry(names, {x1, x2});
}

Geometry grushin() {
  std::vector<std::string> names = {"x", "y"};
  VectorField x1({parse_expr("1", names), parse_expr("0", names)});
  VectorField x2({parse_expr("0", names),
                  parse_expr("((x + abs(x))/2)^3", names)});
  return Geometry(names, {x1, x2});
}

Eigen::VectorXd vec3(double x, double y, double z) {
  Eigen::VectorXd v(3);
  v << x, y, z;
  return v;
}

Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

VectorField random_poly_field(std::mt19937& rng) {
  std::uniform_real_distribution<double> coeff(-0.5, 0.5);
  std::vector<Expr> comps;
  for (int i = 0; i < 3; ++i) {
    Expr acc = Expr::constant(coeff(rng));
    for (int a = 0; a < 3; ++a) {
      acc = Expr::add(acc,
                      Expr::mul(Expr::constant(coeff(rng)), Expr::coordinate(a)));
      for (int b = a; b < 3; ++b)
        acc = Expr::add(
            acc, Expr::mul(Expr::constant(coeff(rng)),
                           Expr::mul(Expr::coordinate(a), Expr::coordinate(b))));
    }
    comps.push_back(acc);
  }
  return VectorField(std::move(comps));
}

Eigen::VectorXd random_point(std::mt19937& rng, int dim, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Eigen::VectorXd p(dim);
  for (int i = 0; i < dim; ++i) p[i] = u(rng);
  return p;
}

struct Gate {
  int failures = 0;

  void criterion(int number, const std::string& label, double budget_s,
                 const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    auto t0 = Clock::now();
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
      ok = false;
    }
    double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    bool in_budget = elapsed < budget_s;
    if (!in_budget) {
      if (!detail.empty()) detail += "; ";
      char buf[64];
      std::snprintf(buf, sizeof(buf), "over budget (%.1fs >= %.0fs)", elapsed,
                    budget_s);
      detail += buf;
    }
    bool pass = ok && in_budget;
    if (!pass) ++failures;
    std::printf("[%s] %d. %s (%.2fs)%s%s\n", pass ? "PASS" : "FAIL", number,
                label.c_str(), elapsed, detail.empty() ? "" : " -- ",
                detail.c_str());
    std::fflush(stdout);
  }
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

/* Four equal-time legs tracing a commutator square of side s. */
Control square_control(double s) {
  Eigen::MatrixXd v(4, 2);
  v << 4 * s, 0, 0, 4 * s, -4 * s, 0, 0, -4 * s;
  return Control({0.0, 0.25, 0.5, 0.75, 1.0}, v);
}

}  // namespace

int main() {
  Gate gate;

  // ---------------------------------------------------------------- 1
  gate.criterion(1, "symbolic brackets: commutator identity and Jacobi", 5.0,
                 [](std::string& detail) {
    Geometry g = heisenberg();
    VectorField b = lie_bracket(g.field(0), g.field(1));
    std::mt19937 rng(1001);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      Eigen::VectorXd p = random_point(rng, 3, 5.0);
      worst = std::max(worst, (b(p) - vec3(0, 0, 1)).norm());
    }
    if (worst >= 1e-12) {
      detail = "commutator deviates by " + std::to_string(worst);
      return false;
    }

    double worst_jacobi = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      VectorField x = random_poly_field(rng);
      VectorField y = random_poly_field(rng);
      VectorField z = random_poly_field(rng);
      VectorField j1 = lie_bracket(x, lie_bracket(y, z));
      VectorField j2 = lie_bracket(y, lie_bracket(z, x));
      VectorField j3 = lie_bracket(z, lie_bracket(x, y));
      for (int pt = 0; pt < 3; ++pt) {
        Eigen::VectorXd p = random_point(rng, 3, 2.0);
        double scale = 1.0 + j1(p).norm() + j2(p).norm() + j3(p).norm();
        worst_jacobi =
            std::max(worst_jacobi, (j1(p) + j2(p) + j3(p)).norm() / scale);
      }
    }
    if (worst_jacobi >= 1e-9) {
      detail = "Jacobi residual " + std::to_string(worst_jacobi);
      return false;
    }
    return true;
  });

  // ---------------------------------------------------------------- 2
  gate.criterion(2, "commutator-flow derivatives match bracket fields", 30.0,
                 [](std::string& detail) {
    Geometry g = heisenberg();
    MichorReport rep =
        michor_check(g, FormalBracket::parse("[1,2]"), vec3(0, 0, 0), 1e-2);
    if (rep.low_order_max >= 1e-6) {
      detail = "low orders reach " + std::to_string(rep.low_order_max);
      return false;
    }
    if ((rep.kth_estimate - vec3(0, 0, 1)).norm() >= 1e-3 ||
        rep.rel_err >= 1e-3) {
      detail = "2nd derivative estimate off by " + std::to_string(rep.rel_err);
      return false;
    }

    // ten random words of weight two or three on random geometries
    std::mt19937 rng(2002);
    std::uniform_int_distribution<int> leaf(1, 2);
    std::uniform_int_distribution<int> shape(0, 2);
    int done = 0, attempts = 0;
    double worst = 0.0;
    while (done < 10 && attempts < 200) {
      ++attempts;
      Geometry rg({"x", "y", "z"}, {random_poly_field(rng),
                                    random_poly_field(rng)});
      FormalBracket w = [&] {
        int a = leaf(rng), b = 3 - a;
        switch (shape(rng)) {
          case 0: return FormalBracket::pair(FormalBracket::leaf(a),
                                             FormalBracket::leaf(b));
          case 1: return FormalBracket::pair(
              FormalBracket::leaf(a),
              FormalBracket::pair(FormalBracket::leaf(leaf(rng)),
                                  FormalBracket::leaf(b)));
          default: return FormalBracket::pair(
              FormalBracket::pair(FormalBracket::leaf(a),
                                  FormalBracket::leaf(b)),
              FormalBracket::leaf(leaf(rng)));
        }
      }();
      Eigen::VectorXd p = random_point(rng, 3, 1.0);
      Eigen::VectorXd ref = eval_bracket(rg, w, p);
      if (ref.norm() < 0.05) continue;  // nothing to measure against
      double h = w.weight() == 2 ? 1e-2 : 4e-2;
      MichorReport r = michor_check(rg, w, p, h);
      worst = std::max(worst, r.rel_err);
      if (r.rel_err >= 1e-2) {
        detail = "word " + w.str() + " rel err " + std::to_string(r.rel_err);
        return false;
      }
      ++done;
    }
    if (done < 10) {
      detail = "only " + std::to_string(done) + " usable samples";
      return false;
    }
    detail = "worst rel err " + std::to_string(worst);
    return true;
  });

  // ---------------------------------------------------------------- 3
  gate.criterion(3, "Picard fixed point agrees with RK4", 30.0,
                 [](std::string& detail) {
    Geometry g = heisenberg();
    std::mt19937 rng(3003);
    std::uniform_real_distribution<double> uv(-0.5, 0.5);
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::MatrixXd vals(4, 2);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) vals(i, j) = uv(rng);
      Control u({0.0, 0.25, 0.5, 0.75, 1.0}, vals);
      if (u.l1_norm() > 1.0) {
        vals *= 0.9 / u.l1_norm();
        u = Control({0.0, 0.25, 0.5, 0.75, 1.0}, vals);
      }
      Eigen::VectorXd x0 = random_point(rng, 3, 0.5);
      HorizontalPath fp = picard_solve(g, u, x0);
      HorizontalPath rk = integrate_control(g, u, x0, 1e-3);
      for (int i = 0; i <= 100; ++i) {
        double t = i / 100.0;
        worst = std::max(worst, (fp.at(t) - rk.at(t)).norm());
      }
    }
    detail = "sup distance " + std::to_string(worst);
    return worst < 1e-4;
  });

  // ---------------------------------------------------------------- 4
  gate.criterion(4, "control algebra: norms add, flows compose and reverse",
                 10.0, [](std::string& detail) {
    Geometry g = heisenberg();
    std::mt19937 rng(4004);
    std::uniform_int_distribution<int> dy(0, 1 << 10);
    auto dyadic = [&] { return double(dy(rng)) / double(1 << 10) - 0.5; };

    for (int rep = 0; rep < 20; ++rep) {
      Eigen::MatrixXd vu(2, 2), vv(2, 2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          vu(i, j) = dyadic();
          vv(i, j) = dyadic();
        }
      Control u({0.0, 0.5, 1.0}, vu);
      Control v({0.0, 0.25, 1.0}, vv);
      Control w = concat_controls(u, v, 0.5);
      if (w.l1_norm() != u.l1_norm() + v.l1_norm()) {
        detail = "norm additivity broken at rep " + std::to_string(rep);
        return false;
      }

      Eigen::VectorXd x0 = random_point(rng, 3, 0.5);
      Eigen::VectorXd via = endpoint(g, v, endpoint(g, u, x0));
      Eigen::VectorXd direct = endpoint(g, w, x0);
      if ((via - direct).norm() >= 1e-6) {
        detail = "composition error " + std::to_string((via - direct).norm());
        return false;
      }

      Eigen::VectorXd fwd = endpoint(g, u, x0);
      Eigen::VectorXd back = endpoint(g, reverse_control(u), fwd);
      if ((back - x0).norm() >= 1e-6) {
        detail = "inverse round-trip error " +
                 std::to_string((back - x0).norm());
        return false;
      }
    }
    return true;
  });

  // ---------------------------------------------------------------- 5
  gate.criterion(5, "local steering: vertical targets and chart derivative",
                 60.0, [](std::string& detail) {
    Geometry g = heisenberg();
    for (double z : {1e-2, 1e-3}) {
      Control u = steer(g, vec3(0, 0, 0), vec3(0, 0, z));
      Eigen::VectorXd reached = endpoint(g, u, vec3(0, 0, 0));
      double err = (reached - vec3(0, 0, z)).norm();
      double len = control_length(u);
      if (err >= 1e-6) {
        detail = "endpoint error " + std::to_string(err) + " at z=" +
                 std::to_string(z);
        return false;
      }
      if (len > 4.1 * std::sqrt(z)) {
        detail = "length " + std::to_string(len) + " exceeds 4.1 sqrt(z)";
        return false;
      }
    }

    SteeringChart chart = build_chart(g, vec3(0, 0, 0), 4);
    Eigen::VectorXd col = chart.jacobian0().col(2);
    if ((col - vec3(0, 0, 0.5)).norm() >= 1e-2 * 0.5) {
      detail = "chart derivative column " + std::to_string(col[2]);
      return false;
    }
    return true;
  });

  // ---------------------------------------------------------------- 6
  gate.criterion(6, "ball-box exponents from log-log distance fits", 300.0,
                 [](std::string& detail) {
    Geometry g = heisenberg();
    std::vector<double> radii = {1e-3, 1e-2, 1e-1};
    ExponentFit vertical = boxfit_exponent(g, vec3(0, 0, 0), 2, radii);
    ExponentFit horizontal = boxfit_exponent(g, vec3(0, 0, 0), 0, radii);
    detail = "slopes " + std::to_string(vertical.slope) + " / " +
             std::to_string(horizontal.slope);
    return near(vertical.slope, 0.5, 0.05) && near(horizontal.slope, 1.0, 0.05);
  });

  // ---------------------------------------------------------------- 7
  gate.criterion(7, "degenerate balls: segment at small radius, lobe at large",
                 120.0, [](std::string& detail) {
    Geometry g = grushin();
    BallCloud small = ball_sample(g, vec2(-1, 0), 0.5, 200, 2, 20250823);
    for (const auto& p : small.endpoints)
      if (std::abs(p[1]) >= 1e-12) {
        detail = "small-ball sample leaves the axis: y = " +
                 std::to_string(p[1]);
        return false;
      }

    BallCloud big = ball_sample(g, vec2(-1, 0), 1.5, 200, 2, 20250823);
    int lobe = 0;
    for (const auto& p : big.endpoints) {
      if (p[1] != 0.0) {
        ++lobe;
        if (p[0] <= 0.0) {
          detail = "lobe sample with x <= 0 at (" + std::to_string(p[0]) +
                   ", " + std::to_string(p[1]) + ")";
          return false;
        }
      }
    }
    detail = std::to_string(lobe) + " lobe samples, all with x > 0";
    return lobe > 0;
  });

  // ---------------------------------------------------------------- 8
  gate.criterion(8, "reconstruction: exact families and Lipschitz contrast",
                 120.0, [](std::string& detail) {
    Geometry g = heisenberg();

    // (a) f = z from its horizontal derivatives
    Expr fz = parse_expr("z", coords3());
    HorizontalDerivatives dz(g, horizontal_derivatives_of(g, fz));
    double rec = reconstruct(dz, vec3(0, 0, 0), 0.0, vec3(0, 0, 0.01));
    if (std::abs(rec - 0.01) >= 1e-6) {
      detail = "f=z round-trip error " + std::to_string(std::abs(rec - 0.01));
      return false;
    }

    // (b) the gauge-like function with bounded horizontal but unbounded
    // Euclidean difference quotients
    Expr f = parse_expr("(abs(x)^2.5 + abs(y)^2.5 + abs(z)^1.5)^0.5", coords3());
    HorizontalDerivatives d(g, horizontal_derivatives_of(g, f));
    Eigen::VectorXd base = vec3(0.3, 0.2, 0.1);
    double f0 = f(base);
    std::vector<Eigen::VectorXd> targets = {
        vec3(0.2, 0.0, 0.05),  vec3(-0.25, 0.1, 0.02), vec3(0.1, -0.3, -0.08),
        vec3(0.0, 0.25, 0.1),  vec3(-0.1, -0.2, 0.15), vec3(0.35, 0.15, -0.05),
    };
    double worst = 0.0;
    for (const auto& p : targets) {
      double got = reconstruct(d, base, f0, p);
      worst = std::max(worst, std::abs(got - f(p)));
    }
    if (worst >= 1e-3) {
      detail = "gauge reconstruction off by " + std::to_string(worst);
      return false;
    }

    // (c) difference quotients: Euclidean blow-up vs horizontal control
    std::vector<double> offsets = {1e-4, 1e-6, 1e-8};
    LipschitzReport rep =
        cc_lipschitz_check(d, f, vec3(0, 0, 0), 0.3, 200, 20250823, 2, offsets);
    double ray = rep.euclid_ratios.back().second;  // offset 1e-8
    if (!near(ray, 100.0, 1.0)) {
      detail = "ray ratio " + std::to_string(ray);
      return false;
    }
    // pinned regression bound for the horizontal ratio (measured once for
    // this seed; 1.6 eps^{1/4} = 1.18 is the analytic ceiling)
    const double pinned = 0.62;
    if (rep.cc_ratio_max >= pinned) {
      detail = "cc ratio " + std::to_string(rep.cc_ratio_max) +
               " exceeds pinned bound " + std::to_string(pinned);
      return false;
    }
    detail = "cc ratio " + std::to_string(rep.cc_ratio_max) + ", ray ratio " +
             std::to_string(ray);
    return true;
  });

  // ---------------------------------------------------------------- 9
  gate.criterion(9, "route dependence separates gradient from non-gradient",
                 60.0, [](std::string& detail) {
    // (a) a gradient family is route-independent
    Geometry g = heisenberg();
    Expr fz = parse_expr("z", coords3());
    HorizontalDerivatives dz(g, horizontal_derivatives_of(g, fz));
    PathIndependenceReport rep = path_independence_check(
        dz, vec3(0, 0, 0), 0.0, vec3(0, 0, 0.02), 4, 20250823);
    if (rep.max_discrepancy >= 1e-5) {
      detail = "gradient family discrepancy " +
               std::to_string(rep.max_discrepancy);
      return false;
    }

    // (b) h = (1,1) on the degenerate planar geometry is non-gradient: the
    // two legs of a commutator-style rectangle weight the second control
    // differently, so the loop integral cannot telescope
    Geometry gr = grushin();
    HorizontalDerivatives ones(
        gr, {parse_expr("1", gr.coords()), parse_expr("1", gr.coords())});
    Eigen::VectorXd a = vec2(1.0, 0.0), b = vec2(1.1, 0.05);
    double direct = reconstruct(ones, a, 0.0, b);
    double leg = reconstruct(ones, a, 0.0, vec2(1.2, 0.05));
    double via = reconstruct(ones, vec2(1.2, 0.05), leg, b);
    double disc = std::abs(direct - via);
    detail = "gradient " + std::to_string(rep.max_discrepancy) +
             ", loop " + std::to_string(disc);
    return disc > 1e-3;
  });

  std::printf("%d of 9 criteria failed\n", gate.failures);
  return gate.failures;
}
