#include "carnot/picard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace carnot {

namespace {

/* Deterministic points filling the domain box: a full grid for small
 * dimensions, otherwise a fixed-seed uniform scatter. */
std::vector<Eigen::VectorXd> box_samples(const Geometry& g) {
  int n = g.dim();
  std::vector<Eigen::VectorXd> pts;
  const auto& box = g.domain();
  const int per_axis = 5;
  if (std::pow(per_axis, n) <= 4096.0) {
    std::vector<int> idx(n, 0);
    for (;;) {
      Eigen::VectorXd p(n);
      for (int i = 0; i < n; ++i) {
        double w = idx[i] / double(per_axis - 1);
        p[i] = box(i, 0) + w * (box(i, 1) - box(i, 0));
      }
      pts.push_back(p);
      int i = 0;
      while (i < n && ++idx[i] == per_axis) idx[i++] = 0;
      if (i == n) break;
    }
  } else {
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    auto next = [&state]() {
      state ^= state << 13;
      state ^= state >> 7;
      state ^= state << 17;
      return (state >> 11) * 0x1.0p-53;
    };
    for (int s = 0; s < 4096; ++s) {
      Eigen::VectorXd p(n);
      for (int i = 0; i < n; ++i)
        p[i] = box(i, 0) + next() * (box(i, 1) - box(i, 0));
      pts.push_back(p);
    }
  }
  return pts;
}

}  // namespace

double lipschitz_estimate(const Geometry& g, double safety) {
  int n = g.dim();
  double worst = 0.0;
  std::vector<Eigen::VectorXd> pts = box_samples(g);
  for (int fi = 0; fi < g.num_fields(); ++fi) {
    std::vector<std::vector<Expr>> jac(n, std::vector<Expr>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        jac[i][j] = g.field(fi).jacobian_entry(i, j);
    for (const auto& p : pts) {
      // Induced 1-norm: max over columns of the column abs sum.
      for (int j = 0; j < n; ++j) {
        double col = 0.0;
        bool ok = true;
        for (int i = 0; i < n; ++i) {
          double v;
          try {
            v = jac[i][j](p);
          } catch (const DomainError&) {
            ok = false;  // sample sits on a singular locus; skip it
            break;
          }
          if (!std::isfinite(v)) {
            ok = false;
            break;
          }
          col += std::abs(v);
        }
        if (ok) worst = std::max(worst, col);
      }
    }
  }
  if (worst == 0.0) worst = 1e-12;  // constant fields: any tiny bound works
  return worst * safety;
}

HorizontalPath picard_solve(const Geometry& g, const Control& u,
                            const Eigen::VectorXd& x0,
                            const PicardOptions& opts) {
  if (u.channels() != g.num_fields())
    throw InputError("picard_solve: control channel count mismatch");
  if (!g.in_domain(x0))
    throw IntegrationError("picard_solve: start point outside domain");

  double lip = lipschitz_estimate(g, opts.lipschitz_safety);
  double budget = 0.999 / (3.0 * lip);

  // Cut [0,1] where the running control L1 mass reaches the per-piece budget;
  // the contraction argument needs each piece's mass under 1/(3L).  Mass
  // grows linearly inside a control segment, so cut times are exact.
  std::vector<double> cuts{0.0};
  double consumed = 0.0;
  for (int j = 0; j < u.segments(); ++j) {
    double rate = u.value(j).cwiseAbs().sum();
    if (rate <= 0.0) continue;
    double pos = u.breakpoints()[j];
    double seg_end = u.breakpoints()[j + 1];
    while (pos < seg_end) {
      double room = budget - consumed;
      double mass_left = (seg_end - pos) * rate;
      if (mass_left <= room) {
        consumed += mass_left;
        break;
      }
      pos += room / rate;
      cuts.push_back(pos);
      consumed = 0.0;
    }
  }
  cuts.push_back(1.0);
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  HorizontalPath path;
  path.control = u;
  path.length = control_length(u);
  path.times.push_back(0.0);
  path.points.push_back(x0);

  Eigen::VectorXd start_state = x0;
  for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
    double a = cuts[piece], b = cuts[piece + 1];

    // Piece grid: control breakpoints inside (a,b) are kept as knots and each
    // knot interval gets nodes proportional to its share of the piece, so the
    // trapezoid rule below never straddles a control jump.
    std::vector<double> knots{a};
    for (double t : u.breakpoints())
      if (t > a && t < b) knots.push_back(t);
    knots.push_back(b);

    std::vector<double> ts{a};
    std::vector<Eigen::VectorXd> rates;  // control value per grid interval
    for (std::size_t q = 0; q + 1 < knots.size(); ++q) {
      double span = knots[q + 1] - knots[q];
      int m = std::max(2, static_cast<int>(std::lround(opts.grid * span / (b - a))));
      Eigen::VectorXd uval = u.at(0.5 * (knots[q] + knots[q + 1]));
      for (int i = 1; i <= m; ++i) {
        ts.push_back(knots[q] + span * i / m);
        rates.push_back(uval);
      }
    }
    const std::size_t npts = ts.size();

    std::vector<Eigen::VectorXd> gamma(npts, start_state);
    double prev_change = std::numeric_limits<double>::infinity();
    int worse_streak = 0;
    bool converged = false;
    for (int it = 0; it < opts.max_iter; ++it) {
      std::vector<Eigen::VectorXd> next(npts);
      next[0] = start_state;
      Eigen::VectorXd acc = start_state;
      for (std::size_t i = 0; i + 1 < npts; ++i) {
        const Eigen::VectorXd& uval = rates[i];
        auto f = [&](const Eigen::VectorXd& p) {
          Eigen::VectorXd v = Eigen::VectorXd::Zero(g.dim());
          for (int c = 0; c < g.num_fields(); ++c)
            if (uval[c] != 0.0) v += uval[c] * g.field(c)(p);
          return v;
        };
        double h = ts[i + 1] - ts[i];
        acc = acc + 0.5 * h * (f(gamma[i]) + f(gamma[i + 1]));
        if (!acc.allFinite())
          throw NumericError("picard_solve: non-finite iterate in piece " +
                             std::to_string(piece));
        next[i + 1] = acc;
      }
      double change = 0.0;
      for (std::size_t i = 0; i < npts; ++i)
        change = std::max(change, (next[i] - gamma[i]).cwiseAbs().maxCoeff());
      gamma = std::move(next);
      if (change < opts.tol) {
        converged = true;
        break;
      }
      if (change > prev_change * 1.0001) {
        if (++worse_streak >= 3)
          throw NumericError(
              "picard_solve: iteration is not contracting on piece " +
              std::to_string(piece) + " (change " + std::to_string(change) +
              ")");
      } else {
        worse_streak = 0;
      }
      prev_change = change;
    }
    if (!converged)
      throw NumericError("picard_solve: no convergence on piece " +
                         std::to_string(piece) + " after " +
                         std::to_string(opts.max_iter) + " iterations");
    for (std::size_t i = 1; i < npts; ++i) {
      if (!g.in_domain(gamma[i]))
        throw IntegrationError("picard_solve: trajectory left the domain box");
      path.times.push_back(ts[i]);
      path.points.push_back(gamma[i]);
    }
    start_state = gamma.back();
  }
  return path;
}

}  // namespace carnot
