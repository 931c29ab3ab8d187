#include "carnot/flows.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>

namespace carnot {

std::vector<FlowSegment> unroll_bracket(const FormalBracket& b, double t,
                                        bool inverse) {
  if (b.is_leaf()) return {{b.index(), inverse ? -t : t}};
  std::vector<FlowSegment> out;
  auto append = [&out](std::vector<FlowSegment> part) {
    out.insert(out.end(), part.begin(), part.end());
  };
  if (!inverse) {
    append(unroll_bracket(b.left(), t, false));
    append(unroll_bracket(b.right(), t, false));
    append(unroll_bracket(b.left(), t, true));
    append(unroll_bracket(b.right(), t, true));
  } else {
    // (B^-1 A^-1 B A)^-1 = A^-1 B^-1 A B, applied left to right.
    append(unroll_bracket(b.right(), t, false));
    append(unroll_bracket(b.left(), t, false));
    append(unroll_bracket(b.right(), t, true));
    append(unroll_bracket(b.left(), t, true));
  }
  return out;
}

Eigen::VectorXd bracket_flow(const Geometry& g, const FormalBracket& b,
                             double t, const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd y = x;
  for (const FlowSegment& seg : unroll_bracket(b, t)) {
    if (seg.field > g.num_fields())
      throw InputError("bracket references generator " +
                       std::to_string(seg.field) + " but geometry has " +
                       std::to_string(g.num_fields()));
    if (seg.duration != 0.0)
      y = flow(g, g.field(seg.field - 1), seg.duration, y, step);
  }
  return y;
}

namespace {

/* Coefficients c_{-q}..c_q with sum c_j j^m = l! [m == l] for m = 0..2q,
 * giving a second-order accurate central estimate of f^(l)(0) as
 * sum c_j f(jh) / h^l. */
Eigen::VectorXd stencil_coefficients(int l, int q) {
  int w = 2 * q + 1;
  Eigen::MatrixXd v(w, w);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(w);
  for (int m = 0; m < w; ++m) {
    for (int j = -q; j <= q; ++j) v(m, j + q) = std::pow(double(j), m);
    if (m == l) {
      double fact = 1.0;
      for (int i = 2; i <= l; ++i) fact *= i;
      rhs[m] = fact;
    }
  }
  return v.fullPivLu().solve(rhs);
}

}  // namespace

MichorReport michor_check(const Geometry& g, const FormalBracket& b,
                          const Eigen::VectorXd& x, double h, double step) {
  if (h <= 0.0) throw InputError("michor_check: h must be positive");
  int k = b.weight();
  int qmax = (k + 1) / 2;

  // Curve samples at j*h/2 for j = -2*qmax .. 2*qmax; c(0) = x exactly.
  std::vector<Eigen::VectorXd> samples(4 * qmax + 1);
  auto sample = [&](int j_half) -> const Eigen::VectorXd& {
    auto& slot = samples[j_half + 2 * qmax];
    if (slot.size() == 0) {
      slot = (j_half == 0) ? x : bracket_flow(g, b, j_half * h / 2.0, x, step);
    }
    return slot;
  };

  MichorReport rep;
  rep.reference = eval_bracket(g, b, x);

  double spread = 0.0;
  for (int j = -2 * qmax; j <= 2 * qmax; ++j)
    spread = std::max(spread, (sample(j) - x).cwiseAbs().maxCoeff());
  rep.cancellation =
      spread < 1e3 * std::numeric_limits<double>::epsilon() *
                   (1.0 + x.cwiseAbs().maxCoeff());

  for (int l = 1; l <= k; ++l) {
    int q = (l + 1) / 2;
    Eigen::VectorXd coeff = stencil_coefficients(l, q);
    auto estimate = [&](double hh, int stride) {
      // stride 2: nodes j*h; stride 1: nodes j*h/2
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(g.dim());
      for (int j = -q; j <= q; ++j)
        acc += coeff[j + q] * sample(j * stride);
      return (acc / std::pow(hh, l)).eval();
    };
    Eigen::VectorXd coarse = estimate(h, 2);
    Eigen::VectorXd fine = estimate(h / 2.0, 1);
    // Central stencils have an h^2 error expansion; one Richardson level.
    Eigen::VectorXd rich = (4.0 * fine - coarse) / 3.0;
    rep.order_estimates.push_back(rich);
    if (l < k) rep.low_order_max = std::max(rep.low_order_max, rich.norm());
  }

  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  rep.kth_estimate = rep.order_estimates.back() / fact;
  double refn = rep.reference.norm();
  double diff = (rep.kth_estimate - rep.reference).norm();
  rep.rel_err = refn > 0.0 ? diff / refn : diff;
  return rep;
}

}  // namespace carnot
