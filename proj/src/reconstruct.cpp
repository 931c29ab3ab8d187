#include "carnot/reconstruct.hpp"

#include <cmath>
#include <random>

namespace carnot {

HorizontalDerivatives::HorizontalDerivatives(Geometry g, std::vector<Expr> derivs)
    : geometry(std::move(g)), h(std::move(derivs)) {
  if (static_cast<int>(h.size()) != geometry.num_fields())
    throw InputError("need one horizontal derivative per generator");
  for (const auto& e : h)
    if (e.max_coordinate() >= geometry.dim())
      throw InputError("derivative references coordinate beyond dimension");
}

std::vector<Expr> horizontal_derivatives_of(const Geometry& g, const Expr& f) {
  std::vector<Expr> out;
  for (int i = 0; i < g.num_fields(); ++i) {
    Expr acc = Expr::constant(0.0);
    for (int j = 0; j < g.dim(); ++j)
      acc = Expr::add(acc, Expr::mul(g.field(i).comps[j], f.derivative(j)));
    out.push_back(acc);
  }
  return out;
}

double line_integral(const HorizontalDerivatives& d, const HorizontalPath& path) {
  const Control& u = path.control;
  if (u.channels() != static_cast<int>(d.h.size()))
    throw InputError("line_integral: channel count mismatch");

  double total = 0.0;
  for (int seg = 0; seg < u.segments(); ++seg) {
    auto [first, last] = path.segment_samples(seg);
    int m = last - first;  // sub-step count, even by construction
    Eigen::RowVectorXd uj = u.value(seg);
    auto integrand = [&](int idx) {
      double v = 0.0;
      for (int i = 0; i < u.channels(); ++i)
        if (uj[i] != 0.0) v += uj[i] * d.h[i](path.points[idx]);
      return v;
    };
    double h = u.duration(seg) / m;
    if (m % 2 == 0) {
      // Composite Simpson over the segment's samples.
      double acc = integrand(first) + integrand(last);
      for (int j = 1; j < m; ++j)
        acc += integrand(first + j) * (j % 2 ? 4.0 : 2.0);
      total += acc * h / 3.0;
    } else {
      // Defensive fallback; the integrator always produces even counts.
      double acc = 0.0;
      for (int j = 0; j < m; ++j)
        acc += 0.5 * (integrand(first + j) + integrand(first + j + 1)) * h;
      total += acc;
    }
  }
  return total;
}

double reconstruct(const HorizontalDerivatives& d, const Eigen::VectorXd& x0,
                   double f0, const Eigen::VectorXd& target,
                   const ReconstructOptions& opts) {
  const Geometry& g = d.geometry;
  if ((target - x0).norm() == 0.0) return f0;
  Control u = steer(g, x0, target, opts.steer);
  HorizontalPath path = integrate_control(g, u, x0, opts.steer.step);
  return f0 + line_integral(d, path);
}

PathIndependenceReport path_independence_check(
    const HorizontalDerivatives& d, const Eigen::VectorXd& x0, double f0,
    const Eigen::VectorXd& target, int trials, std::uint64_t seed,
    const ReconstructOptions& opts) {
  if (trials < 2)
    throw InputError("path_independence_check: need at least two routes");
  const Geometry& g = d.geometry;

  PathIndependenceReport rep;
  try {
    rep.values.push_back(reconstruct(d, x0, f0, target, opts));
  } catch (const NumericError&) {
    ++rep.failed_routes;
  }

  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
  Eigen::VectorXd mid = 0.5 * (x0 + target);
  double scale = 0.5 * std::max((target - x0).norm(), 0.2);

  for (int route = 1; route < trials; ++route) {
    // A waypoint near the midpoint; skip draws that leave the domain.
    Eigen::VectorXd w;
    bool found = false;
    for (int tries = 0; tries < 50 && !found; ++tries) {
      w = mid;
      for (int i = 0; i < g.dim(); ++i)
        w[i] += scale * (2.0 * uniform() - 1.0);
      found = g.in_domain(w);
    }
    if (!found) {
      ++rep.failed_routes;
      continue;
    }
    try {
      double fw = reconstruct(d, x0, f0, w, opts);
      rep.values.push_back(reconstruct(d, w, fw, target, opts));
    } catch (const NumericError&) {
      ++rep.failed_routes;
    }
  }

  if (rep.values.size() < 2)
    throw NumericError(
        "path_independence_check: fewer than two routes succeeded");
  for (std::size_t a = 0; a < rep.values.size(); ++a)
    for (std::size_t b = a + 1; b < rep.values.size(); ++b)
      rep.max_discrepancy = std::max(
          rep.max_discrepancy, std::abs(rep.values[a] - rep.values[b]));
  return rep;
}

LipschitzReport cc_lipschitz_check(const HorizontalDerivatives& d,
                                   const Expr& f, const Eigen::VectorXd& x0,
                                   double eps, int n_samples,
                                   std::uint64_t seed, int ray_direction,
                                   std::span<const double> offsets,
                                   int segments, double step) {
  const Geometry& g = d.geometry;
  if (ray_direction < 0) ray_direction = g.dim() - 1;
  if (ray_direction >= g.dim())
    throw InputError("cc_lipschitz_check: ray direction out of range");
  static const double default_offsets[] = {1e-4, 1e-6, 1e-8};
  if (offsets.empty()) offsets = default_offsets;

  LipschitzReport rep;
  double f_base = f(x0);

  BallCloud cloud = ball_sample(g, x0, eps, n_samples, segments, seed, step);
  for (std::size_t i = 0; i < cloud.endpoints.size(); ++i) {
    double len = cloud.lengths[i];
    if (len < 1e-9 * eps) continue;
    double ratio = std::abs(f(cloud.endpoints[i]) - f_base) / len;
    rep.cc_ratio_max = std::max(rep.cc_ratio_max, ratio);
    ++rep.samples_used;
  }

  for (double delta : offsets) {
    Eigen::VectorXd p = x0;
    p[ray_direction] += delta;
    rep.euclid_ratios.emplace_back(delta, std::abs(f(p) - f_base) / delta);
  }
  return rep;
}

}  // namespace carnot
