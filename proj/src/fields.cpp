#include "carnot/fields.hpp"

#include <Eigen/SVD>
#include <cassert>
#include <cctype>
#include <cmath>

namespace carnot {

Eigen::VectorXd VectorField::operator()(const Eigen::VectorXd& p) const {
  Eigen::VectorXd out(dim());
  for (int i = 0; i < dim(); ++i) out[i] = comps[i](p);
  return out;
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  if (x.dim() != y.dim()) throw InputError("lie_bracket: dimension mismatch");
  int n = x.dim();
  std::vector<Expr> comps(n);
  for (int i = 0; i < n; ++i) {
    Expr acc = Expr::constant(0.0);
    for (int j = 0; j < n; ++j) {
      acc = Expr::add(acc, Expr::mul(y.comps[i].derivative(j), x.comps[j]));
      acc = Expr::sub(acc, Expr::mul(x.comps[i].derivative(j), y.comps[j]));
    }
    comps[i] = acc;
  }
  return VectorField(std::move(comps));
}

Geometry::Geometry(std::vector<std::string> coords,
                   std::vector<VectorField> fields,
                   std::optional<Eigen::MatrixX2d> domain)
    : coords_(std::move(coords)), fields_(std::move(fields)) {
  int n = dim();
  if (n <= 0) throw InputError("geometry needs at least one coordinate");
  if (fields_.empty()) throw InputError("geometry needs at least one field");
  for (const auto& f : fields_) {
    if (f.dim() != n)
      throw InputError("field has " + std::to_string(f.dim()) +
                       " components, expected " + std::to_string(n));
    for (const auto& c : f.comps)
      if (c.max_coordinate() >= n)
        throw InputError("field references coordinate index beyond dimension");
  }
  if (domain) {
    if (domain->rows() != n)
      throw InputError("domain must have one row per coordinate");
    for (int i = 0; i < n; ++i)
      if (!((*domain)(i, 0) < (*domain)(i, 1)))
        throw InputError("domain bounds must satisfy lo < hi");
    domain_ = *domain;
  } else {
    domain_.resize(n, 2);
    domain_.col(0).setConstant(-10.0);
    domain_.col(1).setConstant(10.0);
  }
}

bool Geometry::in_domain(const Eigen::VectorXd& p) const {
  if (p.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (!std::isfinite(p[i])) return false;
    if (p[i] < domain_(i, 0) || p[i] > domain_(i, 1)) return false;
  }
  return true;
}

Eigen::MatrixXd Geometry::frame(const Eigen::VectorXd& p) const {
  Eigen::MatrixXd m(dim(), num_fields());
  for (int i = 0; i < num_fields(); ++i) m.col(i) = fields_[i](p);
  return m;
}

FormalBracket FormalBracket::leaf(int index) {
  if (index < 1) throw InputError("bracket leaf index must be >= 1");
  FormalBracket b;
  b.index_ = index;
  b.weight_ = 1;
  return b;
}

FormalBracket FormalBracket::pair(FormalBracket left, FormalBracket right) {
  FormalBracket b;
  b.weight_ = left.weight_ + right.weight_;
  b.left_ = std::make_shared<FormalBracket>(std::move(left));
  b.right_ = std::make_shared<FormalBracket>(std::move(right));
  return b;
}

namespace {

FormalBracket parse_bracket(std::string_view t, std::size_t& i) {
  auto skip = [&] {
    while (i < t.size() && std::isspace(static_cast<unsigned char>(t[i]))) ++i;
  };
  skip();
  if (i >= t.size()) throw ParseError("unexpected end of bracket word", i);
  if (t[i] == '[') {
    ++i;
    FormalBracket a = parse_bracket(t, i);
    skip();
    if (i >= t.size() || t[i] != ',') throw ParseError("expected ','", i);
    ++i;
    FormalBracket b = parse_bracket(t, i);
    skip();
    if (i >= t.size() || t[i] != ']') throw ParseError("expected ']'", i);
    ++i;
    return FormalBracket::pair(std::move(a), std::move(b));
  }
  if (!std::isdigit(static_cast<unsigned char>(t[i])))
    throw ParseError("expected generator index or '['", i);
  std::size_t start = i;
  while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
  int idx = std::stoi(std::string(t.substr(start, i - start)));
  return FormalBracket::leaf(idx);
}

}  // namespace

FormalBracket FormalBracket::parse(std::string_view text) {
  std::size_t i = 0;
  FormalBracket b = parse_bracket(text, i);
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
    ++i;
  if (i != text.size()) throw ParseError("unexpected trailing input", i);
  return b;
}

std::string FormalBracket::str() const {
  if (is_leaf()) return std::to_string(index_);
  return "[" + left_->str() + "," + right_->str() + "]";
}

FormalBracket FormalBracket::swap_outer() const {
  if (is_leaf()) return *this;
  return pair(*right_, *left_);
}

namespace {

using BracketCache = std::map<std::string, VectorField>;

const VectorField& materialize(const Geometry& g, const FormalBracket& b,
                               BracketCache& cache) {
  std::string key = b.str();
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  VectorField f;
  if (b.is_leaf()) {
    if (b.index() > g.num_fields())
      throw InputError("bracket references generator " +
                       std::to_string(b.index()) + " but geometry has " +
                       std::to_string(g.num_fields()));
    f = g.field(b.index() - 1);
  } else {
    f = lie_bracket(materialize(g, b.left(), cache),
                    materialize(g, b.right(), cache));
  }
  return cache.emplace(std::move(key), std::move(f)).first->second;
}

}  // namespace

VectorField materialize_bracket(const Geometry& g, const FormalBracket& b) {
  BracketCache cache;
  return materialize(g, b, cache);
}

Eigen::VectorXd eval_bracket(const Geometry& g, const FormalBracket& b,
                             const Eigen::VectorXd& p) {
  return materialize_bracket(g, b)(p);
}

namespace {

int numerical_rank(const Eigen::MatrixXd& m, double rank_tol) {
  if (m.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  double smax = sv.size() ? sv[0] : 0.0;
  if (smax <= 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > rank_tol * smax) ++r;
  return r;
}

}  // namespace

GrowthVector growth_vector(const Geometry& g, const Eigen::VectorXd& p,
                           int max_depth, double rank_tol) {
  if (max_depth < 1) throw InputError("growth_vector: max_depth must be >= 1");
  if (p.size() != g.dim())
    throw InputError("growth_vector: point dimension mismatch");

  int n = g.dim();
  int k = g.num_fields();

  GrowthVector gv;
  gv.base_point = p;

  BracketCache cache;
  Eigen::MatrixXd accepted(n, 0);
  int rank = 0;

  // Left-nested candidates of the current weight, in leaf-lexicographic
  // order.  Weight d candidates are [j, c] over j = 1..k and weight d-1
  // candidates c, giving sequences (j, ...) in lexicographic order.
  std::vector<FormalBracket> current;
  for (int d = 1; d <= max_depth && rank < n; ++d) {
    std::vector<FormalBracket> next;
    if (d == 1) {
      for (int j = 1; j <= k; ++j) next.push_back(FormalBracket::leaf(j));
    } else {
      for (int j = 1; j <= k; ++j)
        for (const auto& c : current)
          next.push_back(FormalBracket::pair(FormalBracket::leaf(j), c));
    }
    for (const auto& cand : next) {
      if (rank >= n) break;
      Eigen::VectorXd v = materialize(g, cand, cache)(p);
      Eigen::MatrixXd trial(n, accepted.cols() + 1);
      trial << accepted, v;
      if (numerical_rank(trial, rank_tol) > rank) {
        accepted = std::move(trial);
        ++rank;
        gv.basis.push_back(cand);
        gv.weights.push_back(d);
      }
    }
    gv.ranks.push_back(rank);
    current = std::move(next);
  }
  gv.bracket_generating = (rank == n);
  return gv;
}

}  // namespace carnot
