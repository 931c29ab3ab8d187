#ifndef CARNOT_FIELDS_HPP
#define CARNOT_FIELDS_HPP

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carnot/expr.hpp"

namespace carnot {

/* A smooth vector field given componentwise by expressions. */
struct VectorField {
  std::vector<Expr> comps;

  VectorField() = default;
  explicit VectorField(std::vector<Expr> c) : comps(std::move(c)) {}

  int dim() const { return static_cast<int>(comps.size()); }
  Eigen::VectorXd operator()(const Eigen::VectorXd& p) const;
  /* Jacobian entries d comps[i] / d x_j as expressions (row i, column j). */
  Expr jacobian_entry(int i, int j) const { return comps[i].derivative(j); }
};

/* Lie bracket [X, Y] = (DY) X - (DX) Y, computed symbolically. */
VectorField lie_bracket(const VectorField& x, const VectorField& y);

/*
 * A control system on a box in R^n: generator fields X_1..X_k over named
 * coordinates, with an axis-aligned working domain.  The default domain is
 * [-10, 10]^n.  Fields must have exactly n components and may only reference
 * the declared coordinates.
 */
class Geometry {
public:
  Geometry(std::vector<std::string> coords, std::vector<VectorField> fields,
           std::optional<Eigen::MatrixX2d> domain = std::nullopt);

  int dim() const { return static_cast<int>(coords_.size()); }
  int num_fields() const { return static_cast<int>(fields_.size()); }
  const VectorField& field(int i) const { return fields_.at(i); }
  const std::vector<VectorField>& fields() const { return fields_; }
  const std::vector<std::string>& coords() const { return coords_; }
  const Eigen::MatrixX2d& domain() const { return domain_; }
  bool in_domain(const Eigen::VectorXd& p) const;
  /* Frame matrix: column i is X_i(p). */
  Eigen::MatrixXd frame(const Eigen::VectorXd& p) const;

private:
  std::vector<std::string> coords_;
  std::vector<VectorField> fields_;
  Eigen::MatrixX2d domain_;
};

/*
 * Formal bracket word over generator indices, e.g. [1,[1,2]].  Leaves are
 * 1-based.  The weight is the number of leaves.
 */
class FormalBracket {
public:
  static FormalBracket leaf(int index);
  static FormalBracket pair(FormalBracket left, FormalBracket right);
  static FormalBracket parse(std::string_view text);

  bool is_leaf() const { return index_ > 0; }
  int index() const { return index_; }  // 1-based, valid for leaves
  const FormalBracket& left() const { return *left_; }
  const FormalBracket& right() const { return *right_; }
  int weight() const { return weight_; }
  std::string str() const;
  /* Swap the outermost pair: [E,F] -> [F,E].  Leaves swap to themselves. */
  FormalBracket swap_outer() const;

private:
  FormalBracket() = default;
  int index_ = 0;
  int weight_ = 0;
  std::shared_ptr<const FormalBracket> left_, right_;
};

/* The bracket word realized as a vector field of g.  Inner words are
 * materialized once each (shared subtrees are cached within the call). */
VectorField materialize_bracket(const Geometry& g, const FormalBracket& b);

Eigen::VectorXd eval_bracket(const Geometry& g, const FormalBracket& b,
                             const Eigen::VectorXd& p);

/*
 * Growth data of the distribution at a point: ranks n_1 <= n_2 <= ... of the
 * subspaces spanned by brackets of weight <= d, together with the bracket
 * words whose values were accepted into the basis.
 *
 * Candidates are enumerated by weight, then lexicographically by leaf
 * sequence, restricted to left-nested words [j1,[j2,[...]]].  A candidate is
 * accepted when it raises the numerical rank of the accumulated frame
 * (singular values above rank_tol times the largest one count).
 */
struct GrowthVector {
  Eigen::VectorXd base_point;
  std::vector<int> ranks;
  std::vector<FormalBracket> basis;
  std::vector<int> weights;
  bool bracket_generating = false;
};

GrowthVector growth_vector(const Geometry& g, const Eigen::VectorXd& p,
                           int max_depth, double rank_tol = 1e-9);

}  // namespace carnot

#endif
