#pragma once

#include "facetmpc/numeric.hpp"

namespace facetmpc {

/// {theta : a * theta <= b}. Rows are kept in insertion order.
struct Polytope {
  Mat a;
  Vec b;

  Eigen::Index dim() const { return a.cols(); }
  Eigen::Index num_rows() const { return a.rows(); }
};

struct ChebyshevBall {
  Vec center;     ///< empty when the LP itself is infeasible
  double radius;  ///< < 0 means empty; +inf means unbounded
};

/// Largest inscribed ball. Unbounded polytopes report radius = +inf with a
/// center taken from the ball capped at kTol.unbounded_cap.
ChebyshevBall chebyshev(const Polytope& p);

bool is_empty(const Polytope& p);

bool contains(const Polytope& p, const Vec& theta, double tol = kTol.feas_tol);

/// Drops every row implied by the others. Throws EmptyInput on empty input.
Polytope remove_redundant(const Polytope& p);

/// Unit-norm rows; throws DegenerateRow for rows with norm below 1e-12.
Polytope normalize(const Polytope& p);

/// Whether two normalized rows describe one hyperplane with opposite
/// orientation (a ~ -a2, b ~ -b2).
bool opposite_hyperplanes(const Eigen::Ref<const Vec>& a1, double b1, const Eigen::Ref<const Vec>& a2, double b2,
                          double tol = kTol.hyperplane_tol);

/// Axis-aligned box as a polytope (upper rows first, then lower rows).
Polytope box(const Vec& lower, const Vec& upper);

}  // namespace facetmpc
