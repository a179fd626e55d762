#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "facetmpc/error.hpp"
#include "facetmpc/tolerances.hpp"

namespace facetmpc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Throws DimensionMismatch / InvalidArgument when entries are non-finite.
void require_finite(const Mat& m, const char* what);
void require_finite(const Vec& v, const char* what);

/// Solves a square system by full-pivot LU; rejects numerically singular A.
Vec solve_linear(const Mat& a, const Vec& b);

/// Largest eigenvalue modulus.
double spectral_radius(const Mat& a);

/// Rank of [B, AB, ..., A^{n-1}B].
int controllability_rank(const Mat& a, const Mat& b);

// ---------------------------------------------------------------------------
// Linear programming

/// maximize c'z  s.t.  A_ub z <= b_ub,  lower <= z <= upper (bounds optional).
/// Variables without bounds are free.
struct LpProblem {
  Vec objective;
  Mat a_ub;
  Vec b_ub;
  std::optional<Vec> lower;
  std::optional<Vec> upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::optional<Vec> z;  ///< present iff Optimal
  double value = 0.0;
};

/// Dense two-phase tableau simplex with free-variable elimination. Uses
/// Dantzig pricing and switches to Bland's rule after a run of degenerate
/// pivots. Throws NumericalFailure when the pivot budget is exhausted.
LpResult lp_solve(const LpProblem& p);

// ---------------------------------------------------------------------------
// Quadratic programming

enum class QpStatus { Optimal, Infeasible };

struct QpResult {
  QpStatus status = QpStatus::Infeasible;
  Vec u;
  std::vector<int> active_set;  ///< ascending constraint-row indices
  Vec multipliers;              ///< aligned with active_set
};

/// min 0.5 u'Hu + f'u  s.t.  G u <= b   (primal active set, LP phase 1).
///
/// Throws NotPositiveDefinite when H is not SPD and Infeasible when the
/// feasible set is empty. `theta_shift`, when given, is added to b.
QpResult qp_active_set(const Mat& h, const Vec& f, const Mat& g, const Vec& b,
                       const std::optional<Vec>& theta_shift = std::nullopt);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Mat& symmetric);

}  // namespace facetmpc
