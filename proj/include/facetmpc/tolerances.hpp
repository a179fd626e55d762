#pragma once

namespace facetmpc {

/// Every numerical threshold used by the library lives here so tests and
/// callers reference one source.
struct ToleranceConfig {
  double feas_tol = 1e-9;   ///< primal feasibility (LP rows are unit-normalized)
  double kkt_tol = 1e-8;    ///< stationarity residual of QP solutions
  double dual_tol = 1e-9;   ///< smallest admissible multiplier
  double rank_tol = 1e-8;   ///< relative singular-value cutoff
  double lin_tol = 1e-9;    ///< relative residual of dense linear solves
  double pivot_tol = 1e-12; ///< relative pivot size below which a matrix is singular
  double pd_tol = 1e-10;    ///< smallest admissible Hessian eigenvalue
  double zero_row_tol = 1e-12;
  double hyperplane_tol = 1e-7;  ///< opposite-hyperplane identity
  double min_region_radius = 1e-9;
  double t_zero_tol = 1e-7;      ///< PointTouch vs CommonFacet
  double locate_tol = 1e-9;      ///< point location in explicit solutions
  double combo_tol = 1e-8;       ///< region verification of a combined solve
  double combo_pivot_tol = 1e-10;
  double unbounded_cap = 1e7;    ///< box used to recover a finite witness for unbounded LPs
};

inline constexpr ToleranceConfig kTol{};

}  // namespace facetmpc
