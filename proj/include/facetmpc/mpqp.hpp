#pragma once

#include <optional>
#include <string>
#include <vector>

#include "facetmpc/numeric.hpp"
#include "facetmpc/plants.hpp"
#include "facetmpc/polytope.hpp"

namespace facetmpc {

/// Stage weights of the plant-wide cost
///   J = sum_i rho_i ( sum_{l=1}^{Np} x_i' Q_i x_i + sum_{l=0}^{Np-1} u_i' R_i u_i ).
struct CostWeights {
  std::vector<Mat> q;
  std::vector<Mat> r;
  Vec rho;

  static CostWeights identity(const Plant& p);
};

struct MpcProblem {
  Plant plant;
  CostWeights weights;
  std::optional<int> controller;  ///< nullopt: centralized
  /// Terminal box for x(Np); nullopt means the state box.
  std::optional<std::pair<Vec, Vec>> terminal_box;
};

/// Parameter vector layout: theta = [x(k); U_j for j in `others`].
struct ThetaLayout {
  Eigen::Index nx = 0;
  std::vector<int> others;
  std::vector<Eigen::Index> block_len;

  Eigen::Index size() const;
  /// Offset of subsystem j's block inside theta, or -1 when absent.
  Eigen::Index offset_of(int j) const;
};

/// min_U 0.5 U'HU + (theta' H_t + c') U   s.t.  G U <= b + F theta,
/// with theta restricted to [theta_lb, theta_ub] (entries may be infinite).
struct MpQpData {
  Mat h;
  Mat h_t;  ///< n_theta x n_dec
  Vec c;
  Mat g;
  Vec b;
  Mat f;  ///< n_c x n_theta
  Vec theta_lb;
  Vec theta_ub;
  ThetaLayout layout;
  std::optional<int> controller;

  Eigen::Index n_dec() const { return h.rows(); }
  Eigen::Index n_theta() const { return f.cols(); }
  Eigen::Index n_c() const { return g.rows(); }
  /// Throws DimensionMismatch when the matrices disagree.
  void validate() const;
};

struct CriticalRegion {
  int id = 0;
  Polytope region;  ///< normalized, redundancy-free
  Mat gain;         ///< U*(theta) = gain * theta + offset
  Vec offset;
  std::vector<int> active_set;
};

struct EnumerationDiagnostics {
  long candidates = 0;
  long pruned_infeasible = 0;
  long pruned_dependent = 0;
  long degenerate_kkt = 0;
  long lower_dimensional = 0;
};

struct MpSolution {
  std::vector<CriticalRegion> regions;
  Eigen::Index theta_dim = 0;
  Eigen::Index dec_dim = 0;
  ThetaLayout layout;
  std::optional<int> controller;
  std::string plant_hash;
  EnumerationDiagnostics diagnostics;

  int num_regions() const { return static_cast<int>(regions.size()); }
};

struct ExplicitValue {
  Vec u;
  int region_id = -1;
};

/// Condensed parametric QP of one local controller (or the centralized one).
MpQpData build_condensed(const MpcProblem& p);

/// The online QP instance of `q` at a fixed parameter.
QpResult solve_online(const MpQpData& q, const Vec& theta);

/// Exhaustive active-set enumeration with infeasibility pruning (a set whose
/// equality system admits no (U, theta) has no feasible supersets).
MpSolution enumerate_regions(const MpQpData& q);

/// First region (ascending id) containing theta.
std::optional<int> locate(const MpSolution& s, const Vec& theta, double tol = kTol.locate_tol);

/// Throws OutsideFeasibleSet when no region contains theta.
ExplicitValue evaluate_explicit(const MpSolution& s, const Vec& theta);

}  // namespace facetmpc
