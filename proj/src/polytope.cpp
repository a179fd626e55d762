#include "facetmpc/polytope.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace facetmpc {
namespace {

void check_shape(const Polytope& p) {
  if (p.a.rows() != p.b.size()) throw Error(ErrorCode::DimensionMismatch, "polytope rows disagree with rhs");
}

Polytope take_rows(const Polytope& p, const std::vector<Eigen::Index>& keep) {
  Polytope out{Mat(static_cast<Eigen::Index>(keep.size()), p.dim()), Vec(static_cast<Eigen::Index>(keep.size()))};
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.a.row(static_cast<Eigen::Index>(k)) = p.a.row(keep[k]);
    out.b(static_cast<Eigen::Index>(k)) = p.b(keep[k]);
  }
  return out;
}

}  // namespace

ChebyshevBall chebyshev(const Polytope& p) {
  check_shape(p);
  const Eigen::Index d = p.dim();
  const Eigen::Index m = p.num_rows();
  // Variables (theta, r); maximize r.
  LpProblem lp;
  lp.objective = Vec::Zero(d + 1);
  lp.objective(d) = 1.0;
  lp.a_ub = Mat(m + 1, d + 1);
  lp.b_ub = Vec(m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    lp.a_ub.row(i).head(d) = p.a.row(i);
    lp.a_ub(i, d) = p.a.row(i).norm();
    lp.b_ub(i) = p.b(i);
  }
  lp.a_ub.row(m).setZero();
  lp.a_ub(m, d) = 1.0;
  lp.b_ub(m) = kTol.unbounded_cap;

  const LpResult res = lp_solve(lp);
  if (res.status == LpStatus::Infeasible) {
    return ChebyshevBall{Vec(), -std::numeric_limits<double>::infinity()};
  }
  if (res.status == LpStatus::Unbounded) {
    // r is capped, so this can only be theta escaping with r pinned; treat as unbounded.
    return ChebyshevBall{Vec::Zero(d), std::numeric_limits<double>::infinity()};
  }
  const Vec& z = *res.z;
  double r = z(d);
  if (r >= kTol.unbounded_cap * (1.0 - 1e-9)) r = std::numeric_limits<double>::infinity();
  return ChebyshevBall{z.head(d), r};
}

bool is_empty(const Polytope& p) { return chebyshev(p).radius < -kTol.feas_tol; }

bool contains(const Polytope& p, const Vec& theta, double tol) {
  check_shape(p);
  if (theta.size() != p.dim()) throw Error(ErrorCode::DimensionMismatch, "point dimension differs from polytope");
  if (p.num_rows() == 0) return true;
  return ((p.a * theta - p.b).array() <= tol).all();
}

Polytope normalize(const Polytope& p) {
  check_shape(p);
  Polytope out = p;
  for (Eigen::Index i = 0; i < p.num_rows(); ++i) {
    const double norm = p.a.row(i).norm();
    if (norm < kTol.zero_row_tol) throw Error(ErrorCode::DegenerateRow, "cannot normalize a zero row");
    out.a.row(i) /= norm;
    out.b(i) /= norm;
  }
  return out;
}

Polytope remove_redundant(const Polytope& p) {
  check_shape(p);
  if (p.num_rows() == 0) throw Error(ErrorCode::EmptyInput, "polytope has no rows");
  if (chebyshev(p).radius < -kTol.feas_tol) throw Error(ErrorCode::EmptyInput, "polytope is empty");

  const Eigen::Index m = p.num_rows();
  const Eigen::Index d = p.dim();
  std::vector<double> norm(m);
  std::vector<bool> alive(m, true);
  for (Eigen::Index i = 0; i < m; ++i) {
    norm[i] = p.a.row(i).norm();
    if (norm[i] < kTol.zero_row_tol) alive[i] = false;  // 0 <= b_i, b_i >= 0 since nonempty
  }

  // Parallel rows with the same orientation: only the tightest can matter.
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!alive[i]) continue;
    for (Eigen::Index k = i + 1; k < m; ++k) {
      if (!alive[k]) continue;
      const double diff = (p.a.row(i) / norm[i] - p.a.row(k) / norm[k]).cwiseAbs().maxCoeff();
      if (diff > 1e-12) continue;
      if (p.b(k) / norm[k] < p.b(i) / norm[i]) {
        alive[i] = false;
        break;
      }
      alive[k] = false;
    }
  }

  for (Eigen::Index i = 0; i < m; ++i) {
    if (!alive[i]) continue;
    std::vector<Eigen::Index> others;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k != i && alive[k]) others.push_back(k);
    }
    LpProblem lp;
    lp.objective = p.a.row(i).transpose() / norm[i];
    lp.a_ub = Mat(static_cast<Eigen::Index>(others.size()) + 1, d);
    lp.b_ub = Vec(static_cast<Eigen::Index>(others.size()) + 1);
    for (std::size_t k = 0; k < others.size(); ++k) {
      lp.a_ub.row(static_cast<Eigen::Index>(k)) = p.a.row(others[k]);
      lp.b_ub(static_cast<Eigen::Index>(k)) = p.b(others[k]);
    }
    lp.a_ub.row(lp.a_ub.rows() - 1) = p.a.row(i) / norm[i];
    lp.b_ub(lp.b_ub.size() - 1) = p.b(i) / norm[i] + 1.0;
    const LpResult res = lp_solve(lp);
    if (res.status == LpStatus::Optimal && res.value <= p.b(i) / norm[i] + kTol.feas_tol) alive[i] = false;
  }

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (alive[i]) keep.push_back(i);
  }
  return take_rows(p, keep);
}

bool opposite_hyperplanes(const Eigen::Ref<const Vec>& a1, double b1, const Eigen::Ref<const Vec>& a2, double b2,
                          double tol) {
  if (a1.size() != a2.size()) return false;
  return (a1 + a2).cwiseAbs().maxCoeff() <= tol && std::abs(b1 + b2) <= tol;
}

Polytope box(const Vec& lower, const Vec& upper) {
  if (lower.size() != upper.size()) throw Error(ErrorCode::DimensionMismatch, "box bounds differ in length");
  const Eigen::Index d = lower.size();
  Polytope out{Mat::Zero(2 * d, d), Vec::Zero(2 * d)};
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!std::isfinite(upper(j))) continue;
    out.a(r, j) = 1.0;
    out.b(r++) = upper(j);
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!std::isfinite(lower(j))) continue;
    out.a(r, j) = -1.0;
    out.b(r++) = -lower(j);
  }
  out.a.conservativeResize(r, d);
  out.b.conservativeResize(r);
  return out;
}

}  // namespace facetmpc
