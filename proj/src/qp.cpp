#include <algorithm>
#include <cmath>
#include <vector>

#include "facetmpc/numeric.hpp"

namespace facetmpc {
namespace {

// Solves the equality-constrained subproblem
//   [H  Gw'] [p     ]   [-g]
//   [Gw  0 ] [lambda] = [ 0]
// and returns (p, lambda).
std::pair<Vec, Vec> solve_eqp(const Mat& h, const Vec& g, const Mat& g_work) {
  const Eigen::Index n = h.rows();
  const Eigen::Index w = g_work.rows();
  Mat kkt = Mat::Zero(n + w, n + w);
  kkt.topLeftCorner(n, n) = h;
  kkt.topRightCorner(n, w) = g_work.transpose();
  kkt.bottomLeftCorner(w, n) = g_work;
  Vec rhs = Vec::Zero(n + w);
  rhs.head(n) = -g;
  Vec sol = kkt.fullPivLu().solve(rhs);
  return {sol.head(n), sol.tail(w)};
}

bool independent_of(const Mat& rows, const Vec& candidate) {
  if (rows.rows() == 0) return candidate.norm() > kTol.zero_row_tol;
  Mat stacked(rows.rows() + 1, rows.cols());
  stacked << rows, candidate.transpose();
  Eigen::FullPivLU<Mat> lu(stacked.transpose());
  lu.setThreshold(1e-10);
  return lu.rank() == stacked.rows();
}

Mat gather_rows(const Mat& g, const std::vector<int>& idx) {
  Mat out(static_cast<Eigen::Index>(idx.size()), g.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = g.row(idx[k]);
  return out;
}

}  // namespace

QpResult qp_active_set(const Mat& h, const Vec& f, const Mat& g, const Vec& b_in,
                       const std::optional<Vec>& theta_shift) {
  const Eigen::Index n = h.rows();
  if (h.cols() != n || f.size() != n) throw Error(ErrorCode::DimensionMismatch, "QP: H must be square and match f");
  if (g.rows() != b_in.size() || (g.rows() > 0 && g.cols() != n)) {
    throw Error(ErrorCode::DimensionMismatch, "QP: G/b dimensions disagree");
  }
  if (theta_shift && theta_shift->size() != b_in.size()) {
    throw Error(ErrorCode::DimensionMismatch, "QP: shift length differs from b");
  }
  require_finite(h, "H");
  require_finite(f, "f");
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + h.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::NotPositiveDefinite, "H is not symmetric");
  }
  if (min_eigenvalue(h) <= kTol.pd_tol) throw Error(ErrorCode::NotPositiveDefinite, "H has eigenvalue <= 1e-10");

  Vec b = theta_shift ? Vec(b_in + *theta_shift) : b_in;
  const Eigen::Index m = g.rows();

  QpResult out;
  if (m == 0) {
    out.status = QpStatus::Optimal;
    out.u = h.llt().solve(-f);
    out.multipliers = Vec(0);
    return out;
  }

  // Phase 1: any vertex of the feasible polyhedron.
  LpProblem lp{Vec::Zero(n), g, b, std::nullopt, std::nullopt};
  LpResult start = lp_solve(lp);
  if (start.status != LpStatus::Optimal) throw Error(ErrorCode::Infeasible, "QP constraints admit no point");
  Vec u = *start.z;

  std::vector<double> row_norm(m);
  for (Eigen::Index i = 0; i < m; ++i) row_norm[i] = std::max(g.row(i).norm(), 1e-300);

  std::vector<int> work;
  for (Eigen::Index i = 0; i < m && static_cast<Eigen::Index>(work.size()) < n; ++i) {
    const double slack = (b(i) - g.row(i).dot(u)) / row_norm[i];
    if (std::abs(slack) <= 1e-9 && independent_of(gather_rows(g, work), g.row(i).transpose())) {
      work.push_back(static_cast<int>(i));
    }
  }

  const int max_iter = 20 * static_cast<int>(n + m) + 200;
  for (int iter = 0; iter < max_iter; ++iter) {
    const Mat g_work = gather_rows(g, work);
    const Vec grad = h * u + f;
    auto [step, lambda] = solve_eqp(h, grad, g_work);

    if (step.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + u.lpNorm<Eigen::Infinity>())) {
      // Multipliers of the current working set.
      Eigen::Index worst = -1;
      double worst_val = -kTol.dual_tol;
      for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        if (lambda(k) < worst_val) {
          worst_val = lambda(k);
          worst = k;
        }
      }
      if (worst < 0) {
        std::vector<std::size_t> order(work.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return work[a] < work[c]; });
        out.status = QpStatus::Optimal;
        out.u = u;
        out.active_set.reserve(work.size());
        out.multipliers.resize(static_cast<Eigen::Index>(work.size()));
        for (std::size_t k = 0; k < order.size(); ++k) {
          out.active_set.push_back(work[order[k]]);
          out.multipliers(static_cast<Eigen::Index>(k)) = std::max(lambda(static_cast<Eigen::Index>(order[k])), 0.0);
        }
        return out;
      }
      work.erase(work.begin() + worst);
      continue;
    }

    // Longest feasible step along `step`.
    double alpha = 1.0;
    int blocking = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::find(work.begin(), work.end(), static_cast<int>(i)) != work.end()) continue;
      const double gp = g.row(i).dot(step);
      if (gp <= 1e-14 * row_norm[i]) continue;
      const double ratio = std::max(b(i) - g.row(i).dot(u), 0.0) / gp;
      if (ratio < alpha) {
        alpha = ratio;
        blocking = static_cast<int>(i);
      }
    }
    u += alpha * step;
    if (blocking >= 0) work.push_back(blocking);
  }
  throw Error(ErrorCode::NumericalFailure, "active-set QP iteration limit reached");
}

}  // namespace facetmpc
