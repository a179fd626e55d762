#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "facetmpc/numeric.hpp"

namespace facetmpc {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kPriceTol = 1e-10;
constexpr int kDegenerateRunBeforeBland = 50;

enum class RowKind { Slack, Free, Dead };

// Tableau layout: columns [0, n) structural (free) variables, [n, n+m) slacks,
// n+m the phase-1 artificial, last column the right-hand side. Rows [0, m) are
// constraints, row m the phase-2 objective, row m+1 the phase-1 objective.
// Objective rows store v + sum_j T(obj, j) x_j = T(obj, rhs).
class Tableau {
 public:
  Tableau(const Mat& a, const Vec& b, const Vec& c)
      : n_(a.cols()), m_(a.rows()), t_(Mat::Zero(m_ + 2, n_ + m_ + 2)), basis_(m_), kind_(m_, RowKind::Slack) {
    t_.topLeftCorner(m_, n_) = a;
    t_.block(0, n_, m_, m_).setIdentity();
    t_.col(rhs()).head(m_) = b;
    t_.row(m_).head(n_) = -c.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) basis_[i] = n_ + i;
    enterable_.assign(n_ + m_ + 1, false);
    for (Eigen::Index j = n_; j < n_ + m_; ++j) enterable_[j] = true;
  }

  Eigen::Index rhs() const { return n_ + m_ + 1; }
  Eigen::Index artificial() const { return n_ + m_; }
  Eigen::Index phase2_row() const { return m_; }
  Eigen::Index phase1_row() const { return m_ + 1; }

  void pivot(Eigen::Index r, Eigen::Index c) {
    const double p = t_(r, c);
    t_.row(r) /= p;
    Vec col = t_.col(c);
    col(r) = 0.0;
    t_.noalias() -= col * t_.row(r);
    t_.col(c).setZero();
    t_(r, c) = 1.0;
    basis_[r] = c;
  }

  // Moves every structural variable into the basis. Columns that vanish on
  // all slack rows do not influence feasibility and are reported back.
  std::vector<Eigen::Index> eliminate_free() {
    // Complete pivoting: always take the largest remaining entry so that a
    // tiny coefficient never becomes a pivot.
    std::vector<bool> done(n_, false);
    for (Eigen::Index step = 0; step < n_; ++step) {
      Eigen::Index best_i = -1, best_j = -1;
      double best_abs = kPivotTol;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (done[j]) continue;
        for (Eigen::Index i = 0; i < m_; ++i) {
          if (kind_[i] != RowKind::Slack) continue;
          const double v = std::abs(t_(i, j));
          if (v > best_abs) {
            best_abs = v;
            best_i = i;
            best_j = j;
          }
        }
      }
      if (best_j < 0) break;
      pivot(best_i, best_j);
      kind_[best_i] = RowKind::Free;
      done[best_j] = true;
    }
    std::vector<Eigen::Index> absent;
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (!done[j]) absent.push_back(j);
    }
    return absent;
  }

  // Returns false when the constraints admit no point.
  bool phase1(double feas_tol) {
    Eigen::Index worst = -1;
    double worst_rhs = -feas_tol;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (kind_[i] != RowKind::Slack) continue;
      if (t_(i, rhs()) < worst_rhs) {
        worst_rhs = t_(i, rhs());
        worst = i;
      }
    }
    if (worst < 0) {
      clamp_rhs();
      return true;
    }
    const Eigen::Index art = artificial();
    for (Eigen::Index i = 0; i < m_; ++i) {
      t_(i, art) = kind_[i] == RowKind::Slack ? -1.0 : 0.0;
    }
    t_(phase1_row(), art) = 1.0;
    enterable_[art] = true;
    pivot(worst, art);
    clamp_rhs();
    if (run(phase1_row()) != Outcome::Optimal) {
      throw Error(ErrorCode::NumericalFailure, "phase-1 LP reported unbounded");
    }
    if (t_(phase1_row(), rhs()) < -feas_tol) return false;

    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] != art || kind_[i] != RowKind::Slack) continue;
      Eigen::Index col = -1;
      double best = 1e-9;
      for (Eigen::Index j = n_; j < n_ + m_; ++j) {
        if (std::abs(t_(i, j)) > best) {
          best = std::abs(t_(i, j));
          col = j;
        }
      }
      if (col >= 0) {
        pivot(i, col);
      } else {
        kind_[i] = RowKind::Dead;
      }
    }
    enterable_[art] = false;
    t_.col(art).setZero();
    clamp_rhs();
    return true;
  }

  enum class Outcome { Optimal, Unbounded };

  Outcome run(Eigen::Index obj) {
    const long max_iter = 50L * (m_ + n_) + 1000;
    int degenerate_run = 0;
    bool bland = false;
    for (long iter = 0; iter < max_iter; ++iter) {
      Eigen::Index enter = -1;
      double best = -kPriceTol;
      for (Eigen::Index j = 0; j <= artificial(); ++j) {
        if (!enterable_[j]) continue;
        const double d = t_(obj, j);
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return Outcome::Optimal;

      // Harris two-pass ratio test: among rows whose ratio is within a small
      // relaxation of the minimum, take the largest pivot.
      constexpr double kRelax = 1e-9;
      double theta_max = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (kind_[i] != RowKind::Slack) continue;
        const double a = t_(i, enter);
        if (a > kPivotTol) theta_max = std::min(theta_max, (std::max(t_(i, rhs()), 0.0) + kRelax) / a);
      }
      Eigen::Index leave = -1;
      double min_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (kind_[i] != RowKind::Slack) continue;
        const double a = t_(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = std::max(t_(i, rhs()), 0.0) / a;
        if (ratio > theta_max) continue;
        const bool better = leave < 0 || (bland ? basis_[i] < basis_[leave] : a > t_(leave, enter));
        if (better) leave = i;
        min_ratio = std::min(min_ratio, ratio);
      }
      if (leave < 0) return Outcome::Unbounded;

      degenerate_run = min_ratio < 1e-12 ? degenerate_run + 1 : 0;
      if (degenerate_run > kDegenerateRunBeforeBland) bland = true;
      // A slightly negative leaving value would move the entering variable
      // backwards by rhs / pivot; treat it as degenerate instead.
      if (t_(leave, rhs()) < 0.0) t_(leave, rhs()) = 0.0;
      pivot(leave, enter);
      clamp_rhs();
    }
    throw Error(ErrorCode::NumericalFailure, "simplex pivot budget exhausted");
  }

  // Rounding can leave tiny negative right-hand sides on slack rows.
  void clamp_rhs() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (kind_[i] == RowKind::Slack && t_(i, rhs()) < 0.0 && t_(i, rhs()) > -kTol.feas_tol) t_(i, rhs()) = 0.0;
    }
  }

  double reduced_cost(Eigen::Index j) const { return t_(phase2_row(), j); }

  // Rows whose slack is nonbasic, i.e. the constraints tight at the vertex.
  std::vector<Eigen::Index> tight_rows() const {
    std::vector<bool> basic(n_ + m_ + 1, false);
    for (Eigen::Index i = 0; i < m_; ++i) basic[basis_[i]] = true;
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!basic[n_ + i]) out.push_back(i);
    }
    return out;
  }

  Vec structural_values() const {
    Vec z = Vec::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (kind_[i] != RowKind::Dead && basis_[i] < n_) z(basis_[i]) = t_(i, rhs());
    }
    return z;
  }

 private:
  Eigen::Index n_;
  Eigen::Index m_;
  Mat t_;
  std::vector<Eigen::Index> basis_;
  std::vector<RowKind> kind_;
  std::vector<bool> enterable_;
};

}  // namespace

LpResult lp_solve(const LpProblem& p) {
  const Eigen::Index n = p.objective.size();
  if (p.a_ub.rows() != p.b_ub.size() || (p.a_ub.rows() > 0 && p.a_ub.cols() != n)) {
    throw Error(ErrorCode::DimensionMismatch, "LP rows/columns disagree with objective length");
  }
  if ((p.lower && p.lower->size() != n) || (p.upper && p.upper->size() != n)) {
    throw Error(ErrorCode::DimensionMismatch, "LP bound vectors disagree with objective length");
  }
  require_finite(p.objective, "LP objective");
  require_finite(p.a_ub, "LP A_ub");
  require_finite(p.b_ub, "LP b_ub");

  // Assemble rows (including finite bounds) and scale them to unit norm.
  std::vector<std::pair<Vec, double>> rows;
  rows.reserve(p.a_ub.rows() + 2 * n);
  for (Eigen::Index i = 0; i < p.a_ub.rows(); ++i) rows.emplace_back(p.a_ub.row(i).transpose(), p.b_ub(i));
  for (Eigen::Index j = 0; j < n; ++j) {
    if (p.upper && std::isfinite((*p.upper)(j))) {
      Vec e = Vec::Zero(n);
      e(j) = 1.0;
      rows.emplace_back(e, (*p.upper)(j));
    }
    if (p.lower && std::isfinite((*p.lower)(j))) {
      Vec e = Vec::Zero(n);
      e(j) = -1.0;
      rows.emplace_back(e, -(*p.lower)(j));
    }
  }

  Mat a(static_cast<Eigen::Index>(rows.size()), n);
  Vec b(static_cast<Eigen::Index>(rows.size()));
  Eigen::Index m = 0;
  for (const auto& [row, rhs] : rows) {
    const double norm = row.norm();
    if (norm < kTol.zero_row_tol) {
      if (rhs < -kTol.feas_tol) return LpResult{LpStatus::Infeasible, std::nullopt, 0.0};
      continue;
    }
    a.row(m) = row.transpose() / norm;
    b(m) = rhs / norm;
    ++m;
  }
  a.conservativeResize(m, n);
  b.conservativeResize(m);

  Tableau tab(a, b, p.objective);
  const auto absent = tab.eliminate_free();
  // The phase-1 optimum carries rounding on the order of ulp(max |b|).
  const double phase1_tol = kTol.feas_tol + 1e-14 * (m > 0 ? b.lpNorm<Eigen::Infinity>() : 0.0);
  if (!tab.phase1(phase1_tol)) return LpResult{LpStatus::Infeasible, std::nullopt, 0.0};
  for (Eigen::Index j : absent) {
    if (std::abs(tab.reduced_cost(j)) > kPriceTol) return LpResult{LpStatus::Unbounded, std::nullopt, 0.0};
  }
  if (tab.run(tab.phase2_row()) == Tableau::Outcome::Unbounded) {
    return LpResult{LpStatus::Unbounded, std::nullopt, 0.0};
  }

  Vec z = tab.structural_values();
  if (m > 0) {
    // Re-solve the vertex from the original rows: the tableau drifts on long
    // degenerate runs, the tight system does not.
    const auto tight = tab.tight_rows();
    if (absent.empty() && static_cast<Eigen::Index>(tight.size()) >= n && n > 0) {
      Mat at(static_cast<Eigen::Index>(tight.size()), n);
      Vec bt(at.rows());
      for (std::size_t k = 0; k < tight.size(); ++k) {
        at.row(static_cast<Eigen::Index>(k)) = a.row(tight[k]);
        bt(static_cast<Eigen::Index>(k)) = b(tight[k]);
      }
      Eigen::ColPivHouseholderQR<Mat> qr(at);
      if (qr.rank() == n) {
        const Vec refined = qr.solve(bt);
        if ((a * refined - b).maxCoeff() < (a * z - b).maxCoeff()) z = refined;
      }
    }
    // Rounding grows with the magnitude of the iterate.
    const double violation = (a * z - b).maxCoeff();
    if (violation > 1e-7 * (1.0 + z.lpNorm<Eigen::Infinity>())) {
      throw Error(ErrorCode::NumericalFailure, "simplex optimum violates constraints");
    }
  }
  return LpResult{LpStatus::Optimal, z, p.objective.dot(z)};
}

}  // namespace facetmpc
