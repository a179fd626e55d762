#include "facetmpc/mpqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace facetmpc {

CostWeights CostWeights::identity(const Plant& p) {
  CostWeights w;
  for (const auto& s : p.subsystems) {
    w.q.push_back(Mat::Identity(s.nx(), s.nx()));
    w.r.push_back(Mat::Identity(s.nu(), s.nu()));
  }
  w.rho = Vec::Ones(p.num_subsystems());
  return w;
}

Eigen::Index ThetaLayout::size() const {
  Eigen::Index n = nx;
  for (auto len : block_len) n += len;
  return n;
}

Eigen::Index ThetaLayout::offset_of(int j) const {
  Eigen::Index off = nx;
  for (std::size_t k = 0; k < others.size(); ++k) {
    if (others[k] == j) return off;
    off += block_len[k];
  }
  return -1;
}

void MpQpData::validate() const {
  const Eigen::Index n = h.rows();
  const Eigen::Index nt = f.cols();
  auto fail = [](const char* what) { throw Error(ErrorCode::DimensionMismatch, what); };
  if (h.cols() != n) fail("H must be square");
  if (h_t.rows() != nt || h_t.cols() != n) fail("H_t must be n_theta x n_dec");
  if (c.size() != n) fail("c must have n_dec entries");
  if (g.rows() != b.size() || f.rows() != b.size()) fail("G, b, F row counts differ");
  if (g.rows() > 0 && g.cols() != n) fail("G must have n_dec columns");
  if (theta_lb.size() != nt || theta_ub.size() != nt) fail("theta bounds must have n_theta entries");
  if (layout.size() != nt) fail("theta layout does not cover n_theta slots");
}

namespace {

// Prediction matrices for x(1..Np) = Sx x + sum_j Su[j] U_j.
struct Prediction {
  Mat sx;
  std::vector<Mat> su;
};

Prediction predict(const Plant& p) {
  const GlobalModel gm = assemble_global(p);
  const Eigen::Index nx = p.nx();
  const int np = p.horizon;
  std::vector<Mat> powers(np + 1);
  powers[0] = Mat::Identity(nx, nx);
  for (int l = 1; l <= np; ++l) powers[l] = gm.a * powers[l - 1];

  Prediction out;
  out.sx = Mat(nx * np, nx);
  for (int l = 1; l <= np; ++l) out.sx.middleRows((l - 1) * nx, nx) = powers[l];
  for (int j = 0; j < p.num_subsystems(); ++j) {
    const Eigen::Index nu = gm.b[j].cols();
    Mat su = Mat::Zero(nx * np, nu * np);
    for (int l = 1; l <= np; ++l)
      for (int t = 0; t < l; ++t) su.block((l - 1) * nx, t * nu, nx, nu) = powers[l - 1 - t] * gm.b[j];
    out.su.push_back(std::move(su));
  }
  return out;
}

Mat hcat(const std::vector<const Mat*>& blocks, Eigen::Index rows) {
  Eigen::Index cols = 0;
  for (const Mat* m : blocks) cols += m->cols();
  Mat out(rows, cols);
  Eigen::Index c = 0;
  for (const Mat* m : blocks) {
    out.middleCols(c, m->cols()) = *m;
    c += m->cols();
  }
  return out;
}

}  // namespace

MpQpData build_condensed(const MpcProblem& prob) {
  const Plant& p = prob.plant;
  validate_plant(p);
  const int m = p.num_subsystems();
  const int np = p.horizon;
  const Eigen::Index nx = p.nx();
  const auto& w = prob.weights;
  if (static_cast<int>(w.q.size()) != m || static_cast<int>(w.r.size()) != m || w.rho.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "cost weights need one entry per subsystem");
  }
  for (int i = 0; i < m; ++i) {
    const auto& s = p.subsystems[i];
    if (w.q[i].rows() != s.nx() || w.q[i].cols() != s.nx()) throw Error(ErrorCode::DimensionMismatch, "Q_i shape");
    if (w.r[i].rows() != s.nu() || w.r[i].cols() != s.nu()) throw Error(ErrorCode::DimensionMismatch, "R_i shape");
    if (!(w.rho(i) > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho_i must be positive");
    if (min_eigenvalue(0.5 * (w.r[i] + w.r[i].transpose())) <= kTol.pd_tol) {
      throw Error(ErrorCode::NotPositiveDefinite, "R_i must be positive definite");
    }
  }
  if (prob.controller && (*prob.controller < 0 || *prob.controller >= m)) {
    throw Error(ErrorCode::InvalidArgument, "controller index out of range");
  }

  const Prediction pred = predict(p);

  // Stacked weights over the horizon.
  Mat q_stage = Mat::Zero(nx, nx);
  for (int i = 0; i < m; ++i) {
    q_stage.block(p.state_offset(i), p.state_offset(i), p.subsystems[i].nx(), p.subsystems[i].nx()) =
        w.rho(i) * w.q[i];
  }
  Mat q_hat = Mat::Zero(nx * np, nx * np);
  for (int l = 0; l < np; ++l) q_hat.block(l * nx, l * nx, nx, nx) = q_stage;
  auto r_hat = [&](int j) {
    const Eigen::Index nu = p.subsystems[j].nu();
    Mat r = Mat::Zero(nu * np, nu * np);
    for (int l = 0; l < np; ++l) r.block(l * nu, l * nu, nu, nu) = w.rho(j) * w.r[j];
    return r;
  };

  std::vector<int> decision;  // subsystems whose inputs are decided here
  MpQpData q;
  q.controller = prob.controller;
  q.layout.nx = nx;
  if (prob.controller) {
    decision = {*prob.controller};
    for (int j = 0; j < m; ++j) {
      if (j == *prob.controller) continue;
      q.layout.others.push_back(j);
      q.layout.block_len.push_back(p.subsystems[j].nu() * np);
    }
  } else {
    for (int j = 0; j < m; ++j) decision.push_back(j);
  }

  std::vector<const Mat*> dec_blocks;
  for (int j : decision) dec_blocks.push_back(&pred.su[j]);
  const Mat su_dec = hcat(dec_blocks, nx * np);
  std::vector<const Mat*> par_blocks{&pred.sx};
  for (int j : q.layout.others) par_blocks.push_back(&pred.su[j]);
  const Mat w_par = hcat(par_blocks, nx * np);

  Mat r_dec = Mat::Zero(su_dec.cols(), su_dec.cols());
  {
    Eigen::Index off = 0;
    for (int j : decision) {
      const Mat r = r_hat(j);
      r_dec.block(off, off, r.rows(), r.cols()) = r;
      off += r.rows();
    }
  }

  // 0.5 U'HU + theta'H_t U is J/2 up to a theta-only constant.
  q.h = su_dec.transpose() * q_hat * su_dec + r_dec;
  q.h = 0.5 * (q.h + q.h.transpose()).eval();
  q.h_t = w_par.transpose() * q_hat * su_dec;
  q.c = Vec::Zero(su_dec.cols());

  const Eigen::Index n_dec = su_dec.cols();
  const Eigen::Index n_theta = w_par.cols();
  const Vec x_lb = p.x_lb();
  const Vec x_ub = p.x_ub();
  bool extra_terminal = false;
  if (prob.terminal_box) {
    const auto& [t_lb, t_ub] = *prob.terminal_box;
    if (t_lb.size() != nx || t_ub.size() != nx) throw Error(ErrorCode::DimensionMismatch, "terminal box size");
    extra_terminal = !(t_lb == x_lb && t_ub == x_ub);
  }

  Eigen::Index n_inputs_dec = 0;
  for (int j : decision) n_inputs_dec += p.subsystems[j].nu();
  const Eigen::Index n_c = 2 * nx * np + (extra_terminal ? 2 * nx : 0) + 2 * n_inputs_dec * np;
  q.g = Mat::Zero(n_c, n_dec);
  q.b = Vec::Zero(n_c);
  q.f = Mat::Zero(n_c, n_theta);

  Eigen::Index row = 0;
  auto add_state_rows = [&](int l, const Vec& lb, const Vec& ub) {
    const auto su_l = su_dec.middleRows((l - 1) * nx, nx);
    const auto w_l = w_par.middleRows((l - 1) * nx, nx);
    q.g.middleRows(row, nx) = su_l;
    q.b.segment(row, nx) = ub;
    q.f.middleRows(row, nx) = -w_l;
    row += nx;
    q.g.middleRows(row, nx) = -su_l;
    q.b.segment(row, nx) = -lb;
    q.f.middleRows(row, nx) = w_l;
    row += nx;
  };
  for (int l = 1; l <= np; ++l) add_state_rows(l, x_lb, x_ub);
  if (extra_terminal) add_state_rows(np, prob.terminal_box->first, prob.terminal_box->second);

  for (int l = 0; l < np; ++l) {
    for (int sign : {1, -1}) {
      Eigen::Index dec_off = 0;
      for (int j : decision) {
        const auto& s = p.subsystems[j];
        for (Eigen::Index k = 0; k < s.nu(); ++k) {
          q.g(row, dec_off + l * s.nu() + k) = sign;
          q.b(row) = sign > 0 ? s.u_ub(k) : -s.u_lb(k);
          ++row;
        }
        dec_off += s.nu() * np;
      }
    }
  }

  q.theta_lb = Vec::Constant(n_theta, -std::numeric_limits<double>::infinity());
  q.theta_ub = Vec::Constant(n_theta, std::numeric_limits<double>::infinity());
  q.theta_lb.head(nx) = x_lb;
  q.theta_ub.head(nx) = x_ub;
  // A peer's trajectory always comes out of that peer's own QP, so it lies in
  // that peer's input box.
  for (int j : q.layout.others) {
    const auto& s = p.subsystems[j];
    const Eigen::Index off = q.layout.offset_of(j);
    for (int l = 0; l < np; ++l) {
      q.theta_lb.segment(off + l * s.nu(), s.nu()) = s.u_lb;
      q.theta_ub.segment(off + l * s.nu(), s.nu()) = s.u_ub;
    }
  }
  q.validate();
  return q;
}

QpResult solve_online(const MpQpData& q, const Vec& theta) {
  if (theta.size() != q.n_theta()) throw Error(ErrorCode::DimensionMismatch, "theta length");
  const Vec f = q.h_t.transpose() * theta + q.c;
  const Vec shift = q.f * theta;
  return qp_active_set(q.h, f, q.g, q.b, shift);
}

namespace {

class Enumerator {
 public:
  explicit Enumerator(const MpQpData& q) : q_(q) {
    q_.validate();
    if (min_eigenvalue(q_.h) <= kTol.pd_tol) throw Error(ErrorCode::NotPositiveDefinite, "H must be SPD");
    h_inv_ = q_.h.llt().solve(Mat::Identity(q_.n_dec(), q_.n_dec()));
    hinv_gt_ = h_inv_ * q_.g.transpose();
    hinv_ht_ = h_inv_ * q_.h_t.transpose();
    hinv_c_ = h_inv_ * q_.c;
    theta_box_ = box(q_.theta_lb, q_.theta_ub);
    max_active_ = static_cast<int>(std::min(q_.n_dec(), q_.n_c()));
  }

  MpSolution run() {
    std::vector<int> set;
    process(set);
    descend(set, 0);

    std::sort(found_.begin(), found_.end(), [](const CriticalRegion& a, const CriticalRegion& b) {
      if (a.active_set.size() != b.active_set.size()) return a.active_set.size() < b.active_set.size();
      return a.active_set < b.active_set;
    });
    MpSolution s;
    s.theta_dim = q_.n_theta();
    s.dec_dim = q_.n_dec();
    s.layout = q_.layout;
    s.controller = q_.controller;
    s.diagnostics = diag_;
    for (auto& r : found_) {
      // A rowless region is the whole parameter space and stays rowless.
      if (r.region.num_rows() > 0) r.region = remove_redundant(r.region);
      r.id = static_cast<int>(s.regions.size());
      s.regions.push_back(std::move(r));
    }
    return s;
  }

 private:
  void descend(std::vector<int>& set, int start) {
    if (static_cast<int>(set.size()) >= max_active_) return;
    for (int i = start; i < q_.n_c(); ++i) {
      set.push_back(i);
      if (process(set)) descend(set, i + 1);
      set.pop_back();
    }
  }

  // Returns whether supersets of `set` can still yield regions.
  bool process(const std::vector<int>& set) {
    ++diag_.candidates;
    const Eigen::Index na = static_cast<Eigen::Index>(set.size());
    const Eigen::Index nd = q_.n_dec();
    const Eigen::Index nt = q_.n_theta();

    Mat g_a(na, nd), f_a(na, nt), hinv_gat(nd, na);
    Vec b_a(na);
    for (Eigen::Index k = 0; k < na; ++k) {
      g_a.row(k) = q_.g.row(set[k]);
      f_a.row(k) = q_.f.row(set[k]);
      b_a(k) = q_.b(set[k]);
      hinv_gat.col(k) = hinv_gt_.col(set[k]);
    }

    Mat l_mat = Mat::Zero(na, nt);
    Vec l_vec = Vec::Zero(na);
    if (na > 0) {
      Eigen::FullPivLU<Mat> dep(g_a);
      dep.setThreshold(1e-10);
      if (dep.rank() < na) {
        ++diag_.pruned_dependent;
        return false;
      }
      const Mat schur = g_a * hinv_gat;
      Eigen::FullPivLU<Mat> lu(schur);
      const double scale = schur.cwiseAbs().maxCoeff();
      if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() < 1e-12 * std::max(scale, 1e-300)) {
        ++diag_.degenerate_kkt;
        return feasible(set);
      }
    }
    Mat gain = -hinv_ht_;
    Vec offset = -hinv_c_;
    if (na > 0) {
      // The Schur complement squares the conditioning of G_A, which costs
      // whole digits in thin regions; the law comes from the full KKT system.
      Mat kkt = Mat::Zero(nd + na, nd + na);
      kkt.topLeftCorner(nd, nd) = q_.h;
      kkt.topRightCorner(nd, na) = g_a.transpose();
      kkt.bottomLeftCorner(na, nd) = g_a;
      Mat rhs_k(nd + na, nt + 1);
      rhs_k.topLeftCorner(nd, nt) = -q_.h_t.transpose();
      rhs_k.topRightCorner(nd, 1) = -q_.c;
      rhs_k.bottomLeftCorner(na, nt) = f_a;
      rhs_k.bottomRightCorner(na, 1) = b_a;
      Eigen::FullPivLU<Mat> klu(kkt);
      Mat sol = klu.solve(rhs_k);
      sol += klu.solve(rhs_k - kkt * sol);
      gain = sol.topLeftCorner(nd, nt);
      offset = sol.topRightCorner(nd, 1);
      l_mat = sol.bottomLeftCorner(na, nt);
      l_vec = sol.bottomRightCorner(na, 1);
    }

    // Region rows: inactive primal feasibility, dual feasibility, theta box.
    std::vector<char> active(q_.n_c(), 0);
    for (int i : set) active[i] = 1;
    const Eigen::Index max_rows = q_.n_c() - na + na + theta_box_.num_rows();
    Mat a(max_rows, nt);
    Vec rhs(max_rows);
    Eigen::Index r = 0;
    bool empty = false;
    auto push = [&](const Eigen::Ref<const Eigen::RowVectorXd>& row, double beta) {
      const double norm = row.norm();
      if (norm < 1e-10) {
        if (beta < -kTol.feas_tol) empty = true;
        return;
      }
      a.row(r) = row / norm;
      rhs(r) = beta / norm;
      ++r;
    };
    for (Eigen::Index i = 0; i < q_.n_c(); ++i) {
      if (active[i]) continue;
      push(q_.g.row(i) * gain - q_.f.row(i), q_.b(i) - q_.g.row(i).dot(offset));
    }
    for (Eigen::Index k = 0; k < na; ++k) push(-l_mat.row(k), l_vec(k));
    for (Eigen::Index k = 0; k < theta_box_.num_rows(); ++k) push(theta_box_.a.row(k), theta_box_.b(k));

    if (!empty) {
      Polytope region{a.topRows(r), rhs.head(r)};
      const ChebyshevBall ball = chebyshev(region);
      if (ball.radius >= kTol.min_region_radius) {
        found_.push_back(CriticalRegion{0, std::move(region), gain, offset, set});
        return true;
      }
      if (ball.radius >= -kTol.feas_tol) {
        ++diag_.lower_dimensional;
        return true;
      }
      ++diag_.lower_dimensional;
    }
    return feasible(set);
  }

  // Whether {(U, theta) : G U <= b + F theta, G_A U = b_A + F_A theta, theta in box}
  // is nonempty. Only needed when children exist.
  bool feasible(const std::vector<int>& set) {
    if (static_cast<int>(set.size()) >= max_active_) return false;
    const Eigen::Index nd = q_.n_dec();
    const Eigen::Index nt = q_.n_theta();
    const Eigen::Index na = static_cast<Eigen::Index>(set.size());
    LpProblem lp;
    lp.objective = Vec::Zero(nd + nt);
    lp.a_ub = Mat(q_.n_c() + na, nd + nt);
    lp.b_ub = Vec(q_.n_c() + na);
    lp.a_ub.topLeftCorner(q_.n_c(), nd) = q_.g;
    lp.a_ub.topRightCorner(q_.n_c(), nt) = -q_.f;
    lp.b_ub.head(q_.n_c()) = q_.b;
    for (Eigen::Index k = 0; k < na; ++k) {
      lp.a_ub.row(q_.n_c() + k) << -q_.g.row(set[k]), q_.f.row(set[k]);
      lp.b_ub(q_.n_c() + k) = -q_.b(set[k]);
    }
    Vec lower = Vec::Constant(nd + nt, -std::numeric_limits<double>::infinity());
    Vec upper = Vec::Constant(nd + nt, std::numeric_limits<double>::infinity());
    lower.tail(nt) = q_.theta_lb;
    upper.tail(nt) = q_.theta_ub;
    lp.lower = lower;
    lp.upper = upper;
    if (lp_solve(lp).status == LpStatus::Infeasible) {
      ++diag_.pruned_infeasible;
      return false;
    }
    return true;
  }

  const MpQpData& q_;
  Mat h_inv_, hinv_gt_, hinv_ht_;
  Vec hinv_c_;
  Polytope theta_box_;
  int max_active_ = 0;
  std::vector<CriticalRegion> found_;
  EnumerationDiagnostics diag_;
};

}  // namespace

MpSolution enumerate_regions(const MpQpData& q) { return Enumerator(q).run(); }

std::optional<int> locate(const MpSolution& s, const Vec& theta, double tol) {
  if (theta.size() != s.theta_dim) throw Error(ErrorCode::DimensionMismatch, "theta length differs from solution");
  for (const auto& r : s.regions) {
    if (contains(r.region, theta, tol)) return r.id;
  }
  return std::nullopt;
}

ExplicitValue evaluate_explicit(const MpSolution& s, const Vec& theta) {
  const auto id = locate(s, theta);
  if (!id) throw Error(ErrorCode::OutsideFeasibleSet, "no critical region contains theta");
  const auto& r = s.regions[*id];
  return ExplicitValue{r.gain * theta + r.offset, *id};
}

}  // namespace facetmpc
