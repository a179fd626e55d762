#include "facetmpc/controllers.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>

namespace facetmpc {

const char* to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Cmpc: return "cmpc";
    case ControllerKind::Dimpc: return "dimpc";
    case ControllerKind::ImpDimpc: return "impdimpc";
    case ControllerKind::IfMpDimpc: return "ifmpdimpc";
    case ControllerKind::Facet: return "facet";
  }
  return "?";
}

ControllerKind parse_controller_kind(const std::string& name) {
  std::string s;
  for (char c : name) {
    if (c != '-' && c != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (auto k : {ControllerKind::Cmpc, ControllerKind::Dimpc, ControllerKind::ImpDimpc, ControllerKind::IfMpDimpc,
                 ControllerKind::Facet}) {
    if (s == to_string(k)) return k;
  }
  if (s == "facetdimpc") return ControllerKind::Facet;
  throw Error(ErrorCode::InvalidArgument, "unknown controller kind '" + name + "'");
}

bool is_explicit(ControllerKind kind) {
  return kind == ControllerKind::ImpDimpc || kind == ControllerKind::IfMpDimpc || kind == ControllerKind::Facet;
}

bool is_iteration_free(ControllerKind kind) {
  return kind == ControllerKind::IfMpDimpc || kind == ControllerKind::Facet;
}

void IterConfig::validate() const {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (p_max < 1) throw Error(ErrorCode::InvalidArgument, "p_max must be >= 1");
  if (!(w_lo < w_hi)) throw Error(ErrorCode::InvalidArgument, "weight clamp needs lo < hi");
  if (max_combos < 0) throw Error(ErrorCode::InvalidArgument, "max_combos must be >= 0");
}

std::vector<MpSolution> solve_local(const Plant& plant, const CostWeights& weights) {
  const std::string hash = plant_hash(plant);
  std::vector<MpSolution> out;
  for (int i = 0; i < plant.num_subsystems(); ++i) {
    MpSolution s = enumerate_regions(build_condensed(MpcProblem{plant, weights, i, std::nullopt}));
    s.plant_hash = hash;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<AdjacencyGraph> build_graphs(const std::vector<MpSolution>& solutions, NeighborMode mode) {
  std::vector<AdjacencyGraph> out;
  out.reserve(solutions.size());
  for (const auto& s : solutions) out.push_back(build_graph(s, mode));
  return out;
}

ExplicitArtifacts build_artifacts(const Plant& plant, const CostWeights& weights, ControllerKind kind) {
  ExplicitArtifacts a;
  if (!is_explicit(kind)) return a;
  a.solutions = solve_local(plant, weights);
  if (is_iteration_free(kind)) {
    a.graphs = build_graphs(a.solutions, kind == ControllerKind::Facet ? NeighborMode::Facet : NeighborMode::Hyperplane);
  }
  return a;
}

Controller::Controller(ControllerKind kind, Plant plant, CostWeights weights, IterConfig config,
                       ExplicitArtifacts artifacts)
    : kind_(kind), plant_(std::move(plant)), weights_(std::move(weights)), config_(config), art_(std::move(artifacts)) {
  config_.validate();
  validate_plant(plant_);
  const int m = plant_.num_subsystems();
  for (int i = 0; i < m; ++i) local_.push_back(build_condensed(MpcProblem{plant_, weights_, i, std::nullopt}));
  central_ = build_condensed(MpcProblem{plant_, weights_, std::nullopt, std::nullopt});
  u_offset_.assign(1, 0);
  for (int i = 0; i < m; ++i) u_offset_.push_back(u_offset_.back() + plant_.subsystems[i].nu() * plant_.horizon);

  if (is_explicit(kind_)) {
    if (static_cast<int>(art_.solutions.size()) != m) {
      throw Error(ErrorCode::InvalidArgument, "explicit controllers need one solution per subsystem");
    }
    const std::string hash = plant_hash(plant_);
    for (int i = 0; i < m; ++i) {
      const auto& s = art_.solutions[i];
      if (s.controller != std::optional<int>(i)) throw Error(ErrorCode::InvalidArgument, "solution order must follow controller ids");
      if (!s.plant_hash.empty() && s.plant_hash != hash) throw Error(ErrorCode::InvalidArgument, "solution belongs to another plant");
      if (s.theta_dim != local_[i].n_theta() || s.dec_dim != local_[i].n_dec()) {
        throw Error(ErrorCode::DimensionMismatch, "solution dimensions differ from the local problem");
      }
      if (s.regions.empty()) throw Error(ErrorCode::EmptyInput, "solution has no regions");
    }
  }
  if (is_iteration_free(kind_)) {
    if (static_cast<int>(art_.graphs.size()) != m) throw Error(ErrorCode::InvalidArgument, "need one graph per subsystem");
    for (int i = 0; i < m; ++i) {
      if (art_.graphs[i].controller && *art_.graphs[i].controller != i) {
        throw Error(ErrorCode::InvalidArgument, "graph order must follow controller ids");
      }
    }
  }
  reset();
}

void Controller::reset() {
  last_region_.clear();
  last_u_ = Vec::Zero(u_offset_.back());
}

void Controller::check_state(const Vec& x) const {
  if (x.size() != plant_.nx()) throw Error(ErrorCode::DimensionMismatch, "state length");
  require_finite(x, "state");
}

Vec Controller::first_moves(const Vec& u_full) const {
  Vec u(plant_.nu());
  for (int i = 0; i < plant_.num_subsystems(); ++i) {
    const Eigen::Index nu = plant_.subsystems[i].nu();
    u.segment(plant_.input_offset(i), nu) = u_full.segment(block_offset(i), nu);
  }
  return u;
}

Vec Controller::local_theta(int i, const Vec& x, const Vec& u_full) const {
  Vec theta;
  fill_local_theta(i, x, u_full, theta);
  return theta;
}

void Controller::fill_local_theta(int i, const Vec& x, const Vec& u_full, Vec& theta) const {
  const MpQpData& q = local_[i];
  theta.resize(q.n_theta());
  theta.head(plant_.nx()) = x;
  for (std::size_t k = 0; k < q.layout.others.size(); ++k) {
    const int j = q.layout.others[k];
    theta.segment(q.layout.offset_of(j), block_len(j)) = u_full.segment(block_offset(j), block_len(j));
  }
}

StepOutcome Controller::step(const Vec& x) {
  switch (kind_) {
    case ControllerKind::Cmpc: return cmpc_step(x);
    case ControllerKind::Dimpc: return dimpc_iterate(x, IterMode::OnlineQp);
    case ControllerKind::ImpDimpc: return dimpc_iterate(x, IterMode::Explicit);
    case ControllerKind::IfMpDimpc:
    case ControllerKind::Facet: return iteration_free_step(x);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown controller kind");
}

namespace {

using Clock = std::chrono::steady_clock;

double micros_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

StepOutcome Controller::cmpc_step(const Vec& x) {
  check_state(x);
  const auto t0 = Clock::now();
  QpResult r;
  try {
    r = solve_online(central_, x);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Infeasible) throw Error(ErrorCode::InfeasibleOcp, "centralized problem infeasible at x");
    throw;
  }
  StepOutcome out;
  out.u_full = r.u;
  out.u_applied = first_moves(r.u);
  out.metrics.iterations = 1;
  out.metrics.data_transfers = 0;
  out.metrics.solve_micros = micros_since(t0);
  last_u_ = r.u;
  return out;
}

StepOutcome Controller::dimpc_iterate(const Vec& x, IterMode mode) {
  check_state(x);
  if (mode == IterMode::Explicit && !is_explicit(kind_)) {
    throw Error(ErrorCode::InvalidArgument, "explicit iteration needs local solutions");
  }
  const auto t0 = Clock::now();
  const int m = plant_.num_subsystems();
  StepOutcome out;
  out.metrics.region_ids.assign(mode == IterMode::Explicit ? m : 0, -1);

  Vec u = last_u_;                 // U^(p-1)
  Vec u_prev;                      // U^(p-2)
  Vec raw_prev;                    // optimizer output of the previous pass
  Vec raw(u.size());
  int p = 0;
  bool converged = false;
  while (p < config_.p_max) {
    ++p;
    for (int i = 0; i < m; ++i) {
      const Vec theta = local_theta(i, x, u);
      if (mode == IterMode::OnlineQp) {
        try {
          raw.segment(block_offset(i), block_len(i)) = solve_online(local_[i], theta).u;
        } catch (const Error& e) {
          if (e.code() == ErrorCode::Infeasible) {
            throw Error(ErrorCode::InfeasibleLocalOcp, "local problem " + std::to_string(i) + " infeasible");
          }
          throw;
        }
      } else {
        const auto id = locate(art_.solutions[i], theta);
        if (!id) throw Error(ErrorCode::InfeasibleLocalOcp, "no region of controller " + std::to_string(i) + " holds theta");
        const auto& reg = art_.solutions[i].regions[*id];
        raw.segment(block_offset(i), block_len(i)) = reg.gain * theta + reg.offset;
        out.metrics.region_ids[i] = *id;
      }
    }

    Vec next(u.size());
    for (int i = 0; i < m; ++i) {
      const Eigen::Index off = block_offset(i);
      const Eigen::Index len = block_len(i);
      double w = config_.w_init;
      if (p >= 3) {
        std::vector<double> slopes(len);
        for (Eigen::Index k = 0; k < len; ++k) {
          const double den = u(off + k) - u_prev(off + k);
          slopes[k] = std::abs(den) > 1e-14 ? (raw(off + k) - raw_prev(off + k)) / den : 0.0;
        }
        const double s = median(std::move(slopes));
        w = s == 1.0 ? config_.w_lo : std::clamp(s / (s - 1.0), config_.w_lo, config_.w_hi);
      }
      next.segment(off, len) = w * u.segment(off, len) + (1.0 - w) * raw.segment(off, len);
      // Extrapolated weights can leave the input box; pull back inside.
      const auto& sub = plant_.subsystems[i];
      for (int l = 0; l < plant_.horizon; ++l) {
        auto seg = next.segment(off + l * sub.nu(), sub.nu());
        seg = seg.cwiseMax(sub.u_lb).cwiseMin(sub.u_ub);
      }
    }

    const double delta = (next - u).lpNorm<Eigen::Infinity>();
    u_prev = u;
    raw_prev = raw;
    u = next;
    if (delta <= config_.epsilon) {
      converged = true;
      break;
    }
  }

  out.u_full = u;
  out.u_applied = first_moves(u);
  out.metrics.iterations = p;
  out.metrics.data_transfers = static_cast<long>(p) * m;
  out.metrics.converged = converged;
  out.metrics.solve_micros = micros_since(t0);
  last_u_ = u;
  return out;
}

std::optional<Vec> Controller::solve_combination(std::span<const int> combo, const Vec& x, bool* singular) const {
  const int m = plant_.num_subsystems();
  if (!is_explicit(kind_)) throw Error(ErrorCode::InvalidArgument, "combination solve needs local solutions");
  if (static_cast<int>(combo.size()) != m) throw Error(ErrorCode::DimensionMismatch, "one region id per controller");
  check_state(x);
  if (singular) *singular = false;

  // The iteration-free search calls this millions of times per run; keep
  // the buffers and the factorization storage alive between calls.
  struct Scratch {
    Mat sys;
    Vec rhs, u, theta;
    Eigen::FullPivLU<Mat> lu;
  };
  thread_local Scratch sc;

  const Eigen::Index n = u_offset_.back();
  const Eigen::Index nx = plant_.nx();
  sc.sys.setIdentity(n, n);
  sc.rhs.resize(n);
  for (int i = 0; i < m; ++i) {
    const auto& sol = art_.solutions[i];
    if (combo[i] < 0 || combo[i] >= sol.num_regions()) throw Error(ErrorCode::InvalidArgument, "region id out of range");
    const CriticalRegion& r = sol.regions[combo[i]];
    const Eigen::Index off = block_offset(i);
    const Eigen::Index len = block_len(i);
    sc.rhs.segment(off, len).noalias() = r.gain.leftCols(nx) * x;
    sc.rhs.segment(off, len) += r.offset;
    for (int j : sol.layout.others) {
      sc.sys.block(off, block_offset(j), len, block_len(j)) = -r.gain.middleCols(sol.layout.offset_of(j), block_len(j));
    }
  }

  sc.lu.compute(sc.sys);
  if (sc.lu.matrixLU().diagonal().cwiseAbs().minCoeff() < kTol.combo_pivot_tol) {
    if (singular) *singular = true;
    return std::nullopt;
  }
  sc.u = sc.lu.solve(sc.rhs);
  for (int i = 0; i < m; ++i) {
    const Polytope& region = art_.solutions[i].regions[combo[i]].region;
    fill_local_theta(i, x, sc.u, sc.theta);
    if (!contains(region, sc.theta, kTol.combo_tol)) return std::nullopt;
  }
  return sc.u;
}

std::vector<int> Controller::candidates(int i) const {
  const auto* list = art_.graphs[i].find(last_region_[i]);
  if (!list) return {};
  std::vector<int> c(list->begin(), list->end());
  c.push_back(last_region_[i]);
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

StepOutcome Controller::iteration_free_step(const Vec& x) {
  if (!is_iteration_free(kind_)) throw Error(ErrorCode::InvalidArgument, "controller has no adjacency graphs");
  check_state(x);
  const auto t0 = Clock::now();
  const int m = plant_.num_subsystems();

  int boot_iterations = 0;
  long boot_transfers = 0;
  std::optional<StepOutcome> boot;
  if (last_region_.empty()) {
    boot = dimpc_iterate(x, IterMode::Explicit);
    boot_iterations = boot->metrics.iterations;
    boot_transfers = boot->metrics.data_transfers;
    last_region_.resize(m);
    for (int i = 0; i < m; ++i) {
      const auto id = locate(art_.solutions[i], local_theta(i, x, boot->u_full));
      last_region_[i] = id ? *id : boot->metrics.region_ids[i];
    }
  }

  std::vector<std::vector<int>> cand(m);
  bool any_empty = false;
  for (int i = 0; i < m; ++i) {
    cand[i] = candidates(i);
    any_empty = any_empty || cand[i].empty();
  }

  StepOutcome out;
  long checked = 0;
  long singular = 0;
  std::optional<Vec> found;
  std::vector<int> combo = last_region_;
  auto attempt = [&](const std::vector<int>& c) {
    ++checked;
    bool sing = false;
    found = solve_combination(c, x, &sing);
    if (sing) ++singular;
    if (found) combo = c;
    return found.has_value();
  };

  const auto out_of_budget = [&] { return config_.max_combos > 0 && checked >= config_.max_combos; };
  if (!any_empty && !attempt(last_region_)) {
    // Lexicographic walk, controller 0 most significant.
    std::vector<std::size_t> idx(m, 0);
    bool done = false;
    while (!done) {
      std::vector<int> c(m);
      for (int i = 0; i < m; ++i) c[i] = cand[i][idx[i]];
      if (c != last_region_) {
        if (out_of_budget()) {
          out.metrics.search_truncated = true;
          break;
        }
        if (attempt(c)) break;
      }
      int pos = m - 1;
      while (pos >= 0 && ++idx[pos] == cand[pos].size()) idx[pos--] = 0;
      done = pos < 0;
    }
  }

  if (found) {
    out.u_full = *found;
    out.metrics.iterations = 0;
    out.metrics.data_transfers = 1;
    last_region_ = combo;
    last_u_ = *found;
  } else {
    // Exhausted: revert to explicit iteration (the bootstrap already did it
    // this step).
    StepOutcome fb = boot ? *boot : dimpc_iterate(x, IterMode::Explicit);
    out.u_full = fb.u_full;
    out.metrics.fallback_used = true;
    out.metrics.converged = fb.metrics.converged;
    if (!boot) {
      out.metrics.iterations = fb.metrics.iterations;
      out.metrics.data_transfers = fb.metrics.data_transfers;
    }
    for (int i = 0; i < m; ++i) {
      if (const auto id = locate(art_.solutions[i], local_theta(i, x, fb.u_full))) last_region_[i] = *id;
    }
    last_u_ = fb.u_full;
  }
  out.u_applied = first_moves(out.u_full);
  out.metrics.combos_checked = checked;
  out.metrics.singular_combos = singular;
  out.metrics.region_ids = last_region_;
  out.metrics.bootstrap_iterations = boot_iterations;
  out.metrics.bootstrap_transfers = boot_transfers;
  out.metrics.solve_micros = micros_since(t0);
  return out;
}

}  // namespace facetmpc
