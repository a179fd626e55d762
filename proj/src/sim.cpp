#include "facetmpc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace facetmpc {

Trace run_closed_loop(Controller& controller, const Vec& x0, int steps) {
  const Plant& plant = controller.plant();
  if (steps < 0) throw Error(ErrorCode::InvalidArgument, "steps must be >= 0");
  if (x0.size() != plant.nx()) throw Error(ErrorCode::DimensionMismatch, "x0 length");
  if ((x0.array() < plant.x_lb().array()).any() || (x0.array() > plant.x_ub().array()).any()) {
    throw Error(ErrorCode::InvalidArgument, "x0 outside the state box");
  }
  Trace t;
  t.plant_hash = plant_hash(plant);
  t.kind = controller.kind();
  t.x0 = x0;
  t.steps = steps;
  t.x.push_back(x0);
  controller.reset();
  for (int k = 0; k < steps; ++k) {
    StepOutcome out;
    try {
      out = controller.step(t.x.back());
    } catch (const Error& e) {
      t.status = to_string(e.code());
      break;
    }
    t.u.push_back(out.u_applied);
    t.metrics.push_back(std::move(out.metrics));
    t.x.push_back(step(plant, t.x.back(), t.u.back()));
  }
  return t;
}

Trace run_closed_loop(const Plant& plant, ControllerKind kind, const Vec& x0, int steps, const CostWeights& weights,
                      const IterConfig& config, ExplicitArtifacts artifacts) {
  if (is_explicit(kind) && artifacts.solutions.empty()) artifacts = build_artifacts(plant, weights, kind);
  Controller c(kind, plant, weights, config, std::move(artifacts));
  return run_closed_loop(c, x0, steps);
}

std::vector<Vec> subsystem_outputs(const Plant& plant, const Trace& t) {
  std::vector<Vec> y;
  y.reserve(t.x.size());
  for (const Vec& x : t.x) {
    if (x.size() != plant.nx()) throw Error(ErrorCode::DimensionMismatch, "trace state length differs from plant");
    Vec yk(plant.num_subsystems());
    for (int i = 0; i < plant.num_subsystems(); ++i) {
      yk(i) = x.segment(plant.state_offset(i), plant.subsystems[i].nx()).sum();
    }
    y.push_back(std::move(yk));
  }
  return y;
}

int settling_steps(const Trace& t) {
  const int sentinel = t.steps + 1;
  if (t.x.empty()) return sentinel;
  Vec scale = Vec::Zero(t.x.front().size());
  for (const Vec& x : t.x) scale = scale.cwiseMax(x.cwiseAbs());
  const Vec threshold = 2e-4 * scale;
  // Walk back from the end while every state stays inside its band.
  int k = static_cast<int>(t.x.size());
  while (k > 0 && (t.x[k - 1].cwiseAbs().array() <= threshold.array()).all()) --k;
  if (k == static_cast<int>(t.x.size())) return sentinel;
  return k;
}

RunSummary summarize(const Trace& t, const Trace* reference) {
  RunSummary s;
  long iter_sum = 0;
  std::vector<double> micros;
  for (const auto& m : t.metrics) {
    s.max_iterations = std::max(s.max_iterations, m.iterations);
    iter_sum += m.iterations;
    s.total_transfers += m.data_transfers;
    s.total_combos += m.combos_checked;
    s.fallback_count += m.fallback_used ? 1 : 0;
    s.nonconverged_steps += m.converged ? 0 : 1;
    s.truncated_searches += m.search_truncated ? 1 : 0;
    s.bootstrap_iterations += m.bootstrap_iterations;
    s.bootstrap_transfers += m.bootstrap_transfers;
    s.singular_combos += m.singular_combos;
    micros.push_back(m.solve_micros);
  }
  if (!t.metrics.empty()) s.avg_iterations = static_cast<double>(iter_sum) / static_cast<double>(t.metrics.size());
  if (!micros.empty()) {
    std::nth_element(micros.begin(), micros.begin() + micros.size() / 2, micros.end());
    s.median_step_micros = micros[micros.size() / 2];
  }
  s.settling_steps = settling_steps(t);
  s.max_dev_vs_reference = std::numeric_limits<double>::quiet_NaN();
  if (reference) {
    if (reference->plant_hash != t.plant_hash || reference->steps != t.steps) {
      throw Error(ErrorCode::InvalidArgument, "reference trace is for another plant or horizon");
    }
    if (reference->x.size() != t.x.size()) throw Error(ErrorCode::DimensionMismatch, "traces have different lengths");
    double dev = 0.0;
    for (std::size_t k = 0; k < t.x.size(); ++k) dev = std::max(dev, (t.x[k] - reference->x[k]).lpNorm<Eigen::Infinity>());
    s.max_dev_vs_reference = dev;
  }
  return s;
}

Vec feasible_initial_state(const Plant& plant, const CostWeights& weights, std::uint64_t seed, double frac,
                           int max_attempts) {
  if (!(frac > 0.0 && frac <= 1.0)) throw Error(ErrorCode::InvalidArgument, "frac must lie in (0, 1]");
  std::vector<MpQpData> problems{build_condensed(MpcProblem{plant, weights, std::nullopt, std::nullopt})};
  for (int i = 0; i < plant.num_subsystems(); ++i) {
    problems.push_back(build_condensed(MpcProblem{plant, weights, i, std::nullopt}));
  }
  const Vec lb = frac * plant.x_lb();
  const Vec ub = frac * plant.x_ub();
  UniformStream rng(seed);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Vec x(plant.nx());
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = rng.uniform(lb(k), ub(k));
    // Local problems are checked with zero peer trajectories, the warm start
    // of the first step.
    bool feasible = true;
    for (const auto& q : problems) {
      Vec theta = Vec::Zero(q.n_theta());
      theta.head(x.size()) = x;
      try {
        solve_online(q, theta);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Infeasible) throw;
        feasible = false;
        break;
      }
    }
    if (feasible) return x;
  }
  throw Error(ErrorCode::GenerationExhausted, "no feasible initial state within the attempt budget");
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string trace_csv(const Trace& t) {
  std::ostringstream os;
  const Eigen::Index nx = t.x0.size();
  const Eigen::Index nu = t.u.empty() ? 0 : t.u.front().size();
  os << "step";
  for (Eigen::Index k = 0; k < nx; ++k) os << ",x_" << k;
  for (Eigen::Index k = 0; k < nu; ++k) os << ",u_" << k;
  os << ",iterations,transfers,combos,fallback,micros\n";
  for (int k = 0; k < t.completed(); ++k) {
    os << k;
    for (Eigen::Index j = 0; j < nx; ++j) os << ',' << fmt(t.x[k](j));
    for (Eigen::Index j = 0; j < nu; ++j) os << ',' << fmt(t.u[k](j));
    const auto& m = t.metrics[k];
    os << ',' << m.iterations << ',' << m.data_transfers << ',' << m.combos_checked << ',' << (m.fallback_used ? 1 : 0)
       << ',' << fmt(m.solve_micros) << '\n';
  }
  return os.str();
}

const char* const kSummaryCsvHeader =
    "m,seed,plant_hash,controller,status,steps,max_iterations,avg_iterations,total_transfers,total_combos,"
    "fallback_count,settling_steps,max_dev_vs_cmpc,nonconverged_steps,bootstrap_transfers,singular_combos,"
    "median_step_micros";

std::string summary_csv_row(const SummaryRow& row) {
  const RunSummary& s = row.summary;
  std::ostringstream os;
  os << row.m << ',' << row.seed << ',' << row.plant_hash << ',' << to_string(row.kind) << ',' << row.status << ','
     << row.steps << ',' << s.max_iterations << ',' << fmt(s.avg_iterations) << ',' << s.total_transfers << ','
     << s.total_combos << ',' << s.fallback_count << ',' << s.settling_steps << ','
     << (std::isnan(s.max_dev_vs_reference) ? std::string() : fmt(s.max_dev_vs_reference)) << ','
     << s.nonconverged_steps << ',' << s.bootstrap_transfers << ',' << s.singular_combos << ','
     << fmt(s.median_step_micros);
  return os.str();
}

}  // namespace facetmpc
