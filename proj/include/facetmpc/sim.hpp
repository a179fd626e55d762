#pragma once

#include <optional>
#include <string>
#include <vector>

#include "facetmpc/controllers.hpp"

namespace facetmpc {

struct Trace {
  std::string plant_hash;
  ControllerKind kind = ControllerKind::Cmpc;
  Vec x0;
  int steps = 0;             ///< requested steps
  std::vector<Vec> x;        ///< x(0..n), n = completed steps
  std::vector<Vec> u;        ///< u(0..n-1)
  std::vector<StepMetrics> metrics;
  std::string status = "ok"; ///< error code name when the run stopped early

  int completed() const { return static_cast<int>(u.size()); }
  bool ok() const { return status == "ok"; }
};

struct RunSummary {
  int max_iterations = 0;
  double avg_iterations = 0.0;
  long total_transfers = 0;
  long total_combos = 0;
  int fallback_count = 0;
  int settling_steps = 0;
  double max_dev_vs_reference = 0.0;  ///< NaN without a reference
  int nonconverged_steps = 0;
  int truncated_searches = 0;
  int bootstrap_iterations = 0;
  long bootstrap_transfers = 0;
  long singular_combos = 0;
  double median_step_micros = 0.0;
};

/// Steps the controller and the plant in turn. Controller errors end the
/// run; the trace keeps what was computed and records the error in `status`.
Trace run_closed_loop(Controller& controller, const Vec& x0, int steps);

Trace run_closed_loop(const Plant& plant, ControllerKind kind, const Vec& x0, int steps,
                      const CostWeights& weights, const IterConfig& config = {}, ExplicitArtifacts artifacts = {});

/// y_i(k) = sum of the components of x_i(k), one row per stored state.
std::vector<Vec> subsystem_outputs(const Plant& plant, const Trace& t);

/// First k from which every state stays within 2e-4 of its largest
/// magnitude over the trace; steps + 1 when that never happens.
int settling_steps(const Trace& t);

RunSummary summarize(const Trace& t, const Trace* reference = nullptr);

/// Uniform draw in [frac*x_lb, frac*x_ub] repeated until the centralized
/// problem and every local problem (peers at zero) are feasible. Throws
/// GenerationExhausted after `max_attempts`.
Vec feasible_initial_state(const Plant& plant, const CostWeights& weights, std::uint64_t seed, double frac = 0.4,
                           int max_attempts = 1000);

/// step,x_0..,u_0..,iterations,transfers,combos,fallback,micros
std::string trace_csv(const Trace& t);

extern const char* const kSummaryCsvHeader;

struct SummaryRow {
  int m = 0;
  std::uint64_t seed = 0;
  std::string plant_hash;
  ControllerKind kind = ControllerKind::Cmpc;
  std::string status;
  int steps = 0;
  RunSummary summary;
};

std::string summary_csv_row(const SummaryRow& row);

}  // namespace facetmpc
