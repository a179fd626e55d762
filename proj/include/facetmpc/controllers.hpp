#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facetmpc/adjacency.hpp"
#include "facetmpc/mpqp.hpp"
#include "facetmpc/plants.hpp"

namespace facetmpc {

enum class ControllerKind { Cmpc, Dimpc, ImpDimpc, IfMpDimpc, Facet };

const char* to_string(ControllerKind kind);
/// Accepts cmpc, dimpc, impdimpc, ifmpdimpc, facet (case-insensitive).
ControllerKind parse_controller_kind(const std::string& name);
bool is_explicit(ControllerKind kind);
bool is_iteration_free(ControllerKind kind);

struct IterConfig {
  double epsilon = 1e-8;
  int p_max = 100;
  double w_init = 0.0;
  double w_lo = -5.0;
  double w_hi = 0.9;
  /// Per-step cap on combinations tried by the iteration-free search before
  /// it falls back; 0 means no cap.
  long max_combos = 0;

  void validate() const;
};

enum class IterMode { OnlineQp, Explicit };

struct StepMetrics {
  int iterations = 0;
  long data_transfers = 0;
  long combos_checked = 0;
  long singular_combos = 0;
  bool fallback_used = false;
  bool search_truncated = false;  ///< max_combos ran out before the search did
  bool converged = true;  ///< false when an iterative solve stopped at p_max
  std::vector<int> region_ids;
  double solve_micros = 0.0;
  // First-step seeding of the iteration-free kinds, kept apart from the
  // per-step counts above.
  int bootstrap_iterations = 0;
  long bootstrap_transfers = 0;
};

struct StepOutcome {
  Vec u_applied;  ///< stacked first moves u_i(0), global input order
  Vec u_full;     ///< [U_1; ...; U_M], U_i = [u_i(0); ...; u_i(Np-1)]
  StepMetrics metrics;
};

/// Offline artifacts of the explicit kinds: one solution per local
/// controller and, for the iteration-free kinds, one graph per controller.
struct ExplicitArtifacts {
  std::vector<MpSolution> solutions;
  std::vector<AdjacencyGraph> graphs;
};

/// Local explicit solutions for controllers 0..M-1.
std::vector<MpSolution> solve_local(const Plant& plant, const CostWeights& weights);

std::vector<AdjacencyGraph> build_graphs(const std::vector<MpSolution>& solutions, NeighborMode mode);

/// Everything `kind` needs (empty for the online kinds).
ExplicitArtifacts build_artifacts(const Plant& plant, const CostWeights& weights, ControllerKind kind);

class Controller {
 public:
  Controller(ControllerKind kind, Plant plant, CostWeights weights, IterConfig config = {},
             ExplicitArtifacts artifacts = {});

  ControllerKind kind() const { return kind_; }
  const Plant& plant() const { return plant_; }
  const IterConfig& config() const { return config_; }
  const std::vector<MpQpData>& local_problems() const { return local_; }
  const MpQpData& central_problem() const { return central_; }
  const ExplicitArtifacts& artifacts() const { return art_; }
  const std::vector<int>& last_region() const { return last_region_; }
  const Vec& last_u() const { return last_u_; }

  /// Forgets the warm start and the remembered regions.
  void reset();

  /// One control step of the configured kind.
  StepOutcome step(const Vec& x);

  StepOutcome cmpc_step(const Vec& x);
  StepOutcome dimpc_iterate(const Vec& x, IterMode mode);
  StepOutcome iteration_free_step(const Vec& x);

  /// Simultaneous solve of the affine laws of one region per controller.
  /// Returns nullopt when (I - L) is singular (sets *singular) or when the
  /// solution leaves any of the chosen regions.
  std::optional<Vec> solve_combination(std::span<const int> combo, const Vec& x, bool* singular = nullptr) const;

  /// theta_i = [x; U_j for j != i] for the stacked trajectory u_full.
  Vec local_theta(int i, const Vec& x, const Vec& u_full) const;

 private:
  Eigen::Index block_offset(int i) const { return u_offset_[i]; }
  Eigen::Index block_len(int i) const { return u_offset_[i + 1] - u_offset_[i]; }
  Vec first_moves(const Vec& u_full) const;
  void fill_local_theta(int i, const Vec& x, const Vec& u_full, Vec& theta) const;
  void check_state(const Vec& x) const;
  std::vector<int> candidates(int i) const;

  ControllerKind kind_;
  Plant plant_;
  CostWeights weights_;
  IterConfig config_;
  ExplicitArtifacts art_;
  std::vector<MpQpData> local_;
  MpQpData central_;
  std::vector<Eigen::Index> u_offset_;
  std::vector<int> last_region_;
  Vec last_u_;
};

}  // namespace facetmpc
