#pragma once

#include <cstdint>
#include <vector>

#include "facetmpc/io.hpp"
#include "facetmpc/sim.hpp"

namespace facetmpc {

struct BenchConfig {
  std::vector<int> m_values{2, 3};
  std::vector<std::uint64_t> seeds;  ///< empty means 1..20
  int steps = 100;
  double x0_frac = 0.4;
  IterConfig iter;
  std::vector<ControllerKind> kinds{ControllerKind::Cmpc, ControllerKind::Dimpc, ControllerKind::ImpDimpc,
                                    ControllerKind::IfMpDimpc, ControllerKind::Facet};
  unsigned threads = 0;  ///< 0: hardware concurrency

  std::vector<std::uint64_t> seed_list() const;
  void validate() const;
};

/// {m_values, seeds, steps, x0_frac, epsilon, p_max, w_init, w_lo, w_hi, max_combos, kinds, threads};
/// all optional.
BenchConfig bench_config_from_json(const Json& j);
Json bench_config_to_json(const BenchConfig& c);

struct PlantRecord {
  int m = 0;
  std::uint64_t seed = 0;
  std::string plant_hash;
  std::string status = "ok";  ///< why the plant was skipped, if it was
  Vec x0;
  std::vector<int> regions;  ///< per local controller
  long hyperplane_edges = 0;
  long facet_edges = 0;
  double offline_seconds = 0.0;
};

struct BenchResult {
  std::vector<PlantRecord> plants;  ///< (m, seed) order
  std::vector<SummaryRow> rows;     ///< (m, seed, kind) order; deviation measured against CMPC
  Json manifest;
};

/// Every configured kind on every generated plant from the same initial
/// state. Plants run in parallel; results come back in (m, seed) order.
BenchResult run_bench(const BenchConfig& config);

std::string summary_csv(const std::vector<SummaryRow>& rows);

}  // namespace facetmpc
