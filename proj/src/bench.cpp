#include "facetmpc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>

namespace facetmpc {

std::vector<std::uint64_t> BenchConfig::seed_list() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> s(20);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = i + 1;
  return s;
}

void BenchConfig::validate() const {
  if (m_values.empty()) throw Error(ErrorCode::InvalidArgument, "bench needs at least one M");
  for (int m : m_values) {
    if (m < 2) throw Error(ErrorCode::InvalidArgument, "bench M values must be >= 2");
  }
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
  if (!(x0_frac > 0.0 && x0_frac <= 1.0)) throw Error(ErrorCode::InvalidArgument, "x0_frac must lie in (0, 1]");
  if (kinds.empty()) throw Error(ErrorCode::InvalidArgument, "bench needs at least one controller");
  iter.validate();
}

BenchConfig bench_config_from_json(const Json& j) {
  BenchConfig c;
  try {
    if (j.contains("m_values")) c.m_values = j.at("m_values").get<std::vector<int>>();
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("steps")) c.steps = j.at("steps").get<int>();
    if (j.contains("x0_frac")) c.x0_frac = j.at("x0_frac").get<double>();
    if (j.contains("epsilon")) c.iter.epsilon = j.at("epsilon").get<double>();
    if (j.contains("p_max")) c.iter.p_max = j.at("p_max").get<int>();
    if (j.contains("w_init")) c.iter.w_init = j.at("w_init").get<double>();
    if (j.contains("w_lo")) c.iter.w_lo = j.at("w_lo").get<double>();
    if (j.contains("w_hi")) c.iter.w_hi = j.at("w_hi").get<double>();
    if (j.contains("max_combos")) c.iter.max_combos = j.at("max_combos").get<long>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    if (j.contains("kinds")) {
      c.kinds.clear();
      for (const auto& k : j.at("kinds")) c.kinds.push_back(parse_controller_kind(k.get<std::string>()));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed bench config: ") + e.what());
  }
  c.validate();
  return c;
}

Json bench_config_to_json(const BenchConfig& c) {
  Json kinds = Json::array();
  for (auto k : c.kinds) kinds.push_back(to_string(k));
  return {{"m_values", c.m_values},     {"seeds", c.seed_list()},    {"steps", c.steps},
          {"x0_frac", c.x0_frac},       {"epsilon", c.iter.epsilon}, {"p_max", c.iter.p_max},
          {"w_init", c.iter.w_init},    {"w_lo", c.iter.w_lo},       {"w_hi", c.iter.w_hi},
          {"max_combos", c.iter.max_combos}, {"kinds", std::move(kinds)}, {"threads", c.threads}};
}

namespace {

struct PlantJob {
  int m;
  std::uint64_t seed;
};

struct PlantOutput {
  PlantRecord record;
  std::vector<SummaryRow> rows;
};

PlantOutput run_plant(const BenchConfig& config, const PlantJob& job) {
  PlantOutput out;
  PlantRecord& rec = out.record;
  rec.m = job.m;
  rec.seed = job.seed;
  Plant plant;
  CostWeights weights;
  ExplicitArtifacts hyper, facet;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    plant = generate_plant(job.m, job.seed);
    weights = CostWeights::identity(plant);
    rec.plant_hash = plant_hash(plant);
    rec.x0 = feasible_initial_state(plant, weights, job.seed, config.x0_frac);
    const auto wants = [&](ControllerKind k) {
      return std::find(config.kinds.begin(), config.kinds.end(), k) != config.kinds.end();
    };
    if (std::any_of(config.kinds.begin(), config.kinds.end(), is_explicit)) {
      hyper.solutions = solve_local(plant, weights);
      for (const auto& s : hyper.solutions) rec.regions.push_back(s.num_regions());
      if (wants(ControllerKind::IfMpDimpc)) {
        hyper.graphs = build_graphs(hyper.solutions, NeighborMode::Hyperplane);
        for (const auto& g : hyper.graphs) rec.hyperplane_edges += static_cast<long>(g.num_edges());
      }
      facet.solutions = hyper.solutions;
      if (wants(ControllerKind::Facet)) {
        facet.graphs = build_graphs(facet.solutions, NeighborMode::Facet);
        for (const auto& g : facet.graphs) rec.facet_edges += static_cast<long>(g.num_edges());
      }
    }
    rec.offline_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  } catch (const Error& e) {
    rec.status = to_string(e.code());
    return out;
  }

  std::optional<Trace> reference;
  std::vector<std::pair<ControllerKind, Trace>> traces;
  for (ControllerKind kind : config.kinds) {
    const ExplicitArtifacts& art = kind == ControllerKind::IfMpDimpc ? hyper : facet;
    Controller c(kind, plant, weights, config.iter, is_explicit(kind) ? art : ExplicitArtifacts{});
    Trace t = run_closed_loop(c, rec.x0, config.steps);
    if (kind == ControllerKind::Cmpc) reference = t;
    traces.emplace_back(kind, std::move(t));
  }
  for (const auto& [kind, t] : traces) {
    // Deviation only makes sense between complete traces.
    const bool comparable = reference && reference->ok() && t.ok();
    out.rows.push_back(SummaryRow{job.m, job.seed, rec.plant_hash, kind, t.status, t.steps,
                                  summarize(t, comparable ? &*reference : nullptr)});
  }
  return out;
}

Json record_to_json(const PlantRecord& r) {
  return {{"m", r.m},
          {"seed", r.seed},
          {"plant_hash", r.plant_hash},
          {"status", r.status},
          {"x0", r.x0.size() ? vec_to_json(r.x0) : Json::array()},
          {"regions", r.regions},
          {"hyperplane_edges", r.hyperplane_edges},
          {"facet_edges", r.facet_edges},
          {"offline_seconds", r.offline_seconds}};
}

}  // namespace

BenchResult run_bench(const BenchConfig& config) {
  config.validate();
  std::vector<PlantJob> jobs;
  for (int m : config.m_values) {
    for (auto seed : config.seed_list()) jobs.push_back({m, seed});
  }
  std::vector<PlantOutput> outputs(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) outputs[i] = run_plant(config, jobs[i]);
  };
  unsigned n_threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  BenchResult result;
  Json plants = Json::array();
  for (auto& o : outputs) {
    plants.push_back(record_to_json(o.record));
    result.plants.push_back(std::move(o.record));
    for (auto& r : o.rows) result.rows.push_back(std::move(r));
  }
  result.manifest = {{"config", bench_config_to_json(config)},
                     {"x0_policy",
                      "uniform in [x0_frac*x_lb, x0_frac*x_ub] from the plant seed, redrawn until the centralized QP and "
                      "every local QP with zero peer trajectories are feasible"},
                     {"weights", "Q_i = I, R_i = I, rho_i = 1, terminal box = state box"},
                     {"plants", std::move(plants)},
                     {"rows", result.rows.size()}};
  return result;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << kSummaryCsvHeader << '\n';
  for (const auto& r : rows) os << summary_csv_row(r) << '\n';
  return os.str();
}

}  // namespace facetmpc
