#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "facetmpc/bench.hpp"
#include "facetmpc/io.hpp"
#include "facetmpc/sim.hpp"

#ifndef FACETMPC_VERSION
#define FACETMPC_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace facetmpc;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

const char* const kFooter = R"(Outputs
  generate   <out>/plant_m<M>_s<seed>.json
  solve      <out>/solution_<i>.json per local controller, <out>/solution_central.json
  adjacency  <solution>.<mode>.graph.json unless --out is given
  simulate   trace CSV: step,x_0..x_{n-1},u_0..u_{m-1},iterations,transfers,combos,fallback,micros
             (one row per completed step; x is the state the input was computed from)
  bench      <out>/summary.csv and <out>/manifest.json; summary columns:
             m,seed,plant_hash,controller,status,steps,max_iterations,avg_iterations,
             total_transfers,total_combos,fallback_count,settling_steps,max_dev_vs_cmpc,
             nonconverged_steps,bootstrap_transfers,singular_combos,median_step_micros

Controllers: cmpc, dimpc, impdimpc, ifmpdimpc, facet (or "all" for bench).
Exit codes: 0 success, 2 validation error, 3 numerical failure.)";

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

fs::path plant_path(const fs::path& dir, int m, std::uint64_t seed) {
  return dir / ("plant_m" + std::to_string(m) + "_s" + std::to_string(seed) + ".json");
}

fs::path solution_path(const fs::path& dir, int i) { return dir / ("solution_" + std::to_string(i) + ".json"); }

fs::path graph_path(const fs::path& solution, NeighborMode mode) {
  fs::path p = solution;
  p.replace_extension(std::string(".") + to_string(mode) + ".graph.json");
  return p;
}

NeighborMode parse_mode(const std::string& s) {
  if (s == "facet") return NeighborMode::Facet;
  if (s == "hyperplane") return NeighborMode::Hyperplane;
  throw Error(ErrorCode::InvalidArgument, "mode must be facet or hyperplane");
}

int cmd_generate(int m, int count, std::uint64_t seed, const fs::path& out) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
  fs::create_directories(out);
  for (int k = 0; k < count; ++k) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(k);
    const fs::path path = plant_path(out, m, s);
    write_json_file(path, plant_to_json(generate_plant(m, s)));
    std::cout << path.string() << '\n';
  }
  return 0;
}

int cmd_solve(const fs::path& plant_file, const fs::path& out, bool skip_central) {
  const Plant plant = plant_from_json(read_json_file(plant_file));
  const CostWeights w = CostWeights::identity(plant);
  fs::create_directories(out);
  const auto solutions = solve_local(plant, w);
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    const fs::path path = solution_path(out, static_cast<int>(i));
    write_json_file(path, solution_to_json(solutions[i]));
    std::cout << "controller " << i << ": " << solutions[i].num_regions() << " regions -> " << path.string() << '\n';
  }
  if (!skip_central) {
    MpSolution central = enumerate_regions(build_condensed(MpcProblem{plant, w, std::nullopt, std::nullopt}));
    central.plant_hash = plant_hash(plant);
    const fs::path path = out / "solution_central.json";
    write_json_file(path, solution_to_json(central));
    std::cout << "central: " << central.num_regions() << " regions -> " << path.string() << '\n';
  }
  return 0;
}

int cmd_adjacency(const fs::path& solution_file, const std::string& mode_name, fs::path out) {
  const NeighborMode mode = parse_mode(mode_name);
  const MpSolution s = solution_from_json(read_json_file(solution_file));
  const AdjacencyGraph g = build_graph(s, mode);
  if (out.empty()) out = graph_path(solution_file, mode);
  write_json_file(out, graph_to_json(g));
  std::cout << s.num_regions() << " regions, " << g.num_edges() << " " << mode_name << " edges -> " << out.string()
            << '\n';
  return 0;
}

// Loads solution_<i>.json (and the matching graphs) from `dir` when given,
// otherwise solves offline in-process.
ExplicitArtifacts load_artifacts(const Plant& plant, const CostWeights& w, ControllerKind kind, const fs::path& dir) {
  if (!is_explicit(kind)) return {};
  if (dir.empty()) return build_artifacts(plant, w, kind);
  ExplicitArtifacts art;
  const NeighborMode mode = kind == ControllerKind::IfMpDimpc ? NeighborMode::Hyperplane : NeighborMode::Facet;
  for (int i = 0; i < plant.num_subsystems(); ++i) {
    const fs::path sp = solution_path(dir, i);
    art.solutions.push_back(solution_from_json(read_json_file(sp)));
    if (is_iteration_free(kind)) {
      const fs::path gp = graph_path(sp, mode);
      art.graphs.push_back(fs::exists(gp) ? graph_from_json(read_json_file(gp))
                                          : build_graph(art.solutions.back(), mode));
    }
  }
  return art;
}

int cmd_simulate(const fs::path& plant_file, const std::string& controller, int steps, std::uint64_t x0_seed,
                 const IterConfig& iter, const fs::path& artifacts, const fs::path& out) {
  const Plant plant = plant_from_json(read_json_file(plant_file));
  const CostWeights w = CostWeights::identity(plant);
  const ControllerKind kind = parse_controller_kind(controller);
  const Vec x0 = feasible_initial_state(plant, w, x0_seed);
  Controller c(kind, plant, w, iter, load_artifacts(plant, w, kind, artifacts));
  const Trace t = run_closed_loop(c, x0, steps);
  const std::string csv = trace_csv(t);
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_text_file(out, csv);
  }
  const RunSummary s = summarize(t);
  std::cerr << to_string(kind) << ": status " << t.status << ", " << t.completed() << "/" << steps
            << " steps, transfers " << s.total_transfers << ", combos " << s.total_combos << ", fallbacks "
            << s.fallback_count << '\n';
  if (!t.ok()) {
    // The trace is written either way; the exit code reports the failure.
    return kExitNumerical;
  }
  return 0;
}

int cmd_bench(BenchConfig config, const fs::path& out) {
  fs::create_directories(out);
  const BenchResult r = run_bench(config);
  const fs::path summary = out / "summary.csv";
  const fs::path manifest = out / "manifest.json";
  write_text_file(summary, summary_csv(r.rows));
  Json m = r.manifest;
  m["tool_version"] = FACETMPC_VERSION;
  m["timestamp"] = timestamp();
  m["artifacts"] = {summary.string(), manifest.string()};
  write_json_file(manifest, m);
  std::cout << r.rows.size() << " rows -> " << summary.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit and distributed MPC benchmark tool"};
  app.footer(kFooter);
  app.set_version_flag("--version", FACETMPC_VERSION);
  app.require_subcommand(1);

  int m = 2;
  int count = 1;
  std::uint64_t seed = 1;
  int steps = 100;
  IterConfig iter;
  std::string mode = "facet";
  std::string out;
  std::string plant_file;
  std::string solution_file;
  std::string controller;
  std::string artifacts;
  std::string config_file;
  bool skip_central = false;

  auto* gen = app.add_subcommand("generate", "Generate random stable, controllable plants");
  gen->add_option("--m", m, "Number of subsystems (>= 2)")->capture_default_str();
  gen->add_option("--count", count, "Number of plants")->capture_default_str();
  gen->add_option("--seed", seed, "First seed; plant k uses seed + k")->capture_default_str();
  gen->add_option("--out", out, "Output directory")->required();

  auto* solve = app.add_subcommand("solve", "Enumerate the explicit local (and centralized) solutions of a plant");
  solve->add_option("--plant", plant_file, "Plant JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out, "Output directory")->required();
  solve->add_flag("--skip-central", skip_central, "Skip the centralized solution (slow for M >= 3)");

  auto* adj = app.add_subcommand("adjacency", "Build the neighbor graph of one explicit solution");
  adj->add_option("--solution", solution_file, "Solution JSON")->required()->check(CLI::ExistingFile);
  adj->add_option("--mode", mode, "facet or hyperplane")->capture_default_str();
  adj->add_option("--out", out, "Graph JSON (default: next to the solution)");

  auto* sim = app.add_subcommand("simulate", "Closed-loop run of one controller");
  sim->add_option("--plant", plant_file, "Plant JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--controller", controller, "Controller kind")->required();
  sim->add_option("--steps", steps, "Simulation steps")->capture_default_str();
  sim->add_option("--seed", seed, "Initial-state seed")->capture_default_str();
  sim->add_option("--epsilon", iter.epsilon, "Iteration tolerance")->capture_default_str();
  sim->add_option("--pmax", iter.p_max, "Iteration cap")->capture_default_str();
  sim->add_option("--max-combos", iter.max_combos, "Per-step search budget of the iteration-free kinds (0: none)")
      ->capture_default_str();
  sim->add_option("--artifacts", artifacts, "Directory with solution_<i>.json and graphs from solve/adjacency");
  sim->add_option("--out", out, "Trace CSV (default: stdout)");

  auto* bench = app.add_subcommand("bench", "Batch benchmark over plants and controllers");
  std::vector<int> ms;
  std::string controllers = "all";
  unsigned threads = 0;
  bench->add_option("--config", config_file, "JSON config; flags given explicitly override it")
      ->check(CLI::ExistingFile);
  bench->add_option("--m", ms, "Subsystem counts, e.g. --m 2 3")->expected(1, -1);
  bench->add_option("--seed", seed, "First seed")->capture_default_str();
  int bench_count = 20;
  bench->add_option("--count", bench_count, "Plants per M")->capture_default_str();
  bench->add_option("--steps", steps, "Simulation steps")->capture_default_str();
  bench->add_option("--epsilon", iter.epsilon, "Iteration tolerance")->capture_default_str();
  bench->add_option("--pmax", iter.p_max, "Iteration cap")->capture_default_str();
  bench->add_option("--max-combos", iter.max_combos, "Per-step search budget of the iteration-free kinds (0: none)")
      ->capture_default_str();
  bench->add_option("--controllers", controllers, "Comma-separated kinds or all")->capture_default_str();
  bench->add_option("--threads", threads, "Worker threads (0: all cores)")->capture_default_str();
  bench->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen) return cmd_generate(m, count, seed, out);
    if (*solve) return cmd_solve(plant_file, out, skip_central);
    if (*adj) return cmd_adjacency(solution_file, mode, out);
    if (*sim) {
      iter.validate();
      if (steps < 1) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
      return cmd_simulate(plant_file, controller, steps, seed, iter, artifacts, out);
    }
    if (*bench) {
      BenchConfig config = config_file.empty() ? BenchConfig{} : bench_config_from_json(read_json_file(config_file));
      if (!ms.empty()) config.m_values = ms;
      if (config_file.empty() || bench->count("--seed") || bench->count("--count")) {
        if (bench_count < 1) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
        config.seeds.clear();
        for (int k = 0; k < bench_count; ++k) config.seeds.push_back(seed + static_cast<std::uint64_t>(k));
      }
      if (bench->count("--steps")) config.steps = steps;
      if (bench->count("--epsilon")) config.iter.epsilon = iter.epsilon;
      if (bench->count("--pmax")) config.iter.p_max = iter.p_max;
      if (bench->count("--max-combos")) config.iter.max_combos = iter.max_combos;
      if (bench->count("--threads")) config.threads = threads;
      if (bench->count("--controllers") && controllers != "all") {
        config.kinds.clear();
        std::stringstream ss(controllers);
        for (std::string k; std::getline(ss, k, ',');) config.kinds.push_back(parse_controller_kind(k));
      }
      config.validate();
      return cmd_bench(config, out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_validation_error(e.code()) ? kExitValidation : kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
