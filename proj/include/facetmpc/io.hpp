#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>

#include "facetmpc/adjacency.hpp"
#include "facetmpc/mpqp.hpp"
#include "facetmpc/plants.hpp"

namespace facetmpc {

using Json = nlohmann::json;

Json mat_to_json(const Mat& m);
Mat mat_from_json(const Json& j);
Json vec_to_json(const Vec& v);
Vec vec_from_json(const Json& j);

/// {M, np, sample_period, seed, subsystems:[{A, B:[...per j], x_lb, x_ub, u_lb, u_ub}]}
Json plant_to_json(const Plant& p);
Plant plant_from_json(const Json& j);

/// {theta_dim, dec_dim, controller, plant_hash, layout,
///  regions:[{id, Phi, phi, K, k, active_set}]}
Json solution_to_json(const MpSolution& s);
MpSolution solution_from_json(const Json& j);

/// {controller, mode, neighbors:{"id":[...]}}
Json graph_to_json(const AdjacencyGraph& g);
AdjacencyGraph graph_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
/// Pretty JSON with a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace facetmpc
