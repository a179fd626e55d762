#include "facetmpc/io.hpp"

#include <fstream>
#include <sstream>

namespace facetmpc {

Json mat_to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::Io, "matrix must be an array of rows");
  if (j.empty()) return Mat(0, 0);
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Mat m(static_cast<Eigen::Index>(j.size()), cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::Io, "ragged matrix rows");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

Json vec_to_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vec vec_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::Io, "vector must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

Json plant_to_json(const Plant& p) {
  Json subs = Json::array();
  for (const auto& s : p.subsystems) {
    Json b = Json::array();
    for (const auto& bj : s.b) b.push_back(mat_to_json(bj));
    subs.push_back({{"A", mat_to_json(s.a)},
                    {"B", std::move(b)},
                    {"x_lb", vec_to_json(s.x_lb)},
                    {"x_ub", vec_to_json(s.x_ub)},
                    {"u_lb", vec_to_json(s.u_lb)},
                    {"u_ub", vec_to_json(s.u_ub)}});
  }
  return {{"M", p.num_subsystems()},
          {"np", p.horizon},
          {"sample_period", p.sample_period},
          {"seed", p.seed},
          {"subsystems", std::move(subs)}};
}

Plant plant_from_json(const Json& j) {
  try {
    Plant p;
    p.horizon = j.at("np").get<int>();
    p.sample_period = j.at("sample_period").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& sj : j.at("subsystems")) {
      Subsystem s;
      s.a = mat_from_json(sj.at("A"));
      for (const auto& bj : sj.at("B")) s.b.push_back(mat_from_json(bj));
      s.x_lb = vec_from_json(sj.at("x_lb"));
      s.x_ub = vec_from_json(sj.at("x_ub"));
      s.u_lb = vec_from_json(sj.at("u_lb"));
      s.u_ub = vec_from_json(sj.at("u_ub"));
      p.subsystems.push_back(std::move(s));
    }
    if (j.at("M").get<int>() != p.num_subsystems()) throw Error(ErrorCode::Io, "M disagrees with subsystem count");
    validate_plant(p);
    return p;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed plant JSON: ") + e.what());
  }
}

namespace {

Json controller_to_json(const std::optional<int>& c) { return c ? Json(*c) : Json("central"); }

std::optional<int> controller_from_json(const Json& j) {
  if (j.is_number_integer()) return j.get<int>();
  return std::nullopt;
}

}  // namespace

Json solution_to_json(const MpSolution& s) {
  Json regions = Json::array();
  for (const auto& r : s.regions) {
    regions.push_back({{"id", r.id},
                       {"Phi", mat_to_json(r.region.a)},
                       {"phi", vec_to_json(r.region.b)},
                       {"K", mat_to_json(r.gain)},
                       {"k", vec_to_json(r.offset)},
                       {"active_set", r.active_set}});
  }
  return {{"theta_dim", s.theta_dim},
          {"dec_dim", s.dec_dim},
          {"controller", controller_to_json(s.controller)},
          {"plant_hash", s.plant_hash},
          {"layout", {{"nx", s.layout.nx}, {"others", s.layout.others}, {"block_len", s.layout.block_len}}},
          {"regions", std::move(regions)}};
}

MpSolution solution_from_json(const Json& j) {
  try {
    MpSolution s;
    s.theta_dim = j.at("theta_dim").get<Eigen::Index>();
    s.dec_dim = j.at("dec_dim").get<Eigen::Index>();
    if (j.contains("controller")) s.controller = controller_from_json(j.at("controller"));
    if (j.contains("plant_hash")) s.plant_hash = j.at("plant_hash").get<std::string>();
    if (j.contains("layout")) {
      const Json& l = j.at("layout");
      s.layout.nx = l.at("nx").get<Eigen::Index>();
      s.layout.others = l.at("others").get<std::vector<int>>();
      s.layout.block_len = l.at("block_len").get<std::vector<Eigen::Index>>();
    } else {
      s.layout.nx = s.theta_dim;
    }
    for (const auto& rj : j.at("regions")) {
      CriticalRegion r;
      r.id = rj.at("id").get<int>();
      r.region.a = mat_from_json(rj.at("Phi"));
      r.region.b = vec_from_json(rj.at("phi"));
      if (r.region.a.rows() == 0) r.region.a.resize(0, s.theta_dim);
      r.gain = mat_from_json(rj.at("K"));
      r.offset = vec_from_json(rj.at("k"));
      r.active_set = rj.at("active_set").get<std::vector<int>>();
      if (r.region.a.cols() != s.theta_dim || r.gain.rows() != s.dec_dim || r.gain.cols() != s.theta_dim ||
          r.offset.size() != s.dec_dim || r.region.b.size() != r.region.a.rows()) {
        throw Error(ErrorCode::Io, "region dimensions disagree with theta_dim/dec_dim");
      }
      if (r.id != static_cast<int>(s.regions.size())) throw Error(ErrorCode::Io, "region ids must be dense");
      s.regions.push_back(std::move(r));
    }
    return s;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed solution JSON: ") + e.what());
  }
}

Json graph_to_json(const AdjacencyGraph& g) {
  Json nb = Json::object();
  for (const auto& [id, list] : g.neighbors) nb[std::to_string(id)] = list;
  return {{"controller", controller_to_json(g.controller)}, {"mode", to_string(g.mode)}, {"neighbors", nb}};
}

AdjacencyGraph graph_from_json(const Json& j) {
  try {
    AdjacencyGraph g;
    g.controller = controller_from_json(j.at("controller"));
    if (j.contains("mode")) g.mode = j.at("mode").get<std::string>() == "hyperplane" ? NeighborMode::Hyperplane
                                                                                     : NeighborMode::Facet;
    for (const auto& [key, list] : j.at("neighbors").items()) {
      g.neighbors[std::stoi(key)] = list.get<std::vector<int>>();
    }
    return g;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed graph JSON: ") + e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace facetmpc
