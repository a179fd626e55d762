#include "facetmpc/adjacency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace facetmpc {

const std::vector<int>* AdjacencyGraph::find(int id) const {
  auto it = neighbors.find(id);
  return it == neighbors.end() ? nullptr : &it->second;
}

std::size_t AdjacencyGraph::num_edges() const {
  std::size_t n = 0;
  for (const auto& [id, list] : neighbors) n += list.size();
  return n / 2;
}

const char* to_string(NeighborMode mode) { return mode == NeighborMode::Facet ? "facet" : "hyperplane"; }

const char* to_string(FacetStatus status) {
  switch (status) {
    case FacetStatus::NoSharedFacet: return "NoSharedFacet";
    case FacetStatus::PointTouch: return "PointTouch";
    case FacetStatus::CommonFacet: return "CommonFacet";
  }
  return "?";
}

std::vector<HyperplaneCandidate> shared_hyperplane_candidates(std::span<const Polytope> regions) {
  struct Entry {
    double beta;
    int region;
    int row;
  };
  std::vector<Entry> entries;
  std::vector<Polytope> normalized;
  normalized.reserve(regions.size());
  for (std::size_t r = 0; r < regions.size(); ++r) {
    normalized.push_back(normalize(regions[r]));
    for (Eigen::Index i = 0; i < normalized.back().num_rows(); ++i) {
      entries.push_back({normalized.back().b(i), static_cast<int>(r), static_cast<int>(i)});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.beta < b.beta; });

  const double tol = kTol.hyperplane_tol;
  std::vector<HyperplaneCandidate> out;
  for (const Entry& e : entries) {
    const double target = -e.beta;
    auto lo = std::lower_bound(entries.begin(), entries.end(), target - tol,
                               [](const Entry& a, double v) { return a.beta < v; });
    const Polytope& pi = normalized[e.region];
    for (auto it = lo; it != entries.end() && it->beta <= target + tol; ++it) {
      if (it->region == e.region) continue;
      const Polytope& pk = normalized[it->region];
      if (opposite_hyperplanes(pi.a.row(e.row).transpose(), pi.b(e.row), pk.a.row(it->row).transpose(),
                               pk.b(it->row))) {
        out.push_back({e.region, it->region, e.row});
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<HyperplaneCandidate> shared_hyperplane_candidates(const MpSolution& s) {
  std::vector<Polytope> polys;
  polys.reserve(s.regions.size());
  for (const auto& r : s.regions) polys.push_back(r.region);
  return shared_hyperplane_candidates(polys);
}

FacetResult facet_lp(const Polytope& r_i, const Polytope& r_k, int j) {
  if (r_i.dim() != r_k.dim()) throw Error(ErrorCode::DimensionMismatch, "regions live in different spaces");
  if (j < 0 || j >= r_i.num_rows()) throw Error(ErrorCode::InvalidArgument, "facet index out of range");
  const Eigen::Index d = r_i.dim();
  const Eigen::Index mi = r_i.num_rows();
  const Eigen::Index mk = r_k.num_rows();

  // Variables (x, t).
  LpProblem lp;
  lp.objective = Vec::Zero(d + 1);
  lp.objective(d) = 1.0;
  const Eigen::Index rows = mi + mk + (mi - 1) + 1;
  lp.a_ub = Mat::Zero(rows, d + 1);
  lp.b_ub = Vec(rows);
  Eigen::Index r = 0;
  for (Eigen::Index l = 0; l < mi; ++l, ++r) {
    lp.a_ub.row(r).head(d) = r_i.a.row(l);
    lp.b_ub(r) = r_i.b(l);
  }
  for (Eigen::Index l = 0; l < mk; ++l, ++r) {
    lp.a_ub.row(r).head(d) = r_k.a.row(l);
    lp.b_ub(r) = r_k.b(l);
  }
  for (Eigen::Index l = 0; l < mi; ++l) {
    if (l == j) continue;
    lp.a_ub.row(r).head(d) = r_i.a.row(l);
    lp.a_ub(r, d) = r_i.a.row(l).norm();
    lp.b_ub(r) = r_i.b(l);
    ++r;
  }
  lp.a_ub(r, d) = 1.0;
  lp.b_ub(r) = kTol.unbounded_cap;

  const LpResult res = lp_solve(lp);
  FacetResult out;
  if (res.status != LpStatus::Optimal) {
    out.status = FacetStatus::NoSharedFacet;
    return out;
  }
  const Vec& z = *res.z;
  out.witness = z.head(d);
  out.t_star = std::max(z(d), 0.0);
  if (z(d) >= kTol.unbounded_cap * (1.0 - 1e-9)) out.t_star = std::numeric_limits<double>::infinity();
  out.status = out.t_star > kTol.t_zero_tol ? FacetStatus::CommonFacet : FacetStatus::PointTouch;
  const double norm_j = r_i.a.row(j).norm();
  out.witness_on_facet = r_i.a.row(j).dot(*out.witness) >= r_i.b(j) - 1e-6 * std::max(norm_j, 1.0);
  return out;
}

namespace {

struct Box {
  Vec lo, hi;
};

// Axis-aligned bounding box of a region (entries may be infinite).
Box bounding_box(const Polytope& r) {
  const Eigen::Index d = r.dim();
  Box box{Vec::Constant(d, -std::numeric_limits<double>::infinity()),
          Vec::Constant(d, std::numeric_limits<double>::infinity())};
  LpProblem lp;
  lp.a_ub = r.a;
  lp.b_ub = r.b;
  for (Eigen::Index k = 0; k < d; ++k) {
    for (double sign : {1.0, -1.0}) {
      lp.objective = Vec::Zero(d);
      lp.objective(k) = sign;
      const LpResult res = lp_solve(lp);
      if (res.status != LpStatus::Optimal) continue;
      if (sign > 0) box.hi(k) = res.value;
      else box.lo(k) = -res.value;
    }
  }
  return box;
}

bool boxes_overlap(const Box& a, const Box& b, double tol) {
  return ((a.lo.array() <= b.hi.array() + tol) && (b.lo.array() <= a.hi.array() + tol)).all();
}

}  // namespace

AdjacencyGraph build_graph(std::span<const Polytope> regions, NeighborMode mode) {
  AdjacencyGraph g;
  g.mode = mode;
  std::vector<std::set<int>> adj(regions.size());
  std::vector<Polytope> normalized;
  normalized.reserve(regions.size());
  for (const auto& r : regions) normalized.push_back(normalize(r));

  // Regions with disjoint bounding boxes cannot share a facet, which spares
  // most facet LPs.
  std::vector<Box> boxes;
  if (mode == NeighborMode::Facet) {
    boxes.reserve(regions.size());
    for (const auto& r : normalized) boxes.push_back(bounding_box(r));
  }

  for (const auto& c : shared_hyperplane_candidates(regions)) {
    if (adj[c.region_i].count(c.region_k)) continue;
    bool edge = mode == NeighborMode::Hyperplane;
    // The facet LP is symmetric in the pair; evaluate it from the lower id.
    if (!edge && c.region_i < c.region_k && boxes_overlap(boxes[c.region_i], boxes[c.region_k], 1e-6)) {
      edge = facet_lp(normalized[c.region_i], normalized[c.region_k], c.facet_j).status == FacetStatus::CommonFacet;
    }
    if (edge) {
      adj[c.region_i].insert(c.region_k);
      adj[c.region_k].insert(c.region_i);
    }
  }
  for (std::size_t r = 0; r < regions.size(); ++r) {
    g.neighbors[static_cast<int>(r)] = std::vector<int>(adj[r].begin(), adj[r].end());
  }
  return g;
}

AdjacencyGraph build_graph(const MpSolution& s, NeighborMode mode) {
  std::vector<Polytope> polys;
  polys.reserve(s.regions.size());
  for (const auto& r : s.regions) polys.push_back(r.region);
  AdjacencyGraph g = build_graph(polys, mode);
  g.controller = s.controller;
  return g;
}

}  // namespace facetmpc
