#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "facetmpc/mpqp.hpp"
#include "facetmpc/polytope.hpp"

namespace facetmpc {

enum class FacetStatus { NoSharedFacet, PointTouch, CommonFacet };

struct FacetResult {
  FacetStatus status = FacetStatus::NoSharedFacet;
  double t_star = 0.0;     ///< +inf when the shared facet is unbounded
  std::optional<Vec> witness;
  bool witness_on_facet = false;  ///< a_j x >= b_j - 1e-6 at the witness
};

/// Region pair (ordered) whose descriptions contain facet `facet_j` of
/// `region_i` with opposite orientation in `region_k`.
struct HyperplaneCandidate {
  int region_i = 0;
  int region_k = 0;
  int facet_j = 0;

  auto operator<=>(const HyperplaneCandidate&) const = default;
};

enum class NeighborMode { Hyperplane, Facet };

/// Symmetric neighbor lists of one controller's explicit solution. Every
/// region has an entry (possibly empty); a region missing from the map has
/// no searchable neighborhood at all.
struct AdjacencyGraph {
  std::optional<int> controller;
  NeighborMode mode = NeighborMode::Facet;
  std::map<int, std::vector<int>> neighbors;

  const std::vector<int>* find(int id) const;
  std::size_t num_edges() const;
};

std::vector<HyperplaneCandidate> shared_hyperplane_candidates(std::span<const Polytope> regions);
std::vector<HyperplaneCandidate> shared_hyperplane_candidates(const MpSolution& s);

/// max t s.t. x in R_i, x in R_k, t <= dist(x, H_l) for all facets l != j of R_i.
FacetResult facet_lp(const Polytope& r_i, const Polytope& r_k, int j);

AdjacencyGraph build_graph(std::span<const Polytope> regions, NeighborMode mode);
AdjacencyGraph build_graph(const MpSolution& s, NeighborMode mode = NeighborMode::Facet);

const char* to_string(NeighborMode mode);
const char* to_string(FacetStatus status);

}  // namespace facetmpc
