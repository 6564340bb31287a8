#ifndef CRW_COALESCING_HPP
#define CRW_COALESCING_HPP

#include <span>
#include <vector>

#include "crw/graph.hpp"
#include "crw/rng.hpp"

namespace crw {

/// Occupied-vertex set of the coalescing walk, with the aggregate jump rate
/// (sum of occupied degrees) maintained exactly as an integer.
struct CrwState {
  std::vector<VertexId> occupied;   // occupancy list, arbitrary order
  std::vector<std::uint8_t> at;     // per-vertex occupancy flag
  std::int64_t total_rate = 0;
  double clock = 0.0;

  std::int64_t size() const { return static_cast<std::int64_t>(occupied.size()); }
  bool occupies(VertexId v) const {
    return v >= 0 && v < static_cast<VertexId>(at.size()) &&
           at[static_cast<std::size_t>(v)] != 0;
  }
};

/// Start with particles on the given vertices (no duplicates, nonempty).
CrwState crw_init(GraphOracle& g, std::span<const VertexId> initial);

/// Start with one particle at every vertex; finite graphs only.
CrwState crw_init_all(GraphOracle& g);

struct CrwEvent {
  double at_time = 0.0;
  VertexId from = -1;
  VertexId to = -1;
  bool merged = false;
};

/// One event of the direct (Gillespie) simulation: advance the clock by
/// Exp(total_rate), move a degree-weighted uniform particle along a uniform
/// incident edge, merging when the target is occupied.
CrwEvent crw_step(CrwState& s, GraphOracle& g, Rng& rng);

/// Recompute the aggregate rate from scratch (audit; must equal s.total_rate).
std::int64_t crw_recount_rate(const CrwState& s, GraphOracle& g);

/// Poisson clock ring on a directed edge of the graphical representation.
struct EdgeRing {
  double at_time = 0.0;
  VertexId from = -1;
  VertexId to = -1;
};

/// Record unit-rate rings on every directed edge up to the horizon (finite
/// graphs). Replaying one stream against several initial sets realizes the
/// monotone coupling of the graphical representation.
std::vector<EdgeRing> graphical_stream(GraphOracle& g, double horizon, Rng& rng);

/// Apply one ring: if the source is occupied the particle crosses, merging
/// when the target is occupied.
void apply_ring(CrwState& s, GraphOracle& g, const EdgeRing& ring);

}  // namespace crw

#endif  // CRW_COALESCING_HPP
