#ifndef CRW_NB_TREE_HPP
#define CRW_NB_TREE_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "crw/rng.hpp"
#include "crw/rooted_tree.hpp"

namespace crw {

// ---------------------------------------------------------------------------
// Full non-backtracking coalescing walk with priority to the root.

/// Per-particle state: the incident edge it may not traverse and whether its
/// last move was away from the root. A particle that has never moved counts
/// as moving towards the root (its forbidden edge points away, so its first
/// move can still be rootward).
struct NbParticle {
  VertexId forbidden = -1;    // neighbor across the forbidden edge
  std::int32_t forbidden_stub = -1;  // >= 0: forbidden edge is phantom stub #k
  bool away = false;
};

struct NbState {
  std::vector<std::uint8_t> occ;     // per-vertex occupancy
  std::vector<NbParticle> particle;  // valid where occ != 0
  std::vector<VertexId> plist;       // occupied vertices
  std::vector<std::int32_t> pslot;   // per-vertex slot in plist, -1 if absent
  std::int64_t total_allowed = 0;    // sum over particles of (nb_degree - 1)
  double clock = 0.0;
  double root_time = 0.0;            // accumulated root occupation X
  bool delete_on_turn = false;       // zap instrumentation

  std::int64_t particle_count() const {
    return static_cast<std::int64_t>(plist.size());
  }
  bool root_occupied() const { return !occ.empty() && occ[0] != 0; }
};

/// One particle per vertex, forbidden edge uniform among the edges leading
/// away from the root (children and stubs; all of the root's edges). Finite
/// trees only; rejects trees with bare degree-1 non-root leaves.
NbState nb_init(RootedTree& tree, Rng& rng, bool delete_on_turn = false);

struct NbEvent {
  double at_time = 0.0;
  VertexId from = -1;
  VertexId to = -1;      // -1: particle left through a stub or was deleted
  bool mover_away = false;
  bool mover_died = false;  // mover annihilated on a towards-root occupant
};

/// One Gillespie event over all allowed particle moves (each allowed incident
/// edge rings at rate 1). Collisions keep the towards-root particle when the
/// directions differ and the mover otherwise. Root occupation time accrues.
NbEvent nb_step(NbState& s, RootedTree& tree, Rng& rng);

/// Audit: recount total_allowed from scratch.
std::int64_t nb_recount_allowed(const NbState& s, RootedTree& tree);

// ---------------------------------------------------------------------------
// Zap model: towards-root movement at rate 1, deletion at rate d_v - 2
// (root: d_root - 1); set-union coalescence.

struct ZapState {
  std::vector<std::uint8_t> occ;
  std::vector<VertexId> plist;
  std::vector<std::int32_t> pslot;
  std::int64_t total_rate = 0;  // sum over particles of (nb_degree - 1)
  double clock = 0.0;
  double root_time = 0.0;

  std::int64_t particle_count() const {
    return static_cast<std::int64_t>(plist.size());
  }
  bool root_occupied() const { return !occ.empty() && occ[0] != 0; }
};

ZapState zap_init(RootedTree& tree);

struct ZapEvent {
  double at_time = 0.0;
  VertexId vertex = -1;
  bool deleted = false;  // otherwise moved towards the root
};

ZapEvent zap_step(ZapState& s, RootedTree& tree, Rng& rng);

/// Run either model to the horizon and return the root occupation time X_T.
double nb_root_occupation(RootedTree& tree, double horizon, Rng& rng);
double zap_root_occupation(RootedTree& tree, double horizon, Rng& rng);

// ---------------------------------------------------------------------------
// Shared-clock graphical representation (coupling tests, finite trees).

/// Ring of the unit-rate clock on one directed incident edge (u, edge_idx);
/// edges are indexed [parent?, children..., stubs...].
struct TreeRing {
  double at_time = 0.0;
  VertexId from = -1;
  std::int32_t edge_idx = -1;
};

std::vector<TreeRing> tree_ring_stream(RootedTree& tree, double horizon, Rng& rng);

/// Apply one ring to the full model; a ring on a particle's forbidden edge
/// does nothing.
void nb_apply_ring(NbState& s, RootedTree& tree, const TreeRing& ring);

/// Root-occupancy indicator path (time, occupied-after) for a replayed stream.
std::vector<std::pair<double, bool>> nb_root_path(NbState s, RootedTree& tree,
                                                  const std::vector<TreeRing>& stream);

// ---------------------------------------------------------------------------
// Dual voter model with absorbing vertex and its exact rate identity.

/// Tagged cluster of the dual on V plus an absorbing vertex. Every vertex
/// joins its parent's cluster at rate 1 and the absorber's cluster at rate
/// dual_degree - 2, the root's parent being the absorber. Growth and shrink
/// rates r+ and r- are maintained exactly and must stay equal.
struct NbClusterState {
  std::vector<VertexId> members;
  std::vector<std::int32_t> member_slot;
  std::vector<std::int32_t> out_children;  // per member: children outside
  std::vector<VertexId> grow_list;         // members with out_children > 0
  std::vector<std::int32_t> grow_slot;
  std::int64_t r_plus = 0;
  std::int64_t r_minus = 0;
  double clock = 0.0;
  std::int64_t jumps = 0;

  std::int64_t size() const { return static_cast<std::int64_t>(members.size()); }
  bool empty() const { return members.empty(); }
  bool is_member(VertexId v) const {
    return v >= 0 && v < static_cast<VertexId>(member_slot.size()) &&
           member_slot[static_cast<std::size_t>(v)] >= 0;
  }
};

/// Cluster {v}; lazy (untruncated) trees only.
NbClusterState nb_cluster_init(RootedTree& tree, VertexId v);
void nb_cluster_reset(NbClusterState& s, RootedTree& tree, VertexId v);

/// Direct membership edits (assembling specific states in tests and tools).
void nb_cluster_add_member(NbClusterState& s, RootedTree& tree, VertexId u);
void nb_cluster_remove_member(NbClusterState& s, RootedTree& tree, VertexId w);

struct NbClusterEvent {
  bool grew = false;
  VertexId vertex = -1;
  double at_time = 0.0;
};

NbClusterEvent nb_cluster_step(NbClusterState& s, RootedTree& tree, Rng& rng);

/// Recompute (r+, r-) from scratch; throws invariant_error when either side
/// disagrees with the incremental value or the two sides differ.
std::pair<std::int64_t, std::int64_t> nb_rate_audit(const NbClusterState& s,
                                                    RootedTree& tree);

}  // namespace crw

#endif  // CRW_NB_TREE_HPP
