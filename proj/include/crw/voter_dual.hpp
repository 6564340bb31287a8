#ifndef CRW_VOTER_DUAL_HPP
#define CRW_VOTER_DUAL_HPP

#include <cstdint>
#include <vector>

#include "crw/graph.hpp"
#include "crw/rng.hpp"

namespace crw {

/// Tagged voter-model cluster with boundary-edge bookkeeping. The outgoing
/// boundary count (number of edges from members to non-members) drives both
/// the growth and the shrink rate; the total event rate is twice that count.
/// All counts are maintained as exact integers.
struct ClusterState {
  std::vector<VertexId> members;
  std::vector<std::int32_t> member_slot;    // per vertex; -1 when not a member
  std::vector<std::int32_t> out_count;      // per member: neighbors outside
  std::vector<VertexId> boundary;           // members with out_count > 0
  std::vector<std::int32_t> boundary_slot;  // per vertex; -1 when absent
  std::int64_t boundary_out = 0;
  double clock = 0.0;
  std::int64_t jumps = 0;

  std::int64_t size() const { return static_cast<std::int64_t>(members.size()); }
  bool empty() const { return members.empty(); }
  bool is_member(VertexId v) const {
    return v >= 0 && v < static_cast<VertexId>(member_slot.size()) &&
           member_slot[static_cast<std::size_t>(v)] >= 0;
  }
};

/// Cluster {v} with boundary equal to deg(v).
ClusterState cluster_init(GraphOracle& g, VertexId v);

/// Same, reusing the state's buffers (hot path for replicate loops).
void cluster_reset(ClusterState& s, GraphOracle& g, VertexId v);

struct ClusterEvent {
  bool grew = false;
  VertexId vertex = -1;  // vertex added or removed
  double at_time = 0.0;
};

/// One transition: advance the clock by Exp(2 * boundary_out); with equal
/// probability either add the head of a uniform outgoing boundary edge or
/// remove the tail of a uniform incoming one.
ClusterEvent cluster_step(ClusterState& s, GraphOracle& g, Rng& rng);

/// From-scratch boundary recount (audit; exact equality required).
std::int64_t recount_boundary(const ClusterState& s, GraphOracle& g);

/// Absorption time of one cluster trajectory.
struct SurvivalOutcome {
  double tau = 0.0;     // +infinity when still alive at the horizon
  bool capped = false;  // cluster exceeded size_cap (scored as surviving)
};

/// Run a fresh cluster from v until absorption, the horizon, the size cap,
/// or a boundary-free full state (finite graphs), whichever comes first.
SurvivalOutcome survival_replicate(ClusterState& s, GraphOracle& g, VertexId v,
                                   double horizon, std::int64_t size_cap,
                                   Rng& rng);

/// Per-jump-index statistics of |cluster| over many replicates, with the
/// post-absorption padding convention (absorbed trajectories contribute 0).
struct JumpTraceStats {
  std::vector<std::int64_t> indices;     // requested jump indices
  std::vector<std::int64_t> size_sums;   // sum over replicates of |cluster|
  std::int64_t sup_threshold = 0;        // threshold for the running-sup tally
  std::int64_t sup_jumps = 0;            // sup taken over indices <= sup_jumps
  std::int64_t sup_exceed_count = 0;     // replicates with sup > threshold
  std::int64_t replicates = 0;
};

/// Full jump trace of a single trajectory (diagnostics and tests).
struct JumpTraceEntry {
  std::int64_t index = 0;
  std::int64_t cluster_size = 0;
  std::int64_t boundary_out = 0;
  double at_time = 0.0;
};

/// Trace one trajectory for n_jumps jumps, padding jumps at rate 1 after
/// absorption so the index set stays infinite.
std::vector<JumpTraceEntry> trace_jumps(ClusterState& s, GraphOracle& g,
                                        VertexId v, std::int64_t n_jumps,
                                        Rng& rng);

}  // namespace crw

#endif  // CRW_VOTER_DUAL_HPP
