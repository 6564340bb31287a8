#include "crw/voter_dual.hpp"

#include <algorithm>
#include <limits>

namespace crw {

namespace {

void ensure_sizes(ClusterState& s, GraphOracle& g) {
  const auto n = static_cast<std::size_t>(g.exposed_count());
  if (s.member_slot.size() < n) {
    s.member_slot.resize(n, -1);
    s.out_count.resize(n, 0);
    s.boundary_slot.resize(n, -1);
  }
}

void boundary_add(ClusterState& s, VertexId v) {
  s.boundary_slot[static_cast<std::size_t>(v)] =
      static_cast<std::int32_t>(s.boundary.size());
  s.boundary.push_back(v);
}

void boundary_remove(ClusterState& s, VertexId v) {
  const auto slot = s.boundary_slot[static_cast<std::size_t>(v)];
  const VertexId last = s.boundary.back();
  s.boundary[static_cast<std::size_t>(slot)] = last;
  s.boundary_slot[static_cast<std::size_t>(last)] = slot;
  s.boundary.pop_back();
  s.boundary_slot[static_cast<std::size_t>(v)] = -1;
}

void add_member(ClusterState& s, GraphOracle& g, VertexId y) {
  const auto nbrs = g.neighbors(y);  // may expose fresh vertices
  ensure_sizes(s, g);
  s.member_slot[static_cast<std::size_t>(y)] =
      static_cast<std::int32_t>(s.members.size());
  s.members.push_back(y);

  std::int32_t inside = 0;
  for (VertexId z : nbrs) {
    if (!s.is_member(z)) continue;
    ++inside;
    // edge z->y stops being a boundary edge
    if (--s.out_count[static_cast<std::size_t>(z)] == 0) boundary_remove(s, z);
  }
  const auto out = static_cast<std::int32_t>(nbrs.size()) - inside;
  s.out_count[static_cast<std::size_t>(y)] = out;
  s.boundary_out += out - inside;
  if (out > 0) boundary_add(s, y);
}

void remove_member(ClusterState& s, GraphOracle& g, VertexId x) {
  const auto slot = s.member_slot[static_cast<std::size_t>(x)];
  const VertexId last = s.members.back();
  s.members[static_cast<std::size_t>(slot)] = last;
  s.member_slot[static_cast<std::size_t>(last)] = slot;
  s.members.pop_back();
  s.member_slot[static_cast<std::size_t>(x)] = -1;

  const auto out = s.out_count[static_cast<std::size_t>(x)];
  if (out > 0) boundary_remove(s, x);
  s.out_count[static_cast<std::size_t>(x)] = 0;
  s.boundary_out -= out;
  // members adjacent to x gain a boundary edge each
  for (VertexId z : g.neighbors(x)) {
    if (!s.is_member(z)) continue;
    if (s.out_count[static_cast<std::size_t>(z)]++ == 0) boundary_add(s, z);
    ++s.boundary_out;
  }
}

}  // namespace

void cluster_reset(ClusterState& s, GraphOracle& g, VertexId v) {
  for (VertexId m : s.members) {
    s.member_slot[static_cast<std::size_t>(m)] = -1;
    s.out_count[static_cast<std::size_t>(m)] = 0;
  }
  for (VertexId b : s.boundary) s.boundary_slot[static_cast<std::size_t>(b)] = -1;
  s.members.clear();
  s.boundary.clear();
  s.boundary_out = 0;
  s.clock = 0.0;
  s.jumps = 0;

  ensure_sizes(s, g);
  if (v < 0 || v >= static_cast<VertexId>(g.exposed_count()))
    throw config_error("cluster init: vertex not exposed");
  add_member(s, g, v);
}

ClusterState cluster_init(GraphOracle& g, VertexId v) {
  ClusterState s;
  cluster_reset(s, g, v);
  return s;
}

ClusterEvent cluster_step(ClusterState& s, GraphOracle& g, Rng& rng) {
  if (s.empty()) throw usage_error("cluster_step: cluster is empty");
  if (s.boundary_out == 0)
    throw usage_error("cluster_step: no boundary edges (absorbing full state)");

  s.clock += rng.exponential(2.0 * static_cast<double>(s.boundary_out));
  ++s.jumps;
  const bool grow = rng.coin();

  // member incident to a uniform boundary edge: weight out_count[x]
  const auto bound = static_cast<std::uint64_t>(g.max_degree());
  VertexId x;
  for (;;) {
    x = s.boundary[static_cast<std::size_t>(rng.below(s.boundary.size()))];
    const auto w = static_cast<std::uint64_t>(
        s.out_count[static_cast<std::size_t>(x)]);
    if (rng.below(bound) < w) break;
  }

  ClusterEvent ev{grow, x, s.clock};
  if (grow) {
    // uniform outgoing boundary edge (x, y): add its head y
    auto j = rng.below(static_cast<std::uint64_t>(
        s.out_count[static_cast<std::size_t>(x)]));
    VertexId y = -1;
    for (VertexId z : g.neighbors(x)) {
      if (s.is_member(z)) continue;
      if (j-- == 0) { y = z; break; }
    }
    ev.vertex = y;
    add_member(s, g, y);
  } else {
    // uniform incoming boundary edge (y, x): remove its head x
    remove_member(s, g, x);
  }
  return ev;
}

std::int64_t recount_boundary(const ClusterState& s, GraphOracle& g) {
  std::int64_t total = 0;
  for (VertexId m : s.members)
    for (VertexId z : g.neighbors(m))
      if (!s.is_member(z)) ++total;
  return total;
}

SurvivalOutcome survival_replicate(ClusterState& s, GraphOracle& g, VertexId v,
                                   double horizon, std::int64_t size_cap,
                                   Rng& rng) {
  cluster_reset(s, g, v);
  const double inf = std::numeric_limits<double>::infinity();
  for (;;) {
    if (s.empty()) return {s.clock, false};
    if (s.clock > horizon) return {inf, false};
    if (s.boundary_out == 0) return {inf, false};  // finite graph, full cluster
    if (s.size() > size_cap) return {inf, true};
    cluster_step(s, g, rng);
  }
}

std::vector<JumpTraceEntry> trace_jumps(ClusterState& s, GraphOracle& g,
                                        VertexId v, std::int64_t n_jumps,
                                        Rng& rng) {
  cluster_reset(s, g, v);
  std::vector<JumpTraceEntry> trace;
  trace.reserve(static_cast<std::size_t>(n_jumps) + 1);
  trace.push_back({0, s.size(), s.boundary_out, 0.0});
  for (std::int64_t i = 1; i <= n_jumps; ++i) {
    if (s.empty()) {
      s.clock += rng.exponential(1.0);  // padded jump staying at 0
      ++s.jumps;
    } else if (s.boundary_out == 0) {
      trace.push_back({i, s.size(), 0, s.clock});  // frozen full state
      continue;
    } else {
      cluster_step(s, g, rng);
    }
    trace.push_back({i, s.size(), s.boundary_out, s.clock});
  }
  return trace;
}

}  // namespace crw
