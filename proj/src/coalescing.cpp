#include "crw/coalescing.hpp"

#include <algorithm>

namespace crw {

CrwState crw_init(GraphOracle& g, std::span<const VertexId> initial) {
  if (initial.empty())
    throw config_error("crw_init: initial occupied set is empty");
  CrwState s;
  s.at.assign(static_cast<std::size_t>(g.exposed_count()), 0);
  s.occupied.reserve(initial.size());
  for (VertexId v : initial) {
    if (v < 0 || v >= static_cast<VertexId>(s.at.size()))
      throw config_error("crw_init: vertex not exposed");
    if (s.at[static_cast<std::size_t>(v)])
      throw config_error("crw_init: duplicate vertex in initial set");
    s.at[static_cast<std::size_t>(v)] = 1;
    s.occupied.push_back(v);
    s.total_rate += g.degree(v);
  }
  return s;
}

CrwState crw_init_all(GraphOracle& g) {
  if (!g.finite())
    throw config_error(
        "crw_init_all: full initial occupation needs a finite graph; "
        "use a window kind (line:R, regtree:D:R) for infinite graphs");
  std::vector<VertexId> all(static_cast<std::size_t>(g.vertex_count()));
  for (std::size_t i = 0; i < all.size(); ++i)
    all[i] = static_cast<VertexId>(i);
  return crw_init(g, all);
}

CrwEvent crw_step(CrwState& s, GraphOracle& g, Rng& rng) {
  if (s.total_rate <= 0) throw usage_error("crw_step: no particles left");
  s.clock += rng.exponential(static_cast<double>(s.total_rate));

  // degree-weighted particle choice by rejection against the max degree
  const auto bound = static_cast<std::uint64_t>(g.max_degree());
  std::size_t idx;
  VertexId u;
  std::int32_t deg_u;
  for (;;) {
    idx = static_cast<std::size_t>(rng.below(s.occupied.size()));
    u = s.occupied[idx];
    deg_u = g.degree(u);
    if (rng.below(bound) < static_cast<std::uint64_t>(deg_u)) break;
  }

  const auto nbrs = g.neighbors(u);
  const VertexId w = nbrs[static_cast<std::size_t>(rng.below(nbrs.size()))];
  if (static_cast<std::size_t>(g.exposed_count()) > s.at.size())
    s.at.resize(static_cast<std::size_t>(g.exposed_count()), 0);

  CrwEvent ev{s.clock, u, w, false};
  if (s.at[static_cast<std::size_t>(w)]) {
    // merge: the moving particle joins the one already at w
    ev.merged = true;
    s.at[static_cast<std::size_t>(u)] = 0;
    s.occupied[idx] = s.occupied.back();
    s.occupied.pop_back();
    s.total_rate -= deg_u;
  } else {
    s.at[static_cast<std::size_t>(u)] = 0;
    s.at[static_cast<std::size_t>(w)] = 1;
    s.occupied[idx] = w;
    s.total_rate += g.degree(w) - deg_u;
  }
  return ev;
}

std::int64_t crw_recount_rate(const CrwState& s, GraphOracle& g) {
  std::int64_t r = 0;
  for (VertexId v : s.occupied) r += g.degree(v);
  return r;
}

std::vector<EdgeRing> graphical_stream(GraphOracle& g, double horizon, Rng& rng) {
  if (!g.finite())
    throw usage_error("graphical_stream: finite graphs only");
  std::int64_t sum_deg = 0;
  const auto n = g.vertex_count();
  for (VertexId v = 0; v < n; ++v) sum_deg += g.degree(v);

  std::vector<EdgeRing> events;
  double t = 0.0;
  const auto bound = static_cast<std::uint64_t>(g.max_degree());
  for (;;) {
    t += rng.exponential(static_cast<double>(sum_deg));
    if (t > horizon) break;
    VertexId u;
    for (;;) {
      u = static_cast<VertexId>(rng.below(static_cast<std::uint64_t>(n)));
      if (rng.below(bound) < static_cast<std::uint64_t>(g.degree(u))) break;
    }
    const auto nbrs = g.neighbors(u);
    const VertexId w = nbrs[static_cast<std::size_t>(rng.below(nbrs.size()))];
    events.push_back({t, u, w});
  }
  return events;
}

void apply_ring(CrwState& s, GraphOracle& g, const EdgeRing& ring) {
  s.clock = ring.at_time;
  const auto u = static_cast<std::size_t>(ring.from);
  const auto w = static_cast<std::size_t>(ring.to);
  if (!s.at[u]) return;
  const auto it = std::find(s.occupied.begin(), s.occupied.end(), ring.from);
  if (s.at[w]) {
    s.at[u] = 0;
    *it = s.occupied.back();
    s.occupied.pop_back();
    s.total_rate -= g.degree(ring.from);
  } else {
    s.at[u] = 0;
    s.at[w] = 1;
    *it = ring.to;
    s.total_rate += g.degree(ring.to) - g.degree(ring.from);
  }
}

}  // namespace crw
