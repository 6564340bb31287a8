#include "crw/nb_tree.hpp"

#include <algorithm>

namespace crw {

namespace {

std::int64_t allowed_moves(RootedTree& tree, VertexId v) {
  return tree.nb_degree(v) - 1;
}

void particle_list_remove(NbState& s, VertexId v) {
  const auto slot = s.pslot[static_cast<std::size_t>(v)];
  const VertexId last = s.plist.back();
  s.plist[static_cast<std::size_t>(slot)] = last;
  s.pslot[static_cast<std::size_t>(last)] = slot;
  s.plist.pop_back();
  s.pslot[static_cast<std::size_t>(v)] = -1;
  s.occ[static_cast<std::size_t>(v)] = 0;
}

void particle_list_add(NbState& s, VertexId v, const NbParticle& p) {
  s.occ[static_cast<std::size_t>(v)] = 1;
  s.particle[static_cast<std::size_t>(v)] = p;
  s.pslot[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(s.plist.size());
  s.plist.push_back(v);
}

struct MoveTarget {
  VertexId w = -1;   // valid when stub == false
  bool stub = false;
};

/// j-th allowed target of the particle at u; incident edges are ordered
/// [parent (non-root), children..., stubs...] and the forbidden one skipped.
MoveTarget nth_allowed_target(RootedTree& tree, VertexId u, const NbParticle& p,
                              std::int64_t j) {
  if (u != 0) {
    const VertexId par = tree.parent(u);
    if (!(p.forbidden_stub < 0 && p.forbidden == par)) {
      if (j == 0) return {par, false};
      --j;
    }
  }
  for (VertexId c : tree.children(u)) {
    if (p.forbidden_stub < 0 && p.forbidden == c) continue;
    if (j == 0) return {c, false};
    --j;
  }
  const auto stubs = tree.stub_count(u);
  for (std::int32_t k = 0; k < stubs; ++k) {
    if (p.forbidden_stub == k) continue;
    if (j == 0) return {VertexId{-1}, true};
    --j;
  }
  throw invariant_error("nb: allowed-move index out of range");
}

/// Execute the move of the particle at u to the given target, resolving
/// collisions with priority to the root. Returns the filled event.
NbEvent execute_move(NbState& s, RootedTree& tree, VertexId u,
                     const MoveTarget& target) {
  NbEvent ev;
  ev.at_time = s.clock;
  ev.from = u;
  if (target.stub) {
    // the particle turns away below the window and can never matter again
    particle_list_remove(s, u);
    s.total_allowed -= allowed_moves(tree, u);
    ev.to = -1;
    ev.mover_away = true;
    return ev;
  }

  const VertexId w = target.w;
  const bool away = (u == 0) || w != tree.parent(u);
  ev.mover_away = away;
  if (s.delete_on_turn && away) {
    particle_list_remove(s, u);
    s.total_allowed -= allowed_moves(tree, u);
    ev.to = -1;
    return ev;
  }

  particle_list_remove(s, u);
  s.total_allowed -= allowed_moves(tree, u);
  ev.to = w;
  if (s.occ[static_cast<std::size_t>(w)]) {
    const NbParticle& occupant = s.particle[static_cast<std::size_t>(w)];
    if (occupant.away != away && away) {
      // mover heads away onto a towards-root occupant: the mover dies
      ev.mover_died = true;
      return ev;
    }
    // otherwise the occupant is annihilated and the mover takes the site
    particle_list_remove(s, w);
    s.total_allowed -= allowed_moves(tree, w);
  }
  particle_list_add(s, w, NbParticle{u, -1, away});
  s.total_allowed += allowed_moves(tree, w);
  return ev;
}

}  // namespace

NbState nb_init(RootedTree& tree, Rng& rng, bool delete_on_turn) {
  if (!tree.finite())
    throw config_error("nb models start one particle per vertex: finite trees only");
  const auto n = static_cast<std::size_t>(tree.vertex_count());
  NbState s;
  s.delete_on_turn = delete_on_turn;
  s.occ.assign(n, 1);
  s.particle.assign(n, NbParticle{});
  s.plist.resize(n);
  s.pslot.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    s.plist[v] = static_cast<VertexId>(v);
    s.pslot[v] = static_cast<std::int32_t>(v);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = static_cast<VertexId>(i);
    const auto kids = tree.child_count(v);
    const auto stubs = tree.stub_count(v);
    const auto away_edges = kids + stubs;
    if (away_edges == 0) {
      if (v == 0)
        throw config_error("nb init: root has no edges leading away");
      throw config_error(
          "nb init: non-root leaf of degree 1; the model is undefined there "
          "(use leaf policy 'extend' for finite windows)");
    }
    NbParticle p;
    const auto j = static_cast<std::int32_t>(
        rng.below(static_cast<std::uint64_t>(away_edges)));
    if (j < kids) {
      p.forbidden = tree.children(v)[static_cast<std::size_t>(j)];
    } else {
      p.forbidden = -1;
      p.forbidden_stub = j - kids;
    }
    s.particle[i] = p;
    s.total_allowed += allowed_moves(tree, v);
  }
  return s;
}

NbEvent nb_step(NbState& s, RootedTree& tree, Rng& rng) {
  if (s.plist.empty()) throw usage_error("nb_step: no particles");
  if (s.total_allowed <= 0)
    throw usage_error("nb_step: all remaining particles are frozen");

  const double dt = rng.exponential(static_cast<double>(s.total_allowed));
  if (s.root_occupied()) s.root_time += dt;
  s.clock += dt;

  const auto bound = static_cast<std::uint64_t>(tree.max_nb_degree() - 1);
  VertexId u;
  for (;;) {
    u = s.plist[static_cast<std::size_t>(rng.below(s.plist.size()))];
    if (rng.below(bound) < static_cast<std::uint64_t>(allowed_moves(tree, u)))
      break;
  }
  const auto j = static_cast<std::int64_t>(
      rng.below(static_cast<std::uint64_t>(allowed_moves(tree, u))));
  const auto target =
      nth_allowed_target(tree, u, s.particle[static_cast<std::size_t>(u)], j);
  return execute_move(s, tree, u, target);
}

std::int64_t nb_recount_allowed(const NbState& s, RootedTree& tree) {
  std::int64_t total = 0;
  for (VertexId v : s.plist) total += allowed_moves(tree, v);
  return total;
}

// ---------------------------------------------------------------------------
// Zap model

ZapState zap_init(RootedTree& tree) {
  if (!tree.finite())
    throw config_error("zap model starts one particle per vertex: finite trees only");
  const auto n = static_cast<std::size_t>(tree.vertex_count());
  ZapState s;
  s.occ.assign(n, 1);
  s.plist.resize(n);
  s.pslot.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    s.plist[v] = static_cast<VertexId>(v);
    s.pslot[v] = static_cast<std::int32_t>(v);
    if (v != 0 && tree.nb_degree(static_cast<VertexId>(v)) < 2)
      throw config_error(
          "zap init: non-root leaf of degree 1; the model is undefined there "
          "(use leaf policy 'extend' for finite windows)");
    s.total_rate += allowed_moves(tree, static_cast<VertexId>(v));
  }
  return s;
}

namespace {

void zap_remove(ZapState& s, RootedTree& tree, VertexId v) {
  const auto slot = s.pslot[static_cast<std::size_t>(v)];
  const VertexId last = s.plist.back();
  s.plist[static_cast<std::size_t>(slot)] = last;
  s.pslot[static_cast<std::size_t>(last)] = slot;
  s.plist.pop_back();
  s.pslot[static_cast<std::size_t>(v)] = -1;
  s.occ[static_cast<std::size_t>(v)] = 0;
  s.total_rate -= allowed_moves(tree, v);
}

}  // namespace

ZapEvent zap_step(ZapState& s, RootedTree& tree, Rng& rng) {
  if (s.plist.empty()) throw usage_error("zap_step: no particles");
  if (s.total_rate <= 0)
    throw usage_error("zap_step: all remaining particles have rate 0");

  const double dt = rng.exponential(static_cast<double>(s.total_rate));
  if (s.root_occupied()) s.root_time += dt;
  s.clock += dt;

  // particle at v has total rate nb_degree(v) - 1: one rootward move plus
  // d_v - 2 deletions (the root's moves are all deletions)
  const auto bound = static_cast<std::uint64_t>(tree.max_nb_degree() - 1);
  VertexId v;
  for (;;) {
    v = s.plist[static_cast<std::size_t>(rng.below(s.plist.size()))];
    if (rng.below(bound) < static_cast<std::uint64_t>(allowed_moves(tree, v)))
      break;
  }

  ZapEvent ev{s.clock, v, true};
  if (v != 0) {
    const auto r = rng.below(static_cast<std::uint64_t>(allowed_moves(tree, v)));
    if (r == 0) {
      // move towards the root; set-union coalescence
      ev.deleted = false;
      const VertexId p = tree.parent(v);
      zap_remove(s, tree, v);
      if (!s.occ[static_cast<std::size_t>(p)]) {
        s.occ[static_cast<std::size_t>(p)] = 1;
        s.pslot[static_cast<std::size_t>(p)] =
            static_cast<std::int32_t>(s.plist.size());
        s.plist.push_back(p);
        s.total_rate += allowed_moves(tree, p);
      }
      return ev;
    }
  }
  zap_remove(s, tree, v);
  return ev;
}

// ---------------------------------------------------------------------------
// Root occupation runners

namespace {

template <class State, class StepFn>
double run_root_occupation(State& s, double horizon, std::int64_t& live_rate,
                           StepFn step) {
  // live_rate is a reference to the state's aggregate rate field
  for (;;) {
    if (live_rate <= 0 || s.plist.empty()) {
      if (s.root_occupied() && s.clock < horizon)
        s.root_time += horizon - s.clock;
      break;
    }
    const bool root_before = s.root_occupied();
    step();
    if (s.clock >= horizon) {
      if (root_before) s.root_time -= s.clock - horizon;  // trim overshoot
      break;
    }
  }
  return s.root_time;
}

}  // namespace

double nb_root_occupation(RootedTree& tree, double horizon, Rng& rng) {
  NbState s = nb_init(tree, rng);
  return run_root_occupation(s, horizon, s.total_allowed,
                             [&] { nb_step(s, tree, rng); });
}

double zap_root_occupation(RootedTree& tree, double horizon, Rng& rng) {
  ZapState s = zap_init(tree);
  return run_root_occupation(s, horizon, s.total_rate,
                             [&] { zap_step(s, tree, rng); });
}

// ---------------------------------------------------------------------------
// Shared-clock stream

std::vector<TreeRing> tree_ring_stream(RootedTree& tree, double horizon, Rng& rng) {
  if (!tree.finite()) throw usage_error("tree_ring_stream: finite trees only");
  const auto n = tree.vertex_count();
  std::int64_t total = 0;
  for (VertexId v = 0; v < n; ++v) total += tree.nb_degree(v);

  std::vector<TreeRing> rings;
  double t = 0.0;
  const auto bound = static_cast<std::uint64_t>(tree.max_nb_degree());
  for (;;) {
    t += rng.exponential(static_cast<double>(total));
    if (t > horizon) break;
    VertexId u;
    for (;;) {
      u = static_cast<VertexId>(rng.below(static_cast<std::uint64_t>(n)));
      if (rng.below(bound) < static_cast<std::uint64_t>(tree.nb_degree(u))) break;
    }
    const auto e = static_cast<std::int32_t>(
        rng.below(static_cast<std::uint64_t>(tree.nb_degree(u))));
    rings.push_back({t, u, e});
  }
  return rings;
}

void nb_apply_ring(NbState& s, RootedTree& tree, const TreeRing& ring) {
  const double dt = ring.at_time - s.clock;
  if (s.root_occupied()) s.root_time += dt;
  s.clock = ring.at_time;
  const VertexId u = ring.from;
  if (!s.occ[static_cast<std::size_t>(u)]) return;
  const NbParticle& p = s.particle[static_cast<std::size_t>(u)];

  // decode the edge index: [parent (non-root), children..., stubs...]
  std::int32_t idx = ring.edge_idx;
  MoveTarget target;
  if (u != 0 && idx == 0) {
    target = {tree.parent(u), false};
  } else {
    if (u != 0) --idx;
    const auto kids = tree.children(u);
    if (idx < static_cast<std::int32_t>(kids.size())) {
      target = {kids[static_cast<std::size_t>(idx)], false};
    } else {
      const auto stub = idx - static_cast<std::int32_t>(kids.size());
      if (stub >= tree.stub_count(u))
        throw usage_error("nb_apply_ring: edge index out of range");
      if (p.forbidden_stub == stub) return;  // forbidden edge, no move
      target = {VertexId{-1}, true};
    }
  }
  if (!target.stub && p.forbidden_stub < 0 && p.forbidden == target.w)
    return;  // forbidden edge, no move
  execute_move(s, tree, u, target);
}

std::vector<std::pair<double, bool>> nb_root_path(
    NbState s, RootedTree& tree, const std::vector<TreeRing>& stream) {
  std::vector<std::pair<double, bool>> path;
  path.emplace_back(0.0, s.root_occupied());
  for (const auto& ring : stream) {
    const bool before = s.root_occupied();
    nb_apply_ring(s, tree, ring);
    if (s.root_occupied() != before)
      path.emplace_back(ring.at_time, s.root_occupied());
  }
  return path;
}

// ---------------------------------------------------------------------------
// Dual voter model with absorbing vertex

namespace {

void nb_ensure_sizes(NbClusterState& s, RootedTree& tree) {
  const auto n = static_cast<std::size_t>(tree.oracle().exposed_count());
  if (s.member_slot.size() < n) {
    s.member_slot.resize(n, -1);
    s.out_children.resize(n, 0);
    s.grow_slot.resize(n, -1);
  }
}

void grow_list_add(NbClusterState& s, VertexId v) {
  s.grow_slot[static_cast<std::size_t>(v)] =
      static_cast<std::int32_t>(s.grow_list.size());
  s.grow_list.push_back(v);
}

void grow_list_remove(NbClusterState& s, VertexId v) {
  const auto slot = s.grow_slot[static_cast<std::size_t>(v)];
  const VertexId last = s.grow_list.back();
  s.grow_list[static_cast<std::size_t>(slot)] = last;
  s.grow_slot[static_cast<std::size_t>(last)] = slot;
  s.grow_list.pop_back();
  s.grow_slot[static_cast<std::size_t>(v)] = -1;
}

std::int64_t shrink_weight(RootedTree& tree, const NbClusterState& s, VertexId w) {
  const bool parent_in = w != 0 && s.is_member(tree.parent(w));
  return (tree.dual_degree(w) - 2) + (parent_in ? 0 : 1);
}

void nb_add_member(NbClusterState& s, RootedTree& tree, VertexId u) {
  const auto kids = tree.children(u);  // exposes the frontier
  nb_ensure_sizes(s, tree);

  std::int32_t inside = 0;
  for (VertexId c : kids)
    if (s.is_member(c)) ++inside;
  const auto out = static_cast<std::int32_t>(kids.size()) - inside;

  const VertexId p = u == 0 ? -1 : tree.parent(u);
  const bool parent_in = p >= 0 && s.is_member(p);

  s.member_slot[static_cast<std::size_t>(u)] =
      static_cast<std::int32_t>(s.members.size());
  s.members.push_back(u);
  s.out_children[static_cast<std::size_t>(u)] = out;
  if (out > 0) grow_list_add(s, u);

  s.r_plus += out;
  if (parent_in) {
    if (--s.out_children[static_cast<std::size_t>(p)] == 0) grow_list_remove(s, p);
    s.r_plus -= 1;
  }
  // defection weight of u, minus the capture edges its member children lose
  s.r_minus += (tree.dual_degree(u) - 2) + (parent_in ? 0 : 1);
  s.r_minus -= inside;
}

}  // namespace

void nb_cluster_add_member(NbClusterState& s, RootedTree& tree, VertexId u) {
  if (s.is_member(u)) throw usage_error("nb_cluster_add_member: already a member");
  nb_add_member(s, tree, u);
}

namespace {

void nb_remove_member(NbClusterState& s, RootedTree& tree, VertexId w) {
  const auto out = s.out_children[static_cast<std::size_t>(w)];
  const VertexId p = w == 0 ? -1 : tree.parent(w);
  const bool parent_in = p >= 0 && s.is_member(p);

  s.r_plus -= out;
  if (parent_in) {
    if (s.out_children[static_cast<std::size_t>(p)]++ == 0) grow_list_add(s, p);
    s.r_plus += 1;
  }
  s.r_minus -= (tree.dual_degree(w) - 2) + (parent_in ? 0 : 1);
  for (VertexId c : tree.children(w))
    if (s.is_member(c)) s.r_minus += 1;  // capture edge reappears

  const auto slot = s.member_slot[static_cast<std::size_t>(w)];
  const VertexId last = s.members.back();
  s.members[static_cast<std::size_t>(slot)] = last;
  s.member_slot[static_cast<std::size_t>(last)] = slot;
  s.members.pop_back();
  s.member_slot[static_cast<std::size_t>(w)] = -1;
  if (out > 0) grow_list_remove(s, w);
  s.out_children[static_cast<std::size_t>(w)] = 0;
}

}  // namespace

void nb_cluster_remove_member(NbClusterState& s, RootedTree& tree, VertexId w) {
  if (!s.is_member(w)) throw usage_error("nb_cluster_remove_member: not a member");
  nb_remove_member(s, tree, w);
}

void nb_cluster_reset(NbClusterState& s, RootedTree& tree, VertexId v) {
  for (VertexId m : s.members) {
    s.member_slot[static_cast<std::size_t>(m)] = -1;
    s.out_children[static_cast<std::size_t>(m)] = 0;
  }
  for (VertexId gmem : s.grow_list)
    s.grow_slot[static_cast<std::size_t>(gmem)] = -1;
  s.members.clear();
  s.grow_list.clear();
  s.r_plus = s.r_minus = 0;
  s.clock = 0.0;
  s.jumps = 0;

  nb_ensure_sizes(s, tree);
  if (v < 0 || v >= static_cast<VertexId>(tree.oracle().exposed_count()))
    throw config_error("nb cluster init: vertex not exposed");
  nb_add_member(s, tree, v);
}

NbClusterState nb_cluster_init(RootedTree& tree, VertexId v) {
  if (tree.finite())
    throw config_error(
        "the dual voter model runs on lazy (untruncated) trees; "
        "use bintree, regtree:D, gw:... or halfline");
  NbClusterState s;
  nb_cluster_reset(s, tree, v);
  return s;
}

NbClusterEvent nb_cluster_step(NbClusterState& s, RootedTree& tree, Rng& rng) {
  if (s.empty()) throw usage_error("nb_cluster_step: cluster is empty");
  const auto total = s.r_plus + s.r_minus;
  s.clock += rng.exponential(static_cast<double>(total));
  ++s.jumps;
  const bool grew =
      rng.below(static_cast<std::uint64_t>(total)) <
      static_cast<std::uint64_t>(s.r_plus);

  NbClusterEvent ev{grew, -1, s.clock};
  const auto bound = static_cast<std::uint64_t>(tree.oracle().max_degree());
  if (grew) {
    VertexId w;
    for (;;) {
      w = s.grow_list[static_cast<std::size_t>(rng.below(s.grow_list.size()))];
      if (rng.below(bound) <
          static_cast<std::uint64_t>(s.out_children[static_cast<std::size_t>(w)]))
        break;
    }
    auto j = rng.below(static_cast<std::uint64_t>(
        s.out_children[static_cast<std::size_t>(w)]));
    VertexId u = -1;
    for (VertexId c : tree.children(w)) {
      if (s.is_member(c)) continue;
      if (j-- == 0) { u = c; break; }
    }
    ev.vertex = u;
    nb_add_member(s, tree, u);
  } else {
    VertexId w;
    for (;;) {
      w = s.members[static_cast<std::size_t>(rng.below(s.members.size()))];
      if (rng.below(bound) <
          static_cast<std::uint64_t>(shrink_weight(tree, s, w)))
        break;
    }
    ev.vertex = w;
    nb_remove_member(s, tree, w);
  }
  return ev;
}

std::pair<std::int64_t, std::int64_t> nb_rate_audit(const NbClusterState& s,
                                                    RootedTree& tree) {
  std::int64_t rp = 0, rm = 0;
  for (VertexId w : s.members) {
    std::int32_t inside = 0;
    for (VertexId c : tree.children(w))
      if (s.is_member(c)) ++inside;
    rp += tree.child_count(w) - inside;
    const bool parent_in = w != 0 && s.is_member(tree.parent(w));
    rm += (tree.dual_degree(w) - 2) + (parent_in ? 0 : 1);
  }
  if (rp != s.r_plus || rm != s.r_minus)
    throw invariant_error("nb_rate_audit: incremental rates disagree with recount");
  if (rp != rm)
    throw invariant_error("nb_rate_audit: r_plus != r_minus");
  return {rp, rm};
}

}  // namespace crw
