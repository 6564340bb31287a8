#include "crw/rooted_tree.hpp"

#include <algorithm>
#include <deque>

namespace crw {

namespace {

int continuation_children(const GraphSpec& spec, LeafPolicy policy) {
  if (policy == LeafPolicy::kStrict) return 0;
  using Kind = GraphSpec::Kind;
  switch (spec.kind) {
    case Kind::kBinTreeDepth: return 2;
    case Kind::kRegTreeWindow: return spec.degree - 1;
    case Kind::kPath: return 1;        // half-line window rooted at an end
    case Kind::kLineWindow: return 1;  // line window rooted at the center
    default:
      throw config_error(
          "leaf policy 'extend' is only defined for finite tree windows "
          "(bintree:L, regtree:D:R, path:N, line:R)");
  }
}

}  // namespace

RootedTree::RootedTree(GraphOracle oracle, LeafPolicy policy)
    : oracle_(std::move(oracle)), policy_(policy) {
  if (!oracle_.spec().tree() && oracle_.spec().kind != GraphSpec::Kind::kEdgeList)
    throw config_error("rooted-tree models need a tree graph, got '" +
                       oracle_.spec().text + "'");
  if (!oracle_.finite()) {
    if (policy_ == LeafPolicy::kExtend)
      throw config_error("leaf policy 'extend' applies to finite windows only");
    return;
  }
  continuation_ = continuation_children(oracle_.spec(), policy_);

  // Orient the tree away from id 0 by breadth-first search.
  const auto n = static_cast<std::size_t>(oracle_.vertex_count());
  parent_.assign(n, -2);
  std::vector<std::vector<VertexId>> kids(n);
  std::deque<VertexId> queue{0};
  parent_[0] = -1;
  std::size_t seen = 1;
  std::int64_t edges = 0;
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    for (VertexId w : oracle_.neighbors(v)) {
      ++edges;
      if (parent_[static_cast<std::size_t>(w)] != -2) continue;
      parent_[static_cast<std::size_t>(w)] = v;
      kids[static_cast<std::size_t>(v)].push_back(w);
      queue.push_back(w);
      ++seen;
    }
  }
  if (seen != n || edges != 2 * static_cast<std::int64_t>(n - 1))
    throw config_error("rooted-tree models need a connected acyclic graph");

  child_offset_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v)
    child_offset_[v + 1] = child_offset_[v] + static_cast<std::int32_t>(kids[v].size());
  child_list_.resize(static_cast<std::size_t>(child_offset_[n]));
  for (std::size_t v = 0; v < n; ++v)
    std::copy(kids[v].begin(), kids[v].end(),
              child_list_.begin() + child_offset_[v]);
}

VertexId RootedTree::parent(VertexId v) const {
  if (finite()) {
    if (v < 0 || v >= static_cast<VertexId>(parent_.size()))
      throw usage_error("parent: vertex id out of range");
    return parent_[static_cast<std::size_t>(v)];
  }
  return oracle_.exposure_parent(v);
}

std::span<const VertexId> RootedTree::children(VertexId v) {
  if (finite()) {
    if (v < 0 || v >= static_cast<VertexId>(parent_.size()))
      throw usage_error("children: vertex id out of range");
    return {child_list_.data() + child_offset_[static_cast<std::size_t>(v)],
            static_cast<std::size_t>(child_offset_[static_cast<std::size_t>(v) + 1] -
                                     child_offset_[static_cast<std::size_t>(v)])};
  }
  // lazy layout: parent first (non-root), then children
  const auto nbrs = oracle_.neighbors(v);
  return v == 0 ? nbrs : nbrs.subspan(1);
}

std::int32_t RootedTree::child_count(VertexId v) const {
  if (finite()) {
    if (v < 0 || v >= static_cast<VertexId>(parent_.size()))
      throw usage_error("child_count: vertex id out of range");
    return child_offset_[static_cast<std::size_t>(v) + 1] -
           child_offset_[static_cast<std::size_t>(v)];
  }
  return oracle_.degree(v) - (v == 0 ? 0 : 1);
}

std::int32_t RootedTree::stub_count(VertexId v) const {
  if (continuation_ == 0) return 0;
  const auto real = child_count(v);
  return real == 0 && v != 0 ? continuation_ : 0;
}

std::int32_t RootedTree::max_nb_degree() const {
  std::int32_t m = oracle_.max_degree();
  if (continuation_ > 0) m = std::max(m, continuation_ + 1);
  return m;
}

void RootedTree::reset() { oracle_.reset(); }

}  // namespace crw
