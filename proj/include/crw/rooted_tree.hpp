#ifndef CRW_ROOTED_TREE_HPP
#define CRW_ROOTED_TREE_HPP

#include <span>
#include <vector>

#include "crw/graph.hpp"

namespace crw {

/// How truncation leaves of a finite tree window behave in the
/// non-backtracking models.
enum class LeafPolicy {
  kStrict,  // leaves keep their true degree (degree-1 leaves reject nb init)
  kExtend,  // leaves carry phantom child stubs continuing the infinite tree;
            // moving onto a stub takes the particle below the window for good
};

/// Parent/children view over a tree-shaped GraphOracle rooted at id 0.
///
/// Finite trees are oriented by breadth-first search at construction; lazy
/// trees use the oracle's exposure parents. Two degree conventions coexist:
/// nb_degree counts real edges plus stubs (the particle models), while
/// dual_degree counts children plus one parent edge, the root's parent being
/// the absorbing vertex of the dual.
class RootedTree {
 public:
  explicit RootedTree(GraphOracle oracle, LeafPolicy policy = LeafPolicy::kStrict);

  GraphOracle& oracle() { return oracle_; }
  const GraphOracle& oracle() const { return oracle_; }
  bool finite() const { return oracle_.finite(); }
  std::int64_t vertex_count() const { return oracle_.vertex_count(); }
  LeafPolicy leaf_policy() const { return policy_; }

  VertexId parent(VertexId v) const;            // -1 for the root
  std::span<const VertexId> children(VertexId v);  // exposes lazily
  std::int32_t child_count(VertexId v) const;      // real children only
  std::int32_t stub_count(VertexId v) const;       // phantom continuation edges

  /// Degree for the particle models: parent edge + children + stubs.
  std::int32_t nb_degree(VertexId v) const {
    return child_count(v) + stub_count(v) + (v == 0 ? 0 : 1);
  }

  /// Degree for the dual voter model: children + parent, where the root's
  /// parent is the absorbing vertex.
  std::int32_t dual_degree(VertexId v) const { return child_count(v) + 1; }

  /// Upper bound on nb_degree over currently exposed vertices.
  std::int32_t max_nb_degree() const;

  /// Re-expose lazy kinds from the root (fresh replicate, same tree seed).
  void reset();

 private:
  GraphOracle oracle_;
  LeafPolicy policy_;
  int continuation_ = 0;  // child count the infinite tree would continue with
  // finite orientation
  std::vector<VertexId> parent_;
  std::vector<std::int32_t> child_offset_;
  std::vector<VertexId> child_list_;
};

}  // namespace crw

#endif  // CRW_ROOTED_TREE_HPP
