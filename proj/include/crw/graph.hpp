#ifndef CRW_GRAPH_HPP
#define CRW_GRAPH_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crw/rng.hpp"

namespace crw {

/// Invalid user-supplied configuration (graph spec, grid, replicate counts).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// API misuse (precondition broken by calling code).
struct usage_error : std::logic_error {
  using std::logic_error::logic_error;
};

/// Internal bookkeeping violation; indicates a bug, never bad input.
struct invariant_error : std::logic_error {
  using std::logic_error::logic_error;
};

/// Dense vertex ids assigned in order of first exposure; id 0 is the
/// distinguished vertex (root for rooted kinds).
using VertexId = std::int32_t;

struct ExposureStats {
  std::int64_t exposed = 0;   // k, number of exposed vertices
  std::int32_t max_degree = 0;  // D_k, running max degree among them
};

/// Offspring law for Galton-Watson trees; support is {1, 2, ...}.
class OffspringDistribution {
 public:
  enum class Family { kGeometric, kOnePlusPoisson, kBoundedUniform };

  static OffspringDistribution geometric(double p);
  static OffspringDistribution one_plus_poisson(double lambda);
  static OffspringDistribution bounded_uniform(int lo, int hi);

  std::int32_t sample(Rng& rng) const;
  Family family() const { return family_; }
  double param() const { return param_; }
  int lo() const { return lo_; }
  int hi() const { return hi_; }
  std::string to_string() const;

 private:
  OffspringDistribution(Family f, double param, int lo, int hi)
      : family_(f), param_(param), lo_(lo), hi_(hi) {}
  Family family_;
  double param_;
  int lo_, hi_;
};

/// Parsed graph description. Config-string grammar (kind:param:...):
///   path:N cycle:N complete:N star:K torus:D:L line:R
///   z halfline regtree:D regtree:D:R bintree bintree:L
///   gw:geom:P gw:pois:LAMBDA gw:unif:A:B
struct GraphSpec {
  enum class Kind {
    kPath, kCycle, kComplete, kStar, kTorus, kLineWindow,
    kLazyLine, kHalfLine, kRegTree, kRegTreeWindow, kBinTree,
    kBinTreeDepth, kGwTree, kEdgeList
  };

  Kind kind = Kind::kPath;
  int n = 0;       // vertex count (path/cycle/complete) or leaf count (star)
  int dim = 0;     // torus dimension
  int side = 0;    // torus side length
  int radius = 0;  // window radius (line/regtree windows)
  int degree = 0;  // regular-tree degree
  int depth = 0;   // binary-tree truncation depth
  OffspringDistribution offspring = OffspringDistribution::geometric(0.5);
  std::string text;  // normalized spec string

  static GraphSpec parse(const std::string& s);
  bool finite() const;
  bool tree() const;  // acyclic and rooted at id 0
};

/// Adjacency oracle over finite and lazily generated infinite graphs.
///
/// Finite kinds are fully materialized at construction (construction order
/// is the exposure order). Lazy kinds expose vertices on demand: a vertex's
/// child count is sampled exactly once at first exposure, from a key that is
/// a pure function of (tree seed, position in the tree), so answers are
/// reproducible and independent of the query order.
class GraphOracle {
 public:
  static GraphOracle make(const GraphSpec& spec, std::uint64_t tree_seed = 0);
  static GraphOracle from_edge_list(
      VertexId n, const std::vector<std::pair<VertexId, VertexId>>& edges);

  bool finite() const { return finite_; }

  /// Total vertex count; finite graphs only.
  std::int64_t vertex_count() const;

  std::int64_t exposed_count() const {
    return finite_ ? static_cast<std::int64_t>(offsets_.size()) - 1
                   : static_cast<std::int64_t>(lazy_.size());
  }

  /// Degree of an exposed vertex (for lazy trees this is known at exposure,
  /// before the neighbor list is materialized).
  std::int32_t degree(VertexId v) const;

  /// Neighbor list of v; materializes and exposes unseen neighbors.
  std::span<const VertexId> neighbors(VertexId v);

  /// (k, D_k) over the exposure log.
  ExposureStats exposure_stats() const;

  /// D_k only; cheap accessor for rejection sampling bounds.
  std::int32_t max_degree() const { return max_degree_; }

  /// Vertex from which v was first exposed (-1 for the root); lazy kinds.
  VertexId exposure_parent(VertexId v) const;

  /// Drop all exposure beyond the root so the next replicate starts fresh.
  /// Keeps the tree seed: with a fixed seed the same tree is re-exposed.
  void reset();

  /// Reset with a new tree seed (fresh tree per replicate; lazy kinds only).
  void reseed(std::uint64_t tree_seed);

  const GraphSpec& spec() const { return spec_; }
  std::uint64_t tree_seed() const { return tree_seed_; }

 private:
  GraphOracle() = default;

  void build_finite(const GraphSpec& spec);
  void build_from_adjacency(std::vector<std::vector<VertexId>> adj);
  void expose_root();
  std::int32_t child_count(std::uint64_t key, bool is_root) const;
  void expand(VertexId v);

  GraphSpec spec_;
  bool finite_ = true;
  std::uint64_t tree_seed_ = 0;
  std::int32_t max_degree_ = 0;

  // finite storage (CSR)
  std::vector<std::int64_t> offsets_;
  std::vector<VertexId> csr_;

  // lazy storage
  struct LazyVertex {
    std::uint64_t key = 0;
    VertexId parent = -1;
    std::int32_t children = 0;
    bool expanded = false;
  };
  std::vector<LazyVertex> lazy_;
  std::vector<std::vector<VertexId>> adj_;
};

}  // namespace crw

#endif  // CRW_GRAPH_HPP
