#include "crw/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace crw {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error("graph spec: expected integer for " + what + ", got '" + s + "'");
  }
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error("graph spec: expected number for " + what + ", got '" + s + "'");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// OffspringDistribution

OffspringDistribution OffspringDistribution::geometric(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw config_error("offspring geometric: p must be in (0,1)");
  return {Family::kGeometric, p, 0, 0};
}

OffspringDistribution OffspringDistribution::one_plus_poisson(double lambda) {
  if (!(lambda > 0.0))
    throw config_error("offspring one_plus_poisson: lambda must be > 0");
  return {Family::kOnePlusPoisson, lambda, 0, 0};
}

OffspringDistribution OffspringDistribution::bounded_uniform(int lo, int hi) {
  if (lo < 1) throw config_error("offspring bounded_uniform: a must be >= 1");
  if (lo > hi) throw config_error("offspring bounded_uniform: a > b");
  return {Family::kBoundedUniform, 0.0, lo, hi};
}

namespace {

// Poisson by inversion for small means; split recursively above that so the
// sequential search stays short. Exact and implementation-independent.
std::int64_t poisson_sample(double lambda, Rng& rng) {
  if (lambda > 30.0) {
    return poisson_sample(lambda / 2.0, rng) + poisson_sample(lambda / 2.0, rng);
  }
  const double u = rng.uniform();
  double p = std::exp(-lambda);
  double cdf = p;
  std::int64_t k = 0;
  while (u >= cdf && k < 400) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

}  // namespace

std::int32_t OffspringDistribution::sample(Rng& rng) const {
  switch (family_) {
    case Family::kGeometric: {
      // P(X > k) = (1-p)^k on support {1,2,...}
      const double u = rng.uniform();
      const double g = std::floor(std::log1p(-u) / std::log1p(-param_));
      return 1 + static_cast<std::int32_t>(std::min(g, 1e9));
    }
    case Family::kOnePlusPoisson:
      return 1 + static_cast<std::int32_t>(poisson_sample(param_, rng));
    case Family::kBoundedUniform:
      return lo_ + static_cast<std::int32_t>(rng.below(
                       static_cast<std::uint64_t>(hi_ - lo_ + 1)));
  }
  throw invariant_error("offspring distribution: bad family");
}

std::string OffspringDistribution::to_string() const {
  std::ostringstream os;
  switch (family_) {
    case Family::kGeometric: os << "geom:" << param_; break;
    case Family::kOnePlusPoisson: os << "pois:" << param_; break;
    case Family::kBoundedUniform: os << "unif:" << lo_ << ":" << hi_; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// GraphSpec

GraphSpec GraphSpec::parse(const std::string& s) {
  const auto parts = split(s, ':');
  GraphSpec spec;
  spec.text = s;
  const std::string& kind = parts[0];
  const std::size_t nargs = parts.size() - 1;

  auto need = [&](std::size_t k) {
    if (nargs != k)
      throw config_error("graph spec '" + s + "': wrong number of parameters");
  };

  if (kind == "path") {
    need(1);
    spec.kind = Kind::kPath;
    spec.n = parse_int(parts[1], "path size");
    if (spec.n < 2) throw config_error("graph spec: path needs n >= 2");
  } else if (kind == "cycle") {
    need(1);
    spec.kind = Kind::kCycle;
    spec.n = parse_int(parts[1], "cycle size");
    if (spec.n < 3) throw config_error("graph spec: cycle needs n >= 3");
  } else if (kind == "complete") {
    need(1);
    spec.kind = Kind::kComplete;
    spec.n = parse_int(parts[1], "complete size");
    if (spec.n < 2) throw config_error("graph spec: complete needs n >= 2");
  } else if (kind == "star") {
    need(1);
    spec.kind = Kind::kStar;
    spec.n = parse_int(parts[1], "star leaf count");
    if (spec.n < 1) throw config_error("graph spec: star needs >= 1 leaf");
  } else if (kind == "torus") {
    need(2);
    spec.kind = Kind::kTorus;
    spec.dim = parse_int(parts[1], "torus dimension");
    spec.side = parse_int(parts[2], "torus side");
    if (spec.dim < 1 || spec.side < 3)
      throw config_error("graph spec: torus needs dim >= 1 and side >= 3");
    double count = 1;
    for (int i = 0; i < spec.dim; ++i) count *= spec.side;
    if (count > 4e6) throw config_error("graph spec: torus too large");
  } else if (kind == "line") {
    need(1);
    spec.kind = Kind::kLineWindow;
    spec.radius = parse_int(parts[1], "line window radius");
    if (spec.radius < 1) throw config_error("graph spec: line needs radius >= 1");
  } else if (kind == "z") {
    need(0);
    spec.kind = Kind::kLazyLine;
  } else if (kind == "halfline") {
    need(0);
    spec.kind = Kind::kHalfLine;
  } else if (kind == "regtree") {
    if (nargs == 1) {
      spec.kind = Kind::kRegTree;
      spec.degree = parse_int(parts[1], "regular tree degree");
    } else {
      need(2);
      spec.kind = Kind::kRegTreeWindow;
      spec.degree = parse_int(parts[1], "regular tree degree");
      spec.radius = parse_int(parts[2], "window radius");
      if (spec.radius < 1)
        throw config_error("graph spec: regtree window needs radius >= 1");
    }
    if (spec.degree < 2)
      throw config_error("graph spec: regtree needs degree >= 2");
  } else if (kind == "bintree") {
    if (nargs == 0) {
      spec.kind = Kind::kBinTree;
    } else {
      need(1);
      spec.kind = Kind::kBinTreeDepth;
      spec.depth = parse_int(parts[1], "binary tree depth");
      if (spec.depth < 1)
        throw config_error("graph spec: bintree needs depth >= 1");
    }
  } else if (kind == "gw") {
    if (nargs < 2) throw config_error("graph spec: gw needs a family and parameters");
    spec.kind = Kind::kGwTree;
    const std::string& fam = parts[1];
    if (fam == "geom") {
      need(2);
      spec.offspring = OffspringDistribution::geometric(parse_double(parts[2], "geometric p"));
    } else if (fam == "pois") {
      need(2);
      spec.offspring = OffspringDistribution::one_plus_poisson(parse_double(parts[2], "poisson lambda"));
    } else if (fam == "unif") {
      need(3);
      spec.offspring = OffspringDistribution::bounded_uniform(
          parse_int(parts[2], "uniform lower"), parse_int(parts[3], "uniform upper"));
    } else {
      throw config_error("graph spec: unknown offspring family '" + fam +
                         "' (use geom, pois or unif)");
    }
  } else {
    throw config_error(
        "graph spec: unknown kind '" + kind +
        "' (kinds: path cycle complete star torus line z halfline regtree "
        "bintree gw)");
  }
  return spec;
}

bool GraphSpec::finite() const {
  switch (kind) {
    case Kind::kPath: case Kind::kCycle: case Kind::kComplete:
    case Kind::kStar: case Kind::kTorus: case Kind::kLineWindow:
    case Kind::kRegTreeWindow: case Kind::kBinTreeDepth: case Kind::kEdgeList:
      return true;
    default:
      return false;
  }
}

bool GraphSpec::tree() const {
  switch (kind) {
    case Kind::kPath: case Kind::kStar: case Kind::kLineWindow:
    case Kind::kLazyLine: case Kind::kHalfLine: case Kind::kRegTree:
    case Kind::kRegTreeWindow: case Kind::kBinTree: case Kind::kBinTreeDepth:
    case Kind::kGwTree:
      return true;
    default:
      return false;
  }
}

// ---------------------------------------------------------------------------
// GraphOracle

GraphOracle GraphOracle::make(const GraphSpec& spec, std::uint64_t tree_seed) {
  GraphOracle g;
  g.spec_ = spec;
  g.tree_seed_ = tree_seed;
  if (spec.finite()) {
    g.finite_ = true;
    g.build_finite(spec);
  } else {
    g.finite_ = false;
    g.expose_root();
  }
  return g;
}

GraphOracle GraphOracle::from_edge_list(
    VertexId n, const std::vector<std::pair<VertexId, VertexId>>& edges) {
  if (n < 2) throw config_error("edge list graph needs n >= 2");
  std::vector<std::vector<VertexId>> adj(static_cast<std::size_t>(n));
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n || u == v)
      throw config_error("edge list: invalid edge");
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  GraphOracle g;
  g.spec_.kind = GraphSpec::Kind::kEdgeList;
  g.spec_.n = n;
  g.spec_.text = "edges:" + std::to_string(n);
  g.finite_ = true;
  g.build_from_adjacency(std::move(adj));
  return g;
}

void GraphOracle::build_from_adjacency(std::vector<std::vector<VertexId>> adj) {
  const std::size_t n = adj.size();
  offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (adj[v].empty())
      throw config_error("graph has an isolated vertex (degree 0)");
    offsets_[v + 1] = offsets_[v] + static_cast<std::int64_t>(adj[v].size());
  }
  csr_.resize(static_cast<std::size_t>(offsets_[n]));
  for (std::size_t v = 0; v < n; ++v) {
    std::copy(adj[v].begin(), adj[v].end(), csr_.begin() + offsets_[v]);
    max_degree_ = std::max<std::int32_t>(max_degree_,
                                         static_cast<std::int32_t>(adj[v].size()));
  }
}

void GraphOracle::build_finite(const GraphSpec& spec) {
  using Kind = GraphSpec::Kind;
  std::vector<std::vector<VertexId>> adj;
  auto link = [&](VertexId a, VertexId b) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  };

  switch (spec.kind) {
    case Kind::kPath: {
      adj.resize(static_cast<std::size_t>(spec.n));
      for (VertexId i = 0; i + 1 < spec.n; ++i) link(i, i + 1);
      break;
    }
    case Kind::kCycle: {
      adj.resize(static_cast<std::size_t>(spec.n));
      for (VertexId i = 0; i < spec.n; ++i) link(i, (i + 1) % spec.n);
      break;
    }
    case Kind::kComplete: {
      adj.resize(static_cast<std::size_t>(spec.n));
      for (VertexId i = 0; i < spec.n; ++i)
        for (VertexId j = i + 1; j < spec.n; ++j) link(i, j);
      break;
    }
    case Kind::kStar: {
      adj.resize(static_cast<std::size_t>(spec.n) + 1);
      for (VertexId i = 1; i <= spec.n; ++i) link(0, i);
      break;
    }
    case Kind::kTorus: {
      std::int64_t n = 1;
      for (int i = 0; i < spec.dim; ++i) n *= spec.side;
      adj.resize(static_cast<std::size_t>(n));
      std::vector<std::int64_t> stride(static_cast<std::size_t>(spec.dim), 1);
      for (int i = 1; i < spec.dim; ++i) stride[i] = stride[i - 1] * spec.side;
      for (std::int64_t v = 0; v < n; ++v) {
        for (int i = 0; i < spec.dim; ++i) {
          const auto c = (v / stride[i]) % spec.side;
          const auto up = v + ((c + 1) % spec.side - c) * stride[i];
          adj[static_cast<std::size_t>(v)].push_back(static_cast<VertexId>(up));
          const auto dn = v + ((c + spec.side - 1) % spec.side - c) * stride[i];
          adj[static_cast<std::size_t>(v)].push_back(static_cast<VertexId>(dn));
        }
      }
      break;
    }
    case Kind::kLineWindow: {
      // coord 0 gets id 0, then +1,-1,+2,-2,... so id 0 is the window center
      const int R = spec.radius;
      auto id_of = [&](int x) -> VertexId {
        return x == 0 ? 0 : (x > 0 ? 2 * x - 1 : -2 * x);
      };
      adj.resize(static_cast<std::size_t>(2 * R + 1));
      for (int x = -R; x < R; ++x) link(id_of(x), id_of(x + 1));
      break;
    }
    case Kind::kRegTreeWindow: {
      // breadth-first ids: root 0, then level by level out to the radius
      adj.emplace_back();
      std::deque<std::pair<VertexId, int>> frontier{{0, 0}};
      while (!frontier.empty()) {
        auto [v, dist] = frontier.front();
        frontier.pop_front();
        if (dist == spec.radius) continue;
        const int kids = (v == 0) ? spec.degree : spec.degree - 1;
        for (int j = 0; j < kids; ++j) {
          const auto c = static_cast<VertexId>(adj.size());
          adj.emplace_back();
          link(v, c);
          frontier.emplace_back(c, dist + 1);
        }
      }
      break;
    }
    case Kind::kBinTreeDepth: {
      adj.emplace_back();
      std::deque<std::pair<VertexId, int>> frontier{{0, 0}};
      while (!frontier.empty()) {
        auto [v, dist] = frontier.front();
        frontier.pop_front();
        if (dist == spec.depth) continue;
        for (int j = 0; j < 2; ++j) {
          const auto c = static_cast<VertexId>(adj.size());
          adj.emplace_back();
          link(v, c);
          frontier.emplace_back(c, dist + 1);
        }
      }
      break;
    }
    default:
      throw invariant_error("build_finite called for a lazy kind");
  }
  build_from_adjacency(std::move(adj));
}

std::int64_t GraphOracle::vertex_count() const {
  if (!finite_) throw usage_error("vertex_count: graph is not finite");
  return static_cast<std::int64_t>(offsets_.size()) - 1;
}

std::int32_t GraphOracle::degree(VertexId v) const {
  if (finite_) {
    if (v < 0 || v + 1 >= static_cast<VertexId>(offsets_.size()))
      throw usage_error("degree: vertex id out of range");
    return static_cast<std::int32_t>(offsets_[v + 1] - offsets_[v]);
  }
  if (v < 0 || v >= static_cast<VertexId>(lazy_.size()))
    throw usage_error("degree: vertex not exposed");
  return lazy_[static_cast<std::size_t>(v)].children + (v == 0 ? 0 : 1);
}

std::int32_t GraphOracle::child_count(std::uint64_t key, bool is_root) const {
  using Kind = GraphSpec::Kind;
  switch (spec_.kind) {
    case Kind::kLazyLine: return is_root ? 2 : 1;
    case Kind::kHalfLine: return 1;
    case Kind::kRegTree: return is_root ? spec_.degree : spec_.degree - 1;
    case Kind::kBinTree: return 2;
    case Kind::kGwTree: {
      Rng r(key);
      return spec_.offspring.sample(r);
    }
    default:
      throw invariant_error("child_count on a finite kind");
  }
}

void GraphOracle::expose_root() {
  std::uint64_t s = tree_seed_;
  const std::uint64_t root_key = splitmix64(s);
  LazyVertex root;
  root.key = root_key;
  root.parent = -1;
  root.children = child_count(root_key, /*is_root=*/true);
  lazy_.push_back(root);
  if (adj_.empty()) adj_.emplace_back(); else adj_[0].clear();
  max_degree_ = root.children;  // root degree equals its child count
}

void GraphOracle::expand(VertexId v) {
  const LazyVertex lv = lazy_[static_cast<std::size_t>(v)];
  const auto first_child = static_cast<VertexId>(lazy_.size());
  for (std::int32_t j = 0; j < lv.children; ++j) {
    LazyVertex child;
    child.key = mix64(lv.key, static_cast<std::uint64_t>(j) + 1);
    child.parent = v;
    child.children = child_count(child.key, /*is_root=*/false);
    lazy_.push_back(child);
    const std::size_t c = lazy_.size() - 1;
    if (adj_.size() <= c) adj_.emplace_back();
    else adj_[c].clear();
    max_degree_ = std::max(max_degree_, child.children + 1);
  }
  // adj_ growth above may reallocate, so take the reference only now
  auto& nbrs = adj_[static_cast<std::size_t>(v)];
  nbrs.reserve(static_cast<std::size_t>(lv.children) + (v == 0 ? 0 : 1));
  if (v != 0) nbrs.push_back(lv.parent);
  for (std::int32_t j = 0; j < lv.children; ++j)
    nbrs.push_back(first_child + j);
  lazy_[static_cast<std::size_t>(v)].expanded = true;
}

std::span<const VertexId> GraphOracle::neighbors(VertexId v) {
  if (finite_) {
    if (v < 0 || v + 1 >= static_cast<VertexId>(offsets_.size()))
      throw usage_error("neighbors: vertex id out of range");
    return {csr_.data() + offsets_[v],
            static_cast<std::size_t>(offsets_[v + 1] - offsets_[v])};
  }
  if (v < 0 || v >= static_cast<VertexId>(lazy_.size()))
    throw usage_error("neighbors: vertex not exposed");
  if (!lazy_[static_cast<std::size_t>(v)].expanded) expand(v);
  const auto& nbrs = adj_[static_cast<std::size_t>(v)];
  return {nbrs.data(), nbrs.size()};
}

ExposureStats GraphOracle::exposure_stats() const {
  const auto k = exposed_count();
  if (k == 0) throw usage_error("exposure_stats: nothing exposed");
  return {k, max_degree_};
}

VertexId GraphOracle::exposure_parent(VertexId v) const {
  if (finite_) throw usage_error("exposure_parent: finite kinds expose all at once");
  if (v < 0 || v >= static_cast<VertexId>(lazy_.size()))
    throw usage_error("exposure_parent: vertex not exposed");
  return lazy_[static_cast<std::size_t>(v)].parent;
}

void GraphOracle::reset() {
  if (finite_) return;
  lazy_.clear();  // adjacency buffers stay allocated; slots cleared on reuse
  max_degree_ = 0;
  expose_root();
}

void GraphOracle::reseed(std::uint64_t tree_seed) {
  if (finite_) throw usage_error("reseed: lazy kinds only");
  tree_seed_ = tree_seed;
  reset();
}

}  // namespace crw
