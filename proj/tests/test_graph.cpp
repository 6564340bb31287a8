#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <vector>

#include "crw/graph.hpp"
#include "crw/rng.hpp"

using namespace crw;

namespace {

// breadth-first exposure of a lazy tree until k vertices are exposed
void expose_bfs(GraphOracle& g, std::int64_t k) {
  std::deque<VertexId> queue{0};
  while (!queue.empty() && g.exposed_count() < k) {
    const VertexId v = queue.front();
    queue.pop_front();
    for (VertexId w : g.neighbors(v)) queue.push_back(w);
  }
}

std::vector<std::int32_t> degree_sequence(GraphOracle& g) {
  std::vector<std::int32_t> degs;
  for (VertexId v = 0; v < g.exposed_count(); ++v) degs.push_back(g.degree(v));
  return degs;
}

}  // namespace

TEST_CASE("spec parsing accepts the documented grammar") {
  CHECK(GraphSpec::parse("cycle:8").kind == GraphSpec::Kind::kCycle);
  CHECK(GraphSpec::parse("torus:2:21").side == 21);
  CHECK(GraphSpec::parse("gw:geom:0.5").kind == GraphSpec::Kind::kGwTree);
  CHECK(GraphSpec::parse("regtree:3").kind == GraphSpec::Kind::kRegTree);
  CHECK(GraphSpec::parse("regtree:3:12").radius == 12);
  CHECK(GraphSpec::parse("bintree:6").depth == 6);
  CHECK(GraphSpec::parse("z").finite() == false);
  CHECK(GraphSpec::parse("line:3").finite() == true);

  CHECK_THROWS_AS(GraphSpec::parse("path:1"), config_error);
  CHECK_THROWS_AS(GraphSpec::parse("cycle:2"), config_error);
  CHECK_THROWS_AS(GraphSpec::parse("gw:geom:1.5"), config_error);
  CHECK_THROWS_AS(GraphSpec::parse("gw:geom:0"), config_error);
  CHECK_THROWS_AS(GraphSpec::parse("gw:pois:0"), config_error);
  CHECK_THROWS_AS(GraphSpec::parse("regtree:1"), config_error);
  CHECK_THROWS_AS(GraphSpec::parse("gw:unif:3:2"), config_error);
  CHECK_THROWS_AS(GraphSpec::parse("nonsense:4"), config_error);
  CHECK_THROWS_AS(GraphSpec::parse("torus:2"), config_error);
}

TEST_CASE("cycle vertices all have degree 2") {
  auto g = GraphOracle::make(GraphSpec::parse("cycle:6"));
  for (VertexId v = 0; v < 6; ++v) CHECK(g.degree(v) == 2);
  CHECK(g.exposure_stats().max_degree == 2);
}

TEST_CASE("regular tree convention: every vertex degree d, root included") {
  auto g = GraphOracle::make(GraphSpec::parse("regtree:3"), 11);
  CHECK(g.degree(0) == 3);
  const auto nbrs = g.neighbors(0);
  REQUIRE(nbrs.size() == 3);
  for (VertexId c : nbrs) CHECK(g.degree(c) == 3);
}

TEST_CASE("galton-watson root degree is its offspring count") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 99ull}) {
    auto g = GraphOracle::make(GraphSpec::parse("gw:geom:0.5"), seed);
    const auto kids = g.neighbors(0);
    CHECK(g.degree(0) == static_cast<std::int32_t>(kids.size()));
    CHECK(g.degree(0) >= 1);
    for (VertexId c : kids) CHECK(g.degree(c) >= 2);  // offspring + parent
  }
}

TEST_CASE("same tree seed reproduces the same exposed tree") {
  auto a = GraphOracle::make(GraphSpec::parse("gw:geom:0.5"), 7);
  auto b = GraphOracle::make(GraphSpec::parse("gw:geom:0.5"), 7);
  expose_bfs(a, 200);
  expose_bfs(b, 200);
  CHECK(degree_sequence(a) == degree_sequence(b));

  // reset keeps the seed, so re-exposure reproduces the tree again
  a.reset();
  CHECK(a.exposed_count() == 1);
  expose_bfs(a, 200);
  CHECK(degree_sequence(a) == degree_sequence(b));
}

TEST_CASE("different exposure orders agree on the common exposed ball") {
  auto a = GraphOracle::make(GraphSpec::parse("gw:geom:0.4"), 31);
  auto b = GraphOracle::make(GraphSpec::parse("gw:geom:0.4"), 31);

  // a: breadth-first over two levels
  std::vector<VertexId> level1(a.neighbors(0).begin(), a.neighbors(0).end());
  for (VertexId c : level1) a.neighbors(c);

  // b: depth-first, children expanded in reverse order
  std::vector<VertexId> level1b(b.neighbors(0).begin(), b.neighbors(0).end());
  for (auto it = level1b.rbegin(); it != level1b.rend(); ++it) b.neighbors(*it);

  auto da = degree_sequence(a);
  auto db = degree_sequence(b);
  std::sort(da.begin(), da.end());
  std::sort(db.begin(), db.end());
  CHECK(da == db);
}

TEST_CASE("line window adjacency and ids") {
  auto g = GraphOracle::make(GraphSpec::parse("line:3"));
  CHECK(g.vertex_count() == 7);
  const auto nbrs = g.neighbors(0);
  REQUIRE(nbrs.size() == 2);  // center has the two ids of coordinates -1, +1
  for (VertexId w : nbrs) CHECK(g.degree(w) == 2);
  // exactly two window-boundary vertices of degree 1
  int leaves = 0;
  for (VertexId v = 0; v < 7; ++v)
    if (g.degree(v) == 1) ++leaves;
  CHECK(leaves == 2);
}

TEST_CASE("edge list oracle answers adjacency") {
  auto g = GraphOracle::from_edge_list(3, {{0, 1}, {1, 2}});
  const auto nbrs = g.neighbors(1);
  std::vector<VertexId> got(nbrs.begin(), nbrs.end());
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<VertexId>{0, 2});
  CHECK(g.degree(0) == 1);
  CHECK_THROWS_AS(GraphOracle::from_edge_list(3, {{0, 1}}), config_error);  // isolated
}

TEST_CASE("star and torus shapes") {
  auto s = GraphOracle::make(GraphSpec::parse("star:4"));
  CHECK(s.vertex_count() == 5);
  CHECK(s.degree(0) == 4);
  for (VertexId v = 1; v <= 4; ++v) CHECK(s.degree(v) == 1);

  auto t = GraphOracle::make(GraphSpec::parse("torus:2:3"));
  CHECK(t.vertex_count() == 9);
  for (VertexId v = 0; v < 9; ++v) CHECK(t.degree(v) == 4);
}

TEST_CASE("binary tree window and regular tree window sizes") {
  auto b = GraphOracle::make(GraphSpec::parse("bintree:2"));
  CHECK(b.vertex_count() == 7);
  CHECK(b.degree(0) == 2);

  auto r = GraphOracle::make(GraphSpec::parse("regtree:3:12"));
  CHECK(r.vertex_count() == 12286);
  CHECK(r.degree(0) == 3);
}

TEST_CASE("half line and lazy line degrees") {
  auto h = GraphOracle::make(GraphSpec::parse("halfline"), 5);
  CHECK(h.degree(0) == 1);
  auto z = GraphOracle::make(GraphSpec::parse("z"), 5);
  CHECK(z.degree(0) == 2);
  for (VertexId w : z.neighbors(0)) CHECK(z.degree(w) == 2);
}

TEST_CASE("finite kinds have symmetric adjacency") {
  for (const char* spec : {"path:5", "cycle:7", "complete:4", "star:4",
                           "torus:2:4", "line:3", "regtree:3:3", "bintree:3"}) {
    auto g = GraphOracle::make(GraphSpec::parse(spec));
    for (VertexId u = 0; u < g.vertex_count(); ++u) {
      for (VertexId w : g.neighbors(u)) {
        const auto back = g.neighbors(w);
        CHECK(std::count(back.begin(), back.end(), u) == 1);
      }
    }
  }
}

TEST_CASE("querying a never-exposed vertex is a usage error") {
  auto g = GraphOracle::make(GraphSpec::parse("gw:geom:0.5"), 3);
  CHECK_THROWS_AS(g.neighbors(57), usage_error);
  CHECK_THROWS_AS(g.degree(-1), usage_error);
}

TEST_CASE("exposure stats track the running max degree") {
  auto g = GraphOracle::make(GraphSpec::parse("gw:geom:0.5"), 17);
  expose_bfs(g, 50);
  const auto stats = g.exposure_stats();
  CHECK(stats.exposed == g.exposed_count());
  std::int32_t expect = 0;
  for (VertexId v = 0; v < g.exposed_count(); ++v)
    expect = std::max(expect, g.degree(v));
  CHECK(stats.max_degree == expect);
}

TEST_CASE("geometric offspring tail matches its exponential envelope") {
  // P(X > x) = (1-p)^x exactly; empirical tail below e^{-cx} + 3 SE
  const auto dist = OffspringDistribution::geometric(0.5);
  Rng rng(2024);
  const int n = 100000;
  const double c = -std::log(0.5);
  std::map<int, int> exceed;
  for (int i = 0; i < n; ++i) {
    const int x = dist.sample(rng);
    for (int cut : {5, 10, 15})
      if (x > cut) ++exceed[cut];
  }
  for (int cut : {5, 10, 15}) {
    const double emp = static_cast<double>(exceed[cut]) / n;
    const double envelope = std::exp(-c * cut);
    const double se = std::sqrt(envelope * (1 - envelope) / n);
    CHECK(emp <= envelope + 3 * se);
  }
}

TEST_CASE("one-plus-poisson and bounded-uniform offspring stay on Z+") {
  Rng rng(5);
  const auto pois = OffspringDistribution::one_plus_poisson(1.5);
  const auto unif = OffspringDistribution::bounded_uniform(2, 5);
  double mean_p = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const auto x = pois.sample(rng);
    CHECK(x >= 1);
    mean_p += x;
    const auto u = unif.sample(rng);
    CHECK(u >= 2);
    CHECK(u <= 5);
  }
  mean_p /= 20000;
  CHECK(mean_p == doctest::Approx(2.5).epsilon(0.05));
}

TEST_CASE("max exposed degree obeys the log-scale tail bound") {
  // With geometric(1/2) offspring, P(D_k > (3/c) log k) <= k^-2 for
  // c = log 2. Monte Carlo over independent exposure runs; the expected
  // hit count over 1000 runs is about 1e-5, so the 3k^-1 acceptance
  // envelope amounts to requiring zero hits.
  const std::int64_t k = 10000;
  const int runs = 1000;
  const double c = std::log(2.0);
  const double cutoff = (3.0 / c) * std::log(static_cast<double>(k));
  int hits = 0;
  for (int r = 0; r < runs; ++r) {
    auto g = GraphOracle::make(GraphSpec::parse("gw:geom:0.5"),
                               1000000 + static_cast<std::uint64_t>(r));
    expose_bfs(g, k);
    if (g.exposure_stats().max_degree > cutoff) ++hits;
  }
  const double freq = static_cast<double>(hits) / runs;
  CHECK(freq <= 3.0 / static_cast<double>(k));
}
