#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

#include "crw/exact_oracle.hpp"
#include "crw/graph.hpp"
#include "crw/stats.hpp"
#include "crw/voter_dual.hpp"

using namespace crw;

TEST_CASE("initial boundary equals the tagged vertex degree") {
  auto z = GraphOracle::make(GraphSpec::parse("z"), 4);
  CHECK(cluster_init(z, 0).boundary_out == 2);

  auto rt = GraphOracle::make(GraphSpec::parse("regtree:3"), 4);
  CHECK(cluster_init(rt, 0).boundary_out == 3);

  auto gw = GraphOracle::make(GraphSpec::parse("gw:geom:0.5"), 41);
  CHECK(cluster_init(gw, 0).boundary_out == gw.degree(0));
}

TEST_CASE("stepping an empty cluster is a usage error") {
  auto g = GraphOracle::make(GraphSpec::parse("cycle:4"));
  auto s = cluster_init(g, 0);
  s.members.clear();
  s.member_slot.assign(s.member_slot.size(), -1);
  Rng rng(8);
  CHECK_THROWS_AS(cluster_step(s, g, rng), usage_error);
}

TEST_CASE("clusters on the integer line are intervals with total rate 4") {
  auto z = GraphOracle::make(GraphSpec::parse("z"), 9);
  auto s = cluster_init(z, 0);
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    if (s.empty()) cluster_reset(s, z, 0);
    CHECK(s.boundary_out == 2);  // per-direction rate 2, total rate 4
    cluster_step(s, z, rng);
  }
}

TEST_CASE("cluster size is skip-free and the boundary recount is exact") {
  for (const char* spec : {"bintree", "gw:geom:0.5", "regtree:4"}) {
    auto g = GraphOracle::make(GraphSpec::parse(spec), 23);
    auto s = cluster_init(g, 0);
    Rng rng(1234);
    std::int64_t prev = s.size();
    for (int i = 0; i < 1500; ++i) {
      if (s.empty()) {
        g.reset();
        cluster_reset(s, g, 0);
        prev = s.size();
      }
      cluster_step(s, g, rng);
      CHECK(std::llabs(s.size() - prev) == 1);
      CHECK(s.boundary_out == recount_boundary(s, g));
      prev = s.size();
    }
  }
}

TEST_CASE("rates respect the degree envelopes on lazy infinite graphs") {
  auto g = GraphOracle::make(GraphSpec::parse("gw:geom:0.5"), 6);
  auto s = cluster_init(g, 0);
  Rng rng(77);
  for (int i = 0; i < 3000; ++i) {
    if (s.empty()) {
      g.reset();
      cluster_reset(s, g, 0);
    }
    // floor: the transition rate is always at least two on an infinite
    // connected graph; cap: at most twice (max exposed degree) * |cluster|
    CHECK(2 * s.boundary_out >= 2);
    CHECK(2 * s.boundary_out <=
          2 * static_cast<std::int64_t>(g.exposure_stats().max_degree) * s.size());
    cluster_step(s, g, rng);
  }
}

TEST_CASE("survival matches the exact oracle on a small cycle") {
  auto g = GraphOracle::make(GraphSpec::parse("cycle:6"));
  const double t = 1.0;
  const double expect = exact::cluster_exact_survival(g, 0, t);
  const int reps = 30000;
  std::int64_t alive = 0;
  ClusterState s;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng = replicate_stream(31, static_cast<std::uint64_t>(rep));
    const auto out = survival_replicate(s, g, 0, t, 1000000, rng);
    if (out.tau > t) ++alive;
  }
  const auto ci = wilson_interval(alive, reps, kZ99);
  CHECK(ci.lo <= expect);
  CHECK(expect <= ci.hi);
}

TEST_CASE("two-vertex survival equals the closed form by duality") {
  auto g = GraphOracle::make(GraphSpec::parse("complete:2"));
  const double t = 1.0;
  const double expect = 0.5 * (1.0 + std::exp(-2.0));
  const int reps = 50000;
  std::int64_t alive = 0;
  ClusterState s;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng = replicate_stream(72, static_cast<std::uint64_t>(rep));
    if (survival_replicate(s, g, 0, t, 1000000, rng).tau > t) ++alive;
  }
  const auto ci = wilson_interval(alive, reps, kZ99);
  CHECK(ci.lo <= expect);
  CHECK(expect <= ci.hi);
}

TEST_CASE("full finite cluster freezes as surviving") {
  auto g = GraphOracle::make(GraphSpec::parse("complete:3"));
  ClusterState s;
  int frozen = 0;
  for (int rep = 0; rep < 400; ++rep) {
    Rng rng = replicate_stream(5, static_cast<std::uint64_t>(rep));
    const auto out = survival_replicate(s, g, 0, 200.0, 1000000, rng);
    CHECK_FALSE(out.capped);
    if (out.tau == std::numeric_limits<double>::infinity()) ++frozen;
  }
  CHECK(frozen > 0);  // K_3 swallows the whole graph with positive probability
}

TEST_CASE("size cap scores the replicate as surviving and flags it") {
  auto g = GraphOracle::make(GraphSpec::parse("regtree:3"), 2);
  ClusterState s;
  int capped = 0;
  for (int rep = 0; rep < 300; ++rep) {
    Rng rng = replicate_stream(6, static_cast<std::uint64_t>(rep));
    g.reset();
    const auto out = survival_replicate(s, g, 0, 50.0, 3, rng);
    if (out.capped) {
      ++capped;
      CHECK(out.tau == std::numeric_limits<double>::infinity());
    }
  }
  CHECK(capped > 0);
}

TEST_CASE("embedded cluster size chain is a martingale") {
  auto g = GraphOracle::make(GraphSpec::parse("regtree:3"), 1);
  const int reps = 20000;
  const int jump = 50;
  std::int64_t sum = 0, sq = 0;
  ClusterState s;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng = replicate_stream(11, static_cast<std::uint64_t>(rep));
    g.reset();
    cluster_reset(s, g, 0);
    for (int i = 0; i < jump && !s.empty(); ++i) cluster_step(s, g, rng);
    sum += s.size();
    sq += s.size() * s.size();
  }
  const double mean = static_cast<double>(sum) / reps;
  const double var = static_cast<double>(sq) / reps - mean * mean;
  const double se = std::sqrt(var / reps);
  CHECK(std::abs(mean - 1.0) <= 3.0 * se);
}

TEST_CASE("jump traces pad absorbed trajectories with zeros") {
  auto g = GraphOracle::make(GraphSpec::parse("halfline"), 3);
  ClusterState s;
  Rng rng(9);
  const auto trace = trace_jumps(s, g, 0, 40, rng);
  REQUIRE(trace.size() == 41);
  CHECK(trace[0].cluster_size == 1);
  CHECK(trace[0].index == 0);
  bool absorbed = false;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i].index == static_cast<std::int64_t>(i));
    CHECK(trace[i].at_time > trace[i - 1].at_time);
    if (absorbed) CHECK(trace[i].cluster_size == 0);
    if (trace[i].cluster_size == 0) absorbed = true;
    const auto diff = trace[i].cluster_size - trace[i - 1].cluster_size;
    CHECK((diff == 1 || diff == -1 || (diff == 0 && trace[i].cluster_size == 0)));
  }
}
