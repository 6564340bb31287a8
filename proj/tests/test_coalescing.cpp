#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "crw/coalescing.hpp"
#include "crw/exact_oracle.hpp"
#include "crw/graph.hpp"
#include "crw/stats.hpp"

using namespace crw;

namespace {

GraphOracle make(const std::string& spec) {
  return GraphOracle::make(GraphSpec::parse(spec));
}

bool subset_of(const CrwState& a, const CrwState& b) {
  return std::all_of(a.occupied.begin(), a.occupied.end(),
                     [&](VertexId v) { return b.occupies(v); });
}

}  // namespace

TEST_CASE("initial aggregate rates equal the occupied degree sums") {
  auto cyc = make("cycle:4");
  CHECK(crw_init_all(cyc).total_rate == 8);

  auto path = make("path:3");
  const VertexId mid[] = {1};
  CHECK(crw_init(path, mid).total_rate == 2);

  auto k2 = make("complete:2");
  CHECK(crw_init_all(k2).total_rate == 2);
}

TEST_CASE("initial set validation") {
  auto g = make("cycle:4");
  CHECK_THROWS_AS(crw_init(g, {}), config_error);
  const VertexId dup[] = {1, 1};
  CHECK_THROWS_AS(crw_init(g, dup), config_error);
  const VertexId oob[] = {9};
  CHECK_THROWS_AS(crw_init(g, oob), config_error);
  auto z = GraphOracle::make(GraphSpec::parse("z"), 1);
  CHECK_THROWS_AS(crw_init_all(z), config_error);
}

TEST_CASE("two particles on an edge coalesce at the first event") {
  Rng rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    auto g = make("complete:2");
    auto s = crw_init_all(g);
    const auto ev = crw_step(s, g, rng);
    CHECK(ev.merged);
    CHECK(s.size() == 1);
    CHECK(s.total_rate == 1);
  }
}

TEST_CASE("a single particle keeps its rate and the clock advances") {
  auto g = make("cycle:4");
  const VertexId init[] = {2};
  auto s = crw_init(g, init);
  Rng rng(3);
  double prev = 0.0;
  for (int i = 0; i < 200; ++i) {
    crw_step(s, g, rng);
    CHECK(s.size() == 1);
    CHECK(s.total_rate == 2);
    CHECK(s.clock > prev);
    prev = s.clock;
  }
}

TEST_CASE("incremental rate equals a recount after every event") {
  for (const char* spec : {"cycle:8", "star:4", "bintree:3"}) {
    auto g = make(spec);
    auto s = crw_init_all(g);
    Rng rng(77);
    std::int64_t prev_size = s.size();
    for (int i = 0; i < 400; ++i) {
      crw_step(s, g, rng);
      CHECK(s.total_rate == crw_recount_rate(s, g));
      CHECK(s.size() <= prev_size);  // particle count never grows
      prev_size = s.size();
    }
  }
}

TEST_CASE("shared event stream preserves the monotone coupling") {
  auto g = make("cycle:6");
  Rng rng(2718);
  for (int rep = 0; rep < 150; ++rep) {
    const auto stream = graphical_stream(g, 2.5, rng);
    const VertexId a_init[] = {0, 3};
    const VertexId b_init[] = {0, 2, 3};
    auto a = crw_init(g, a_init);
    auto b = crw_init(g, b_init);
    auto full = crw_init_all(g);
    for (const auto& ring : stream) {
      apply_ring(a, g, ring);
      apply_ring(b, g, ring);
      apply_ring(full, g, ring);
      CHECK(subset_of(a, b));
      CHECK(subset_of(b, full));
    }
  }
}

TEST_CASE("graphical replay matches the exact occupation probability") {
  auto g = make("cycle:5");
  const double t = 1.0;
  const double exact_pt = exact::crw_exact_pt(g, 0, t);
  Rng rng(55);
  const int reps = 20000;
  std::int64_t hits = 0;
  for (int rep = 0; rep < reps; ++rep) {
    auto s = crw_init_all(g);
    for (const auto& ring : graphical_stream(g, t, rng)) apply_ring(s, g, ring);
    if (s.occupies(0)) ++hits;
  }
  const auto ci = wilson_interval(hits, reps, kZ99);
  CHECK(ci.lo <= exact_pt);
  CHECK(exact_pt <= ci.hi);
}

TEST_CASE("direct simulation matches the two-vertex closed form") {
  auto g = make("complete:2");
  const double t = 1.0;
  const double expect = 0.5 * (1.0 + std::exp(-2.0));
  const int reps = 50000;
  std::int64_t hits = 0;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng = replicate_stream(902, static_cast<std::uint64_t>(rep));
    auto s = crw_init_all(g);
    bool occ = true;
    while (true) {
      occ = s.occupies(0);
      crw_step(s, g, rng);
      if (s.clock > t) break;
    }
    if (occ) ++hits;
  }
  const auto ci = wilson_interval(hits, reps, kZ99);
  CHECK(ci.lo <= expect);
  CHECK(expect <= ci.hi);
}

TEST_CASE("stepping with no rate left is a usage error") {
  auto g = make("cycle:4");
  CrwState s;  // deliberately empty
  Rng rng(1);
  CHECK_THROWS_AS(crw_step(s, g, rng), usage_error);
}
