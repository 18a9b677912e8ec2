#include <algorithm>
#include <set>

#include "doctest.h"
#include "netform/errors.hpp"
#include "netform/network.hpp"
#include "oracles.hpp"

using namespace netform;

namespace {

Network from_links(int n, std::initializer_list<Dyad> links) {
  Network g(n);
  for (Dyad d : links) g = switch_link(g, d);
  return g;
}

}  // namespace

TEST_CASE("dyad index round trip") {
  for (int n = 2; n <= kMaxNodes; ++n) {
    for (int k = 0; k < dyad_count(n); ++k) {
      const Dyad d = dyad_at(k, n);
      CHECK(d.i != d.j);
      CHECK(dyad_index(d, n) == k);
    }
  }
  CHECK(dyad_index({0, 1}, 3) == 0);
  CHECK(dyad_index({0, 2}, 3) == 1);
  CHECK(dyad_index({1, 0}, 3) == 2);
  CHECK(dyad_index({1, 2}, 3) == 3);
  CHECK(dyad_index({2, 1}, 3) == 5);
}

TEST_CASE("switch_link examples") {
  const Network empty(2);
  const Network g01 = switch_link(empty, {0, 1});
  CHECK(g01.has({0, 1}));
  CHECK(g01.size() == 1);
  CHECK(switch_link(g01, {0, 1}) == empty);
  const Network both = switch_link(g01, {1, 0});
  CHECK(both.size() == 2);
  CHECK(switch_link(switch_link(empty, {1, 0}), {0, 1}) == both);
  CHECK(empty.size() == 0);
  CHECK(empty.empty());
}

TEST_CASE("switch_link rejects bad dyads") {
  const Network g(3);
  CHECK_THROWS_AS(switch_link(g, {1, 1}), InvalidArgument);
  CHECK_THROWS_AS(switch_link(g, {0, 3}), InvalidArgument);
  CHECK_THROWS_AS(switch_link(g, {-1, 0}), InvalidArgument);
}

TEST_CASE("involution and commutation hold exhaustively up to N=4") {
  for (int n = 2; n <= 4; ++n) {
    const auto dyads = all_dyads(n);
    for (const Network& g : enumerate_networks(n)) {
      for (Dyad d : dyads) {
        REQUIRE(switch_link(switch_link(g, d), d) == g);
      }
      if (n > 3) continue;
      for (Dyad d : dyads) {
        for (Dyad e : dyads) {
          REQUIRE(switch_link(switch_link(g, d), e) == switch_link(switch_link(g, e), d));
        }
      }
    }
  }
}

TEST_CASE("enumeration is a bijection onto 2^{N(N-1)} networks") {
  CHECK(enumerate_networks(2).size() == 4);
  CHECK(enumerate_networks(3).size() == 64);
  CHECK(enumerate_networks(4).size() == 4096);
  std::set<std::uint64_t> seen;
  StateIndex k = 0;
  for (const Network& g : enumerate_networks(3)) {
    CHECK(g.index() == k++);
    seen.insert(g.bits());
  }
  CHECK(seen.size() == 64);
  const auto n2 = enumerate_networks(2);
  CHECK(n2[0] == Network(2));
  CHECK(n2[1] == from_links(2, {{0, 1}}));
  CHECK(n2[2] == from_links(2, {{1, 0}}));
  CHECK(n2[3] == from_links(2, {{0, 1}, {1, 0}}));
}

TEST_CASE("state-space cap") {
  CHECK(state_count(5) == (StateIndex{1} << 20));
  CHECK_THROWS_AS(state_count(6), StateSpaceOverflow);
  CHECK(state_count(6, 30) == (StateIndex{1} << 30));
  CHECK_THROWS_AS(Network(1), InvalidArgument);
  CHECK_THROWS_AS(Network(9), InvalidArgument);
  CHECK_THROWS_AS(Network(2, 0x10), InvalidArgument);
}

TEST_CASE("out_subgraph examples and link-count property") {
  CHECK(out_subgraph(from_links(2, {{0, 1}, {1, 0}}), 0) == from_links(2, {{0, 1}}));
  CHECK(out_subgraph(Network(3), 2) == Network(3));
  CHECK(out_subgraph(from_links(3, {{0, 1}, {0, 2}, {2, 1}}), 2) == from_links(3, {{2, 1}}));
  CHECK_THROWS_AS(out_subgraph(Network(3), 3), InvalidArgument);
  for (const Network& g : enumerate_networks(3)) {
    int total = 0;
    for (int i = 0; i < 3; ++i) {
      const Network s = out_subgraph(g, i);
      for (const Dyad& d : s.links()) CHECK(d.i == i);
      total += s.size();
    }
    CHECK(total == g.size());
  }
}

TEST_CASE("typed out-degrees") {
  const auto tp = TypeProfile::from_assignment({0, 1, 1}, 2);
  CHECK(typed_outdegrees(Network(3), 1, tp) == std::vector<int>{0, 0});
  CHECK(typed_outdegrees(from_links(3, {{0, 1}, {0, 2}}), 0, tp) == std::vector<int>{0, 2});
  const auto one = TypeProfile::from_assignment({0, 0}, 1);
  CHECK(typed_outdegrees(from_links(2, {{0, 1}, {1, 0}}), 1, one) == std::vector<int>{1});
  CHECK_THROWS_AS(typed_outdegrees(Network(2), 0, tp), InvalidArgument);
}

TEST_CASE("type profiles validate") {
  CHECK_THROWS_AS(TypeProfile::from_assignment({0, 2}, 2), InvalidArgument);
  CHECK_THROWS_AS(TypeProfile::from_weights({0.5, 0.6}), InvalidArgument);
  CHECK_THROWS_AS(TypeProfile::from_weights({1.0, 0.0}), InvalidArgument);
  const auto tp = TypeProfile::from_group_sizes({2, 3});
  CHECK(tp.n_nodes() == 5);
  CHECK(tp.group_sizes() == std::vector<int>{2, 3});
  CHECK(tp.weights()[0] == doctest::Approx(0.4));
  const auto lim = TypeProfile::from_weights({0.25, 0.75});
  CHECK_FALSE(lim.finite());
  CHECK(lim.weights()[1] == 0.75);
}

TEST_CASE("hex encoding round trips") {
  CHECK(to_hex(Network(3, 0x3f)) == "g:3f");
  CHECK(to_hex(Network(2)) == "g:0");
  oracle::Gen gen(7);
  for (int t = 0; t < 200; ++t) {
    const int n = gen.integer(2, 8);
    const std::uint64_t mask =
        dyad_count(n) == 64 ? ~0ULL : ((std::uint64_t{1} << dyad_count(n)) - 1);
    const Network g(n, gen.seed() & mask);
    CHECK(network_from_hex(to_hex(g), n) == g);
  }
  CHECK_THROWS_AS(network_from_hex("3f", 3), InvalidArgument);
  CHECK_THROWS_AS(network_from_hex("g:zz", 3), InvalidArgument);
  CHECK_THROWS_AS(network_from_hex("g:", 3), InvalidArgument);
}
