#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "anonsim/netlayer.hpp"
#include "anonsim/synth.hpp"

using namespace anonsim;
using namespace anonsim::netlayer;

namespace {

topology::AsGraph t6() {
  std::ifstream in("fixtures/t6.txt", std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return topology::AsGraph::parse_serial2(ss.str());
}

}  // namespace

TEST(DovetailBuild, T6Examples) {
  auto g = t6();
  DovetailParams params{5, 1, 5};
  Rng rng(42);
  auto path = dovetail_build(g, 6, 5, params, rng);
  ASSERT_TRUE(path.has_value());
  EXPECT_TRUE(path->head == (AsPath{6, 3, 1, 2, 5}) ||
              path->head == (AsPath{6, 4, 1, 2, 5}));
  EXPECT_EQ(path->dovetail, 2u);
  EXPECT_EQ(path->matchmaker, 5u);
  EXPECT_TRUE(topology::validate_path(g, path->head, 1));

  DovetailParams too_long{6, 1, 5};
  Rng rng2(42);
  EXPECT_EQ(dovetail_build(g, 6, 5, too_long, rng2), std::nullopt);
}

TEST(DovetailBuild, SeedDeterminism) {
  auto g = t6();
  DovetailParams params{4, 1, 5};
  Rng a(7), b(7);
  for (int i = 0; i < 20; ++i) {
    auto pa = dovetail_build(g, 6, 5, params, a);
    auto pb = dovetail_build(g, 6, 5, params, b);
    ASSERT_TRUE(pa && pb);
    EXPECT_EQ(pa->head, pb->head);
  }
}

TEST(DovetailObserve, RoundTrip) {
  auto g = t6();
  DovetailParams params{5, 1, 5};
  Rng rng(1);
  auto path = dovetail_build(g, 6, 5, params, rng);
  ASSERT_TRUE(path.has_value());
  auto obs = dovetail_observe(*path, path->dovetail);
  ASSERT_TRUE(obs.has_value());
  EXPECT_EQ(obs->predecessor, 1u);
  EXPECT_EQ(obs->position, 4u);
  EXPECT_EQ(obs->destination, 5u);
  EXPECT_EQ(dovetail_observe(*path, 99), std::nullopt);
  EXPECT_EQ(dovetail_observe(*path, path->head.front()), std::nullopt);
}

TEST(DovetailLocationSet, T6Examples) {
  auto g = t6();
  // 2-AS paths ending at 4 start from {1,2,6}; client ISPs are {5,6}
  EXPECT_EQ(dovetail_location_set(g, {4, 3, 5}, 1), (std::vector<AsId>{6}));
  // position 2: predecessor itself, and 4 is not a client ISP
  EXPECT_TRUE(dovetail_location_set(g, {4, 2, 5}, 1).empty());
  // 3-AS paths to 1: [6,3,1], [6,4,1] and, via the peer link, [5,2,1]
  EXPECT_EQ(dovetail_location_set(g, {1, 4, 5}, 1), (std::vector<AsId>{5, 6}));
  // with no peer budget the 5-origin path disappears
  EXPECT_EQ(dovetail_location_set(g, {1, 4, 5}, 0), (std::vector<AsId>{6}));
  EXPECT_THROW(dovetail_location_set(g, {4, 1, 5}, 1), ValidationError);
}

TEST(DovetailLocationSet, MatchesEnumerationOracle) {
  auto g = t6();
  const auto isps = topology::client_isp_ases(g);
  for (AsId pred : g.ases()) {
    for (std::uint32_t k = 2; k <= 5; ++k) {
      auto fast = dovetail_location_set(g, {pred, k, 5}, 1);
      std::vector<AsId> slow;
      for (AsId s : isps) {
        if (k == 2) {
          if (s == pred) slow.push_back(s);
          continue;
        }
        if (s == pred) continue;
        bool reachable = false;
        for (const auto& p : synth::oracle_enumerate_paths(g, s, pred, 1, k - 1))
          if (p.size() == k - 1) {
            reachable = true;
            break;
          }
        if (reachable) slow.push_back(s);
      }
      EXPECT_EQ(fast, slow) << "pred " << pred << " k " << k;
    }
  }
}

TEST(DovetailLocationSet, SoundnessOnSeededGraphs) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    synth::TopologyGenParams gp;
    gp.n_ases = 12;
    gp.n_tiers = 3;
    gp.seed = seed * 101;
    auto g = synth::gen_topology(gp);
    auto isps = topology::client_isp_ases(g);
    Rng rng(seed);
    DovetailParams params{3, 1, 6};
    for (int trial = 0; trial < 30; ++trial) {
      AsId src = isps[rng.uniform_index(isps.size())];
      AsId mm = src;
      while (mm == src) mm = g.ases()[rng.uniform_index(g.size())];
      auto path = dovetail_build(g, src, mm, params, rng);
      if (!path) continue;
      EXPECT_TRUE(topology::validate_path(g, path->head, 1));
      for (AsId observer : path->head) {
        auto obs = dovetail_observe(*path, observer);
        if (!obs) continue;
        auto lset = dovetail_location_set(g, *obs, params.max_peer_links);
        EXPECT_TRUE(std::binary_search(lset.begin(), lset.end(), src))
            << "seed " << seed << " src " << src << " observer " << observer;
      }
    }
  }
}

TEST(PhiBuild, T6Examples) {
  auto g = t6();
  auto p1 = phi_build(g, 6, 1, 5);
  ASSERT_TRUE(p1.has_value());
  EXPECT_EQ(p1->half_path, (AsPath{6, 3, 1}));
  EXPECT_EQ(p1->midway, 1u);
  EXPECT_EQ(p1->full_path, (AsPath{6, 3, 1, 2, 5}));
  EXPECT_TRUE(topology::validate_path(g, p1->full_path, 1));

  auto p2 = phi_build(g, 6, 2, 5);
  ASSERT_TRUE(p2.has_value());
  EXPECT_EQ(p2->half_path, (AsPath{6, 4, 2}));
  EXPECT_EQ(p2->midway, 2u);
  EXPECT_EQ(p2->full_path, (AsPath{6, 4, 2, 5}));

  EXPECT_THROW(phi_build(g, 6, 5, 5), ValidationError);
  EXPECT_THROW(phi_build(g, 6, 6, 5), ValidationError);
}

TEST(PhiBuild, FullPathsAlwaysValidate) {
  auto g = t6();
  for (AsId src : g.ases())
    for (AsId helper : g.ases())
      for (AsId dst : g.ases()) {
        if (src == helper || src == dst || helper == dst) continue;
        auto p = phi_build(g, src, helper, dst);
        if (!p) continue;
        EXPECT_TRUE(topology::validate_path(g, p->full_path, 1))
            << src << "/" << helper << "/" << dst;
        EXPECT_EQ(p->full_path.back(), dst);
        EXPECT_EQ(p->full_path.front(), src);
      }
}

TEST(PhiObserve, Examples) {
  auto g = t6();
  auto p = phi_build(g, 6, 1, 5);
  ASSERT_TRUE(p.has_value());  // full [6,3,1,2,5], midway 1

  auto after = phi_observe(*p, 2);
  ASSERT_TRUE(after.has_value());
  EXPECT_EQ(after->predecessor, 1u);
  EXPECT_EQ(after->relative_position, PhiPosition::AfterMidway);
  EXPECT_EQ(after->destination, 5u);

  auto at = phi_observe(*p, 1);
  ASSERT_TRUE(at.has_value());
  EXPECT_EQ(at->predecessor, 3u);
  EXPECT_EQ(at->relative_position, PhiPosition::Midway);
  EXPECT_EQ(at->destination, 5u);

  EXPECT_EQ(phi_observe(*p, 4), std::nullopt);  // not on this path
  EXPECT_EQ(phi_observe(*p, 3), std::nullopt);  // before the midway
  EXPECT_EQ(phi_observe(*p, 6), std::nullopt);  // source is before the midway
}

TEST(HornetSourceSet, T6Examples) {
  auto g = t6();
  EXPECT_EQ(hornet_source_set(g, 5, 2), (std::vector<AsId>{1, 2, 3, 4, 6}));
  EXPECT_TRUE(hornet_source_set(g, 5, 4).empty());
  auto disc = topology::AsGraph::parse_serial2("1|2|-1\n3|4|-1\n");
  EXPECT_EQ(hornet_source_set(disc, 3, 1), (std::vector<AsId>{}));
}

TEST(HornetSourceSet, SoundByConstruction) {
  auto g = t6();
  for (AsId dst : g.ases())
    for (AsId src : g.ases()) {
      if (src == dst) continue;
      auto pen = topology::penultimate_hop(g, src, dst);
      if (!pen) continue;
      auto set = hornet_source_set(g, dst, *pen);
      EXPECT_TRUE(std::find(set.begin(), set.end(), src) != set.end());
    }
}
