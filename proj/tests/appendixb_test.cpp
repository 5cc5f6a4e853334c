#include <gtest/gtest.h>

#include <set>

#include "mmda/appendixb/config_lp.hpp"
#include "mmda/instances/mmda_builder.hpp"

using namespace mmda::appendixb;
using mmda::instances::build_config_lp_gap;
using mmda::instances::build_mmda;

TEST(ConfigSolution, SourceBlocksAtK3) {
  LayeredInstance g = build_config_lp_gap(3);
  ConfigSolution s = build_config_solution(g);
  ASSERT_EQ(s.view.player_vertex[0], g.source());
  const auto& src = s.configs[0];
  ASSERT_EQ(src.size(), 3u);
  std::set<VertexId> seen;
  for (const auto& c : src) {
    EXPECT_EQ(c.weight, mpq_class(1, 3));
    EXPECT_EQ(c.resources.size(), 3u);
    for (auto r : c.resources) {
      VertexId v = s.view.resource_vertex[r];
      EXPECT_EQ(g.layer_of(v), 1);
      EXPECT_TRUE(seen.insert(v).second);
    }
  }
  EXPECT_EQ(seen.size(), 9u);
  for (std::size_t p = 1; p < s.configs.size(); ++p) {
    ASSERT_EQ(s.configs[p].size(), 2u);
    EXPECT_EQ(s.configs[p][0].weight, mpq_class(2, 3));
    EXPECT_EQ(s.configs[p][1].weight, mpq_class(1, 3));
  }
}

TEST(ConfigSolution, VerifierAcceptsEveryK) {
  for (int k = 2; k <= 6; ++k) {
    LayeredInstance g = build_config_lp_gap(k);
    ConfigSolution s = build_config_solution(g);
    ConfigCheck c = verify_config_solution(s);
    EXPECT_TRUE(c.passed()) << k << c.to_json().dump(1);
    // Every resource is used by exactly two kinds of configuration and
    // ends up fully loaded.
    EXPECT_EQ(c.max_load, 1);
    EXPECT_EQ(c.min_config_value, 1);
    std::uint64_t players = 1 + k * k + k * k * k;
    EXPECT_EQ(c.configurations, static_cast<std::uint64_t>(k) + 2 * (players - 1));
  }
  ConfigSolution k2 = build_config_solution(build_config_lp_gap(2));
  EXPECT_EQ(k2.configs[1][0].weight, mpq_class(1, 2));
  EXPECT_EQ(k2.configs[1][1].weight, mpq_class(1, 2));
}

TEST(ConfigSolution, VerifierRejectsBrokenSolutions) {
  LayeredInstance g = build_config_lp_gap(3);
  ConfigSolution s = build_config_solution(g);
  ConfigSolution heavy = s;
  heavy.configs[1][0].weight = 1;
  heavy.configs[1][1].weight = mpq_class(1, 3);
  ConfigCheck c = verify_config_solution(heavy);
  EXPECT_FALSE(c.weights_sum_to_one);
  EXPECT_FALSE(c.loads_within_one);
  ConfigSolution thin = s;
  thin.configs[0][0].resources.pop_back();
  EXPECT_FALSE(verify_config_solution(thin).configurations_meet_target);
  ConfigSolution neg = s;
  neg.configs[2][0].weight = -1;
  EXPECT_FALSE(verify_config_solution(neg).weights_nonnegative);
}

TEST(Defeat, HallAtEveryL1Endpoint) {
  for (int k : {2, 3, 4}) {
    DefeatReport d = sa1_defeats(build_config_lp_gap(k));
    EXPECT_TRUE(d.all_infeasible());
    EXPECT_EQ(d.endpoints, static_cast<std::uint64_t>(k * k));
    EXPECT_EQ(d.min_demand, k * k);
    EXPECT_EQ(d.max_supply, k);
    for (const auto& h : d.results) {
      EXPECT_LT(h.supply, h.demand);
      EXPECT_EQ(*h.depth, 2);
    }
  }
}

TEST(Defeat, DepthThreeControlIsFeasible) {
  LayeredInstance g = build_mmda(8, mpq_class(1, 4), 3);
  DefeatReport d = sa1_defeats(g);
  EXPECT_EQ(d.endpoints, g.layer_size(1));
  EXPECT_TRUE(d.none_infeasible()) << d.to_json().dump(1);
}
