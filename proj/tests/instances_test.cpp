#include <gtest/gtest.h>

#include <bit>
#include <set>
#include <tuple>

#include "mmda/instances/appendix_instances.hpp"
#include "mmda/instances/graph_queries.hpp"
#include "mmda/instances/json_io.hpp"
#include "mmda/instances/mmda_builder.hpp"
#include "test_support.hpp"

using namespace mmda::instances;
using mmda::numerics::compare_certified;
using mmda::numerics::Ordering;

namespace {

bool same(const Scalar& a, const Scalar& b) { return compare_certified(a, b) == Ordering::kEqual; }

}  // namespace

TEST(BuildMmdaTest, DepthThreeAtEight) {
  LayeredInstance g = build_mmda(8, mpq_class(1, 4), 3);
  EXPECT_EQ(g.num_layers(), 4);
  EXPECT_EQ(g.layer_size(1), 28u);
  EXPECT_EQ(g.layer_size(2), 70u);
  EXPECT_EQ(g.layer_size(3), 28u);
  EXPECT_EQ(g.num_vertices(), 127u);
  EXPECT_EQ(g.num_edges(), 868u);
  EXPECT_TRUE(same(g.layer_requirement(0), Scalar::ratio(28, 15)));
  EXPECT_TRUE(same(g.layer_requirement(1), Scalar::ratio(5, 2)));
  EXPECT_TRUE(same(g.layer_requirement(2), Scalar(6)));
  EXPECT_EQ(g.layer_requirement(0).kind(), Scalar::Kind::kRational);
}

TEST(BuildMmdaTest, SmallestInstance) {
  LayeredInstance g = build_mmda(4, mpq_class(1, 4), 3);
  EXPECT_EQ(g.layer_size(1), 4u);
  EXPECT_EQ(g.layer_size(2), 6u);
  EXPECT_EQ(g.layer_size(3), 4u);
  EXPECT_TRUE(same(g.layer_requirement(0), Scalar::ratio(4, 3)));
  EXPECT_TRUE(same(g.layer_requirement(1), Scalar::ratio(3, 2)));
  EXPECT_TRUE(same(g.layer_requirement(2), Scalar(2)));
}

TEST(BuildMmdaTest, SixLayersAtSixteen) {
  InstanceParams p = InstanceParams::make(16, mpq_class(1, 4), 6);
  auto prof = mmda_profile(p);
  ASSERT_EQ(prof.size(), 7u);
  EXPECT_EQ(prof[2].size, 1820u);
  EXPECT_EQ(*prof[0].delta_plus, 120);
  // gamma values are irrational here and stay exact.
  EXPECT_EQ(prof[0].gamma.kind(), Scalar::Kind::kMonomial);
  EXPECT_EQ(mmda_edge_count(p), 972000u);
}

TEST(BuildMmdaTest, RejectsBadParameters) {
  EXPECT_THROW(InstanceParams::make(8, mpq_class(1, 3), 3), InstanceError);
  EXPECT_THROW(InstanceParams::make(9, mpq_class(1, 4), 3), InstanceError);
  EXPECT_THROW(InstanceParams::make(8, mpq_class(1, 4), 9), InstanceError);
  EXPECT_THROW(InstanceParams::make(8, mpq_class(1, 4), 4), InstanceError);
  EXPECT_THROW(build_mmda(28, mpq_class(1, 4), 3), SizeCapExceeded);
  BuildLimits tight;
  tight.max_edges = 100;
  EXPECT_THROW(build_mmda(InstanceParams::make(8, mpq_class(1, 4), 3), tight), SizeCapExceeded);
}

TEST(BuildMmdaTest, GraphDegreesMatchClosedForms) {
  for (const auto& p : mmda::testing::valid_params(4, 14)) {
    LayeredInstance g = build_mmda(p);
    auto prof = mmda_profile(p);
    for (int i = 0; i <= p.ell; ++i) {
      ASSERT_EQ(g.layer_size(i), prof[i].size);
      for (VertexId v = g.layer_begin(i); v < g.layer_end(i); ++v) {
        ASSERT_EQ(mpz_class(static_cast<unsigned long>(g.out_degree(v))), *prof[i].delta_plus);
        ASSERT_EQ(mpz_class(static_cast<unsigned long>(g.in_degree(v))), *prof[i].delta_minus);
        ASSERT_EQ(std::popcount(g.label(v)), prof[i].label_size);
      }
    }
  }
}

TEST(InstanceProperty, DesiderataHoldExactlyUpToTwenty) {
  for (const auto& p : mmda::testing::valid_params(4, 20)) {
    auto prof = mmda_profile(p);
    int r = p.rho_m(), phases = p.phases();
    Scalar prod(1);
    for (int i = 0; i < 3 * phases; ++i) {
      prod = prod * prof[i].gamma * Scalar(*prof[i].delta_plus);
      if (i + 1 == phases) {
        ASSERT_TRUE(same(prod, Scalar(mpq_class(binomial(p.m, r), binomial(p.m - r, r)))));
      }
      if (i + 1 == 2 * phases) {
        ASSERT_TRUE(same(prod, Scalar(mpq_class(binomial(p.m, r), binomial(2 * r, r)))));
      }
    }
    ASSERT_TRUE(same(prod, Scalar(binomial(p.m, r))));
  }
}

TEST(InstanceProperty, RequirementsExceedOneBeforeSinks) {
  for (const auto& p : mmda::testing::valid_params(4, 20)) {
    auto prof = mmda_profile(p);
    for (int i = 0; i < p.ell; ++i) ASSERT_EQ(compare_certified(prof[i].k, Scalar(1)), Ordering::kGreater);
  }
}

TEST(InstanceProperty, EdgesFollowLabelNesting) {
  // Exhaustive over all layer pairs; the oracle tests set inclusion directly.
  for (const auto& p : mmda::testing::valid_params(4, 12)) {
    LayeredInstance g = build_mmda(p);
    std::size_t count = 0;
    for (int i = 1; i <= p.ell; ++i) {
      bool expanding = i <= 2 * p.phases();
      for (VertexId u = g.layer_begin(i - 1); u < g.layer_end(i - 1); ++u)
        for (VertexId v = g.layer_begin(i); v < g.layer_end(i); ++v) {
          Label su = g.label(u), sv = g.label(v);
          bool nest = expanding ? (su & ~sv) == 0 : (sv & ~su) == 0;
          ASSERT_EQ(nest, g.find_edge(u, v).has_value());
          count += nest;
        }
    }
    ASSERT_EQ(count, g.num_edges());
    for (EdgeId e = 0; e < g.num_edges(); ++e) ASSERT_EQ(g.layer_of(g.head(e)), g.layer_of(g.tail(e)) + 1);
  }
}

TEST(InstanceProperty, DepthThreeMatchesDirectConstruction) {
  // Independent construction: enumerate labels with a plain loop and join
  // every nested pair.
  for (auto [m, r] : {std::pair<int, int>{4, 1}, {8, 2}, {12, 3}, {12, 2}, {16, 4}}) {
    LayeredInstance g = build_mmda(m, mpq_class(r, m), 3);
    std::vector<std::vector<Label>> layers(4);
    for (Label s = 0; s < (Label{1} << m); ++s) {
      int c = std::popcount(s);
      if (c == 0) layers[0].push_back(s);
      if (c == r) {
        layers[1].push_back(s);
        layers[3].push_back(s);
      }
      if (c == 2 * r) layers[2].push_back(s);
    }
    std::set<std::tuple<int, Label, Label>> direct, built;
    for (int i = 1; i <= 3; ++i)
      for (Label a : layers[i - 1])
        for (Label b : layers[i])
          if (i <= 2 ? (a & ~b) == 0 : (b & ~a) == 0) direct.insert({i, a, b});
    for (EdgeId e = 0; e < g.num_edges(); ++e)
      built.insert({g.edge_layer(e), g.label(g.tail(e)), g.label(g.head(e))});
    EXPECT_EQ(direct, built) << m;
    auto req = depth_three_requirements(m, r);
    EXPECT_TRUE(same(g.layer_requirement(0), req.ks));
    EXPECT_TRUE(same(g.layer_requirement(1), req.k1));
    EXPECT_TRUE(same(g.layer_requirement(2), req.k2));
  }
}

TEST(InstanceTest, VertexIdsFollowColexOrder) {
  LayeredInstance g = build_mmda(8, mpq_class(1, 4), 3);
  for (int i = 0; i < 4; ++i)
    for (VertexId v = g.layer_begin(i) + 1; v < g.layer_end(i); ++v) ASSERT_LT(g.label(v - 1), g.label(v));
  EXPECT_EQ(g.label(g.layer_begin(1)), 0b11u);
  EXPECT_EQ(colex_unrank(colex_rank(0b10110u), 3), 0b10110u);
}

TEST(AppendixInstanceTest, ConfigGapCounts) {
  LayeredInstance g = build_config_lp_gap(2);
  EXPECT_EQ(g.layer_size(0), 1u);
  EXPECT_EQ(g.layer_size(1), 4u);
  EXPECT_EQ(g.layer_size(2), 8u);
  EXPECT_EQ(g.layer_size(3), 8u);
  EXPECT_EQ(g.edge_layer_end(1) - g.edge_layer_begin(1), 4u);
  EXPECT_EQ(g.edge_layer_end(2) - g.edge_layer_begin(2), 8u);
  EXPECT_EQ(g.edge_layer_end(3) - g.edge_layer_begin(3), 16u);
  EXPECT_EQ(build_config_lp_gap(3).out_degree(0), 9u);
  for (VertexId v = g.layer_begin(1); v < g.layer_end(1); ++v) {
    auto d = descendants(g, v);
    std::size_t sinks = 0;
    for (VertexId w : d) sinks += g.is_sink(w);
    EXPECT_EQ(sinks, 2u);
  }
  EXPECT_THROW(build_config_lp_gap(1), InstanceError);
}

TEST(AppendixInstanceTest, SantaViewValues) {
  LayeredInstance g = build_config_lp_gap(3);
  SantaView sv = santa_view(g);
  EXPECT_EQ(sv.player_vertex.size(), 1u + 9u + 27u);
  EXPECT_EQ(sv.resource_vertex.size(), g.num_vertices() - 1);
  EXPECT_EQ(sv.private_resource[0], -1);
  EXPECT_EQ(sv.valuations[0].size(), 9u);
  for (const auto& val : sv.valuations[0]) EXPECT_TRUE(same(val.value, Scalar::ratio(1, 3)));
  // A middle player values its private resource 1 and three sinks 1/3.
  const auto& mid = sv.valuations[10];
  ASSERT_EQ(mid.size(), 4u);
  EXPECT_TRUE(same(mid[0].value, Scalar(1)));
  EXPECT_TRUE(same(mid[1].value, Scalar::ratio(1, 3)));
}

TEST(AppendixInstanceTest, SubtreeCounterexampleCounts) {
  LayeredInstance g = build_subtree_counterexample(3);
  EXPECT_EQ(g.depth(), 2);
  EXPECT_EQ(g.layer_size(1), 9u);
  EXPECT_EQ(g.layer_size(2), 12u);
  EXPECT_EQ(g.edge_layer_end(1) - g.edge_layer_begin(1), 9u);
  EXPECT_EQ(g.edge_layer_end(2) - g.edge_layer_begin(2), 36u);
  for (int k = 2; k <= 5; ++k) {
    LayeredInstance h = build_subtree_counterexample(k);
    for (VertexId v = h.layer_begin(1); v < h.layer_end(1); ++v) ASSERT_EQ(h.out_degree(v), std::size_t(k + 1));
  }
  int publics = 0;
  for (VertexId v = g.layer_begin(2); v < g.layer_end(2); ++v) publics += is_public_sink(g, v);
  EXPECT_EQ(publics, 3);
}

TEST(GraphQueriesTest, DescendantsAndAncestors) {
  LayeredInstance g = build_mmda(8, mpq_class(1, 4), 3);
  VertexId v = g.layer_begin(1) + 5;
  auto d = descendants(g, v);
  std::size_t mid = 0, sinks = 0;
  for (VertexId w : d) {
    mid += g.layer_of(w) == 2;
    sinks += g.is_sink(w);
  }
  EXPECT_EQ(mid, 15u);
  EXPECT_EQ(sinks, 28u);
  EXPECT_TRUE(descendants(g, g.layer_begin(3)).empty());
  auto a = ancestors(g, g.layer_begin(3));
  EXPECT_EQ(a.front(), g.source());
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_THROW(descendants(g, 10'000), InstanceError);
}

TEST(GraphQueriesTest, EdgeAncestryAndPaths) {
  LayeredInstance g = build_mmda(4, mpq_class(1, 4), 3);
  EdgeId last = g.edge_layer_begin(3);
  auto anc = ancestor_edges(g, last);
  // tail is a 2-set: two in-edges from singletons, each with one source edge.
  EXPECT_EQ(anc.size(), 4u);
  auto desc = descendant_edges(g, g.edge_layer_begin(1));
  EXPECT_EQ(desc.size(), 3u + 6u);
  Path p{kDummyEdge};
  EXPECT_EQ(child_paths(g, p).size(), 4u);
  EXPECT_EQ(descendant_paths(g, p, 2).size(), 1u + 4u);
  auto into = paths_ending_at(g, g.layer_begin(1), 3);
  // {e} and {e0, e}
  EXPECT_EQ(into.size(), 2u);
  for (const auto& q : into) EXPECT_TRUE(is_valid_path(g, q));
}

TEST(JsonIoTest, RoundTrip) {
  for (auto g : {build_mmda(8, mpq_class(1, 4), 3), build_config_lp_gap(2), build_subtree_counterexample(3),
                 build_mmda(4, mpq_class(1, 4), 3).with_integral_requirements()}) {
    mmda::Json j = instance_to_json(g);
    LayeredInstance h = instance_from_json(j);
    EXPECT_EQ(instance_to_json(h).dump(), j.dump());
    EXPECT_EQ(h.num_edges(), g.num_edges());
  }
  mmda::Json j = instance_to_json(build_mmda(8, mpq_class(1, 4), 3));
  EXPECT_EQ(j["profile"][0]["k"]["value"], "28/15");
  EXPECT_EQ(j["schema_version"], 1);
}
