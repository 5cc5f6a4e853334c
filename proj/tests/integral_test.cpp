#include <gtest/gtest.h>

#include <functional>
#include <iostream>

#include "mmda/instances/appendix_instances.hpp"
#include "mmda/instances/mmda_builder.hpp"
#include "mmda/integral/bruteforce.hpp"
#include "mmda/integral/certificate.hpp"

using namespace mmda::integral;
using mmda::instances::build_config_lp_gap;
using mmda::instances::build_mmda;
using mmda::instances::build_subtree_counterexample;
using mmda::numerics::binomial;

namespace {

// Oracle: every non-source vertex picks a parent or stays out; the best
// connected choice is the optimum.
mpq_class enumerate_best(const LayeredInstance& g) {
  const std::size_t n = g.num_vertices();
  std::vector<long> parent(n, -1);
  std::vector<long> outdeg(n, 0);
  mpq_class best = 0;
  std::function<void(VertexId)> rec = [&](VertexId v) {
    if (v == n) {
      bool first = true;
      mpq_class a = 0;
      for (VertexId u = 0; u < n; ++u) {
        bool covered = u == 0 || parent[u] >= 0;
        if (!covered || g.is_sink(u)) continue;
        mpq_class r = mpq_class(outdeg[u]) / g.requirement(u).rational();
        if (first || r < a) a = r;
        first = false;
      }
      if (a > best) best = a;
      return;
    }
    rec(v + 1);
    for (EdgeId e = g.in_begin(v); e < g.in_end(v); ++e) {
      VertexId u = g.tail(e);
      if (u != 0 && parent[u] < 0) continue;  // parents are decided first
      parent[v] = static_cast<long>(u);
      ++outdeg[u];
      rec(v + 1);
      --outdeg[u];
      parent[v] = -1;
    }
  };
  rec(1);
  return best;
}

const LayeredInstance& g4() {
  static LayeredInstance g = build_mmda(4, mpq_class(1, 4), 3);
  return g;
}

}  // namespace

TEST(IntegralSolution, Invariants) {
  const auto& g = g4();
  VertexId t = g.layer_begin(3);
  std::vector<EdgeId> two_parents;
  for (EdgeId e = g.in_begin(t); e < g.in_end(t); ++e) two_parents.push_back(e);
  EXPECT_THROW(IntegralSolution(g, two_parents), SolutionError);
  EXPECT_THROW(IntegralSolution(g, {g.in_begin(t)}), SolutionError);
  IntegralSolution p = single_path(g);
  EXPECT_EQ(p.edges().size(), 3u);
  EXPECT_EQ(p.paths().size(), 3u);
  EXPECT_TRUE(p.covers(g.head(p.edges().back())));
}

TEST(IntegralSolution, SinglePathQuality) {
  for (const LayeredInstance& g : {g4(), g4().with_integral_requirements(), build_subtree_counterexample(3),
                                  build_mmda(8, mpq_class(1, 4), 3)}) {
    mpq_class kmax = 0;
    for (int i = 0; i < g.depth(); ++i) kmax = std::max(kmax, g.layer_requirement(i).rational());
    EXPECT_EQ(quality(single_path(g)).alpha.rational(), 1 / kmax);
  }
}

TEST(Bruteforce, SmallestInstance) {
  LayeredInstance gi = g4().with_integral_requirements();
  BruteforceResult r = bruteforce_best(gi);
  EXPECT_TRUE(r.complete);
  EXPECT_EQ(r.quality.alpha.rational(), 1);
  EXPECT_EQ(enumerate_best(gi), 1);
  // The single path is the 2-approximate solution.
  EXPECT_EQ(quality(single_path(gi)).alpha.rational(), mpq_class(1, 2));
  // Exact fractional requirements.
  BruteforceResult f = bruteforce_best(g4());
  EXPECT_TRUE(f.complete);
  EXPECT_EQ(f.quality.alpha.rational(), mpq_class(2, 3));
  EXPECT_EQ(enumerate_best(g4()), mpq_class(2, 3));
}

TEST(Bruteforce, MatchesEnumerationOnSmallFamilies) {
  for (const LayeredInstance& g : {build_subtree_counterexample(2), build_config_lp_gap(2)}) {
    BruteforceResult r = bruteforce_best(g);
    EXPECT_TRUE(r.complete);
    EXPECT_EQ(r.quality.alpha.rational(), enumerate_best(g));
  }
}

TEST(Bruteforce, AppendixCSqrtBound) {
  LayeredInstance g = build_subtree_counterexample(4);
  BruteforceResult r = bruteforce_best(g);
  EXPECT_TRUE(r.complete);
  EXPECT_LE(r.quality.alpha.rational(), mpq_class(3, 4));
  EXPECT_EQ(r.quality.alpha.rational(), mpq_class(1, 2));
}

TEST(Bruteforce, DepthThreeM8AgainstCertificate) {
  const LayeredInstance g = build_mmda(8, mpq_class(1, 4), 3);
  BruteforceResult r = bruteforce_best(g);
  std::cout << "m=8 optimum " << r.quality.alpha.to_string() << " complete " << r.complete << " nodes " << r.nodes
            << "\n";
  EXPECT_TRUE(r.complete);
  // k_1 = 5/2 allows only two children per L1 vertex at quality 1.
  EXPECT_EQ(r.quality.alpha.rational(), mpq_class(4, 5));
  IntegralSolution again(g, r.solution.edges());
  EXPECT_EQ(quality(again).alpha.rational(), r.quality.alpha.rational());
  CountingCertificate c = counting_certificate(g, g.layer_begin(1));
  ASSERT_TRUE(c.quality_bound());
  EXPECT_TRUE(mmda::numerics::certified_leq(r.quality.alpha, *c.quality_bound()));
  BruteforceResult ri = bruteforce_best(g.with_integral_requirements());
  EXPECT_TRUE(ri.complete);
  // Two L2 children of one L1 vertex share the sink labelled S_v.
  EXPECT_EQ(ri.quality.alpha.rational(), mpq_class(5, 6));
  EXPECT_TRUE(mmda::numerics::certified_leq(r.quality.alpha, ri.quality.alpha));
}

TEST(Bruteforce, BudgetIsFlagged) {
  BruteforceOptions opt;
  opt.node_budget = 1;
  BruteforceResult r = bruteforce_best(build_mmda(8, mpq_class(1, 4), 3), opt);
  EXPECT_FALSE(r.complete);
  EXPECT_GT(r.quality.alpha.rational(), 0);
}

TEST(CountingCertificate, SumsAtM8) {
  EXPECT_EQ(t2_count(2, 1), 1);
  EXPECT_EQ(t2_count(2, 0), 0);
  EXPECT_EQ(t1_count(8, 2, 0), binomial(8, 2));
  EXPECT_EQ(t1_count(8, 2, 1), 13);
  EXPECT_EQ(t1_count(8, 2, 2), 1);
  EXPECT_EQ(t2_count(2, 2), 5);
  EXPECT_EQ(t2_count(2, 3), binomial(4, 2));
}

TEST(CountingCertificate, VariantsAtM8) {
  const LayeredInstance g = build_mmda(8, mpq_class(1, 4), 3);
  CountingCertificate c = counting_certificate(g, g.layer_begin(1));
  EXPECT_EQ(c.theta, mpq_class(1, 12));
  ASSERT_EQ(c.variants.size(), 2u);
  EXPECT_EQ(c.variants[0].threshold, 0);
  EXPECT_EQ(c.variants[1].threshold, 1);
  // floor: alpha >= sqrt(15/56); ceil: alpha >= sqrt(15/26).
  EXPECT_EQ((*c.variants[0].alpha_min * *c.variants[0].alpha_min).rational(), mpq_class(15, 56));
  EXPECT_EQ((*c.variants[1].quality_bound * *c.variants[1].quality_bound).rational(), mpq_class(26, 15));
  EXPECT_EQ((*c.quality_bound() * *c.quality_bound()).rational(), mpq_class(26, 15));
  EXPECT_GT(mpq_class(c.theta * c.theta), 0);
  mpq_class rho(1, 4);
  EXPECT_LT(rho * rho, c.theta);
  EXPECT_LT(c.theta, rho / 2);
  CountingCertificate given = counting_certificate(g, g.layer_begin(1), 2);
  EXPECT_EQ(given.variants.at(0).t2, 5);
  EXPECT_THROW(counting_certificate(g, g.layer_begin(2)), mmda::instances::InstanceError);
}

TEST(CountingCertificate, MatchesSinkEnumeration) {
  for (const LayeredInstance& g : {build_mmda(8, mpq_class(1, 4), 3), build_mmda(12, mpq_class(1, 4), 3),
                                  build_mmda(10, mpq_class(1, 5), 3), build_mmda(8, mpq_class(1, 4), 6)}) {
    const int p = g.params()->phases(), r = g.params()->rho_m();
    for (VertexId v : {g.layer_begin(p), g.layer_end(p) - 1})
      for (int th = 0; th <= r + 1; ++th) {
        EnumeratedCounts e = enumerate_counts(g, v, th);
        CountingCertificate c = counting_certificate(g, v, th);
        EXPECT_EQ(c.variants[0].t1, e.t1) << g.params()->m << " " << th;
        EXPECT_EQ(c.variants[0].t2, e.t2) << g.params()->m << " " << th;
      }
  }
}

TEST(Hall, AppendixBDemandExceedsSupply) {
  LayeredInstance g = build_config_lp_gap(3);
  HallResult h = hall_infeasibility(g, g.layer_begin(1));
  EXPECT_TRUE(h.infeasible);
  ASSERT_TRUE(h.depth);
  EXPECT_EQ(*h.depth, 2);
  EXPECT_EQ(h.demand, 9);
  EXPECT_EQ(h.supply, 3);
  EXPECT_FALSE(hall_infeasibility(g, g.layer_begin(1), 1).infeasible);
}

TEST(Hall, FeasibleRoots) {
  LayeredInstance c = build_subtree_counterexample(4);
  HallResult h = hall_infeasibility(c, c.layer_begin(1), 1);
  EXPECT_FALSE(h.infeasible);
  EXPECT_EQ(h.supply, 5);
  LayeredInstance g = build_mmda(8, mpq_class(1, 4), 3);
  for (VertexId v = g.layer_begin(1); v < g.layer_end(1); ++v) EXPECT_FALSE(hall_infeasibility(g, v).infeasible);
  HallResult s = hall_infeasibility(g, g.layer_begin(1));
  EXPECT_EQ(s.levels.back().first, 18);
  EXPECT_EQ(s.levels.back().second, 28);
}
