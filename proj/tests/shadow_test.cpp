#include <gtest/gtest.h>

#include <chrono>
#include <functional>
#include <iostream>

#include "mmda/instances/appendix_instances.hpp"
#include "mmda/instances/mmda_builder.hpp"
#include "mmda/shadow/certificate.hpp"
#include "mmda/shadow/controls.hpp"
#include "mmda/shadow/monte_carlo.hpp"

using namespace mmda::shadow;
using mmda::instances::build_mmda;
using mmda::instances::Family;
using mmda::numerics::binomial;
using mmda::relaxations::ExplicitFamily;
using mmda::relaxations::ValueTable;

namespace {

const LayeredInstance& g8() {
  static LayeredInstance g = build_mmda(8, mpq_class(1, 4), 3);
  return g;
}

const LayeredInstance& g12() {
  static LayeredInstance g = build_mmda(12, mpq_class(1, 4), 3);
  return g;
}

const ShadowModel& m8() {
  static ShadowModel m = depth_three_model(g8());
  return m;
}

ShadowEngine& e8() {
  static ShadowEngine e(m8());
  return e;
}

mpq_class q(const Scalar& s) { return s.rational(); }

mpq_class qpow(mpq_class a, int n) {
  mpq_class r = 1;
  while (n-- > 0) r *= a;
  return r;
}

// Oracle: products over every edge of the instance, straight from the
// definition of the distribution.
struct DirectOracle {
  const ShadowModel& m;
  mpq_class x(EdgeId f) const { return m.base().value(f).rational(); }
  mpq_class b(EdgeId f, EdgeId e) const { return m.family().table()[m.family().value_class(f, e)].rational(); }
  std::size_t ne() const { return m.instance().num_edges(); }

  mpq_class absent(EdgeId e) const {
    mpq_class p = 1;
    for (EdgeId f = 0; f < ne(); ++f) p *= 1 - x(f) * b(f, e);
    return p;
  }
  mpq_class marginal(EdgeId e) const { return 1 - absent(e); }
  mpq_class pair(EdgeId e, EdgeId e1) const {
    if (e == e1) return marginal(e);
    mpq_class both = 1;
    for (EdgeId f = 0; f < ne(); ++f) both *= 1 - x(f) * (1 - (1 - b(f, e)) * (1 - b(f, e1)));
    return 1 - absent(e) - absent(e1) + both;
  }
  // E[n_e 1{e1 in A}]
  mpq_class mean_pos(EdgeId e, EdgeId e1) const {
    mpq_class s = 0;
    for (EdgeId f = 0; f < ne(); ++f) {
      mpq_class a = x(f) * b(f, e);
      if (a == 0) continue;
      if (e == e1) {
        s += a;
        continue;
      }
      mpq_class miss = 1 - b(f, e1);
      for (EdgeId h = 0; h < ne(); ++h)
        if (h != f) miss *= 1 - x(h) * b(h, e1);
      s += a * (1 - miss);
    }
    return s;
  }
};

// Tiny two-layer DAG with hand-picked subtree values, small enough to
// enumerate every outcome of the sampling process.
struct TinyCase {
  LayeredInstance g;
  std::unique_ptr<ShadowModel> model;

  TinyCase() {
    std::vector<LayeredInstance::Edge> edges = {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}};
    g = LayeredInstance::from_edges(Family::kCustom, {1, 2, 2}, edges, {Scalar(1), Scalar(1), Scalar(0)});
    auto fam = std::make_shared<ExplicitFamily>(g);
    auto id = [&](VertexId u, VertexId v) { return *g.find_edge(u, v); };
    fam->set(id(0, 1), id(1, 3), Scalar::ratio(1, 2));
    fam->set(id(0, 1), id(1, 4), Scalar::ratio(1, 3));
    fam->set(id(0, 2), id(2, 3), Scalar::ratio(2, 5));
    fam->set(id(0, 2), id(2, 4), Scalar(1));
    EdgeSolution x(g, std::make_shared<ValueTable>(), true);
    x.set(id(0, 1), Scalar::ratio(1, 2));
    x.set(id(0, 2), Scalar::ratio(1, 3));
    x.set(id(1, 3), Scalar::ratio(1, 4));
    x.set(id(1, 4), Scalar::ratio(1, 5));
    x.set(id(2, 3), Scalar::ratio(1, 7));
    x.set(id(2, 4), Scalar(1));
    model = std::make_unique<ShadowModel>(std::move(x), fam);
  }
};

struct Enumerated {
  std::vector<mpq_class> s;
  std::vector<std::vector<mpq_class>> both, mean_pos, mean_neg;
};

Enumerated enumerate_all(const ShadowModel& m) {
  const LayeredInstance& g = m.instance();
  const std::size_t ne = g.num_edges();
  Enumerated out;
  out.s.assign(ne, 0);
  out.both.assign(ne, std::vector<mpq_class>(ne, 0));
  out.mean_pos = out.both;
  out.mean_neg = out.both;
  std::vector<unsigned> n(ne, 0);
  std::function<void(EdgeId, mpq_class)> rec = [&](EdgeId f, mpq_class w) {
    if (w == 0) return;
    if (f == ne) {
      for (EdgeId e = 0; e < ne; ++e) {
        if (n[e]) out.s[e] += w;
        for (EdgeId e1 = 0; e1 < ne; ++e1) {
          if (n[e] && n[e1]) out.both[e][e1] += w;
          if (n[e1]) out.mean_pos[e][e1] += w * n[e];
          else out.mean_neg[e][e1] += w * n[e];
        }
      }
      return;
    }
    mpq_class xf = m.base().value(f).rational();
    rec(f + 1, w * (1 - xf));
    std::vector<std::pair<EdgeId, mpq_class>> supp;
    m.family().for_each_support(f, [&](EdgeId e, ClassId c) { supp.emplace_back(e, m.family().table()[c].rational()); });
    for (unsigned mask = 0; mask < (1u << supp.size()); ++mask) {
      mpq_class p = xf;
      for (std::size_t i = 0; i < supp.size(); ++i) p *= (mask >> i & 1) ? supp[i].second : 1 - supp[i].second;
      for (std::size_t i = 0; i < supp.size(); ++i)
        if (mask >> i & 1) ++n[supp[i].first];
      rec(f + 1, w * p);
      for (std::size_t i = 0; i < supp.size(); ++i)
        if (mask >> i & 1) --n[supp[i].first];
    }
  };
  rec(0, 1);
  return out;
}

}  // namespace

TEST(ShadowEngine, MatchesFullEnumerationOnTinyModel) {
  TinyCase tc;
  ShadowEngine eng(*tc.model);
  Enumerated en = enumerate_all(*tc.model);
  const std::size_t ne = tc.g.num_edges();
  for (EdgeId e = 0; e < ne; ++e) {
    EXPECT_EQ(eng.marginal_q(e), en.s[e]) << e;
    for (EdgeId e1 = 0; e1 < ne; ++e1) {
      const auto& jt = eng.joint(e, e1);
      EXPECT_EQ(jt.both, en.both[e][e1]) << e << "," << e1;
      EXPECT_EQ(jt.mean_pos, en.mean_pos[e][e1]) << e << "," << e1;
      EXPECT_EQ(mpq_class(eng.marginal_info(e).mean - jt.mean_pos), en.mean_neg[e][e1]) << e << "," << e1;
    }
  }
}

TEST(ShadowEngine, LayerMarginalsAtM8) {
  auto& eng = e8();
  const auto& g = g8();
  EXPECT_EQ(eng.marginal_q(g.edge_layer_begin(1)), mpq_class(1, 15));
  EXPECT_EQ(eng.marginal_q(g.edge_layer_begin(2)), mpq_class(179, 8100));
  DirectOracle o{m8()};
  // Checked edge by edge against the oracle on a stride through each layer.
  for (int l = 1; l <= 3; ++l)
    for (EdgeId e = g.edge_layer_begin(l); e < g.edge_layer_end(l); e += 37) EXPECT_EQ(eng.marginal_q(e), o.marginal(e)) << e;
  // L3: 1 - (1 - 1/15)(1 - 1/90)^6 prod over the six L1 ancestors.
  EdgeId e3 = g.edge_layer_begin(3);
  mpq_class l1 = 0;
  for (const auto& t : eng.triggers(e3))
    if (g.edge_layer(t.f) == 1) l1 += eng.x_value(t.x) * eng.b_value(t.b);
  EXPECT_EQ(l1, mpq_class(1, 15));
  EXPECT_EQ(eng.marginal_info(e3).mean, mpq_class(1, 5));
}

TEST(ShadowEngine, PairAndMultiplicityMatchOracle) {
  auto& eng = e8();
  const auto& g = g8();
  DirectOracle o{m8()};
  std::vector<std::pair<EdgeId, EdgeId>> pairs;
  EdgeId e1 = g.edge_layer_begin(1);
  VertexId v = g.head(e1);
  for (EdgeId e : g.out_edges(v)) pairs.emplace_back(e, e1);
  EdgeId deep = g.out_edges(g.head(g.out_edges(v)[0]))[0];
  pairs.emplace_back(deep, e1);
  pairs.emplace_back(e1, deep);
  pairs.emplace_back(deep, deep);
  pairs.emplace_back(deep, g.edge_layer_end(3) - 1);
  for (EdgeId a = 0; a < g.num_edges(); a += 97)
    for (EdgeId b = 5; b < g.num_edges(); b += 131) pairs.emplace_back(a, b);
  for (auto [a, b] : pairs) {
    EXPECT_EQ(eng.joint(a, b).both, o.pair(a, b)) << a << "," << b;
    EXPECT_EQ(eng.joint(a, b).both, eng.joint(b, a).both);
    EXPECT_EQ(eng.joint(a, b).mean_pos, o.mean_pos(a, b)) << a << "," << b;
  }
  EXPECT_EQ(eng.joint(deep, deep).both, eng.marginal_q(deep));
  for (EdgeId e : g.out_edges(v)) EXPECT_GE(eng.joint(e, e1).both, mpq_class(1, 90));
}

TEST(ShadowEngine, DisjointAncestryFactorizes) {
  auto& eng = e8();
  const auto& g = g8();
  // Two L2 edges below different L1 vertices share no trigger.
  EdgeId a = g.edge_layer_begin(2), b = g.edge_layer_end(2) - 1;
  ASSERT_NE(g.tail(a), g.tail(b));
  EXPECT_EQ(eng.joint(a, b).both, mpq_class(eng.marginal_q(a) * eng.marginal_q(b)));
}

TEST(ShadowEngine, ConditionalReportProperties) {
  auto& eng = e8();
  const auto& g = g8();
  EdgeId e1 = g.edge_layer_begin(1);
  MomentReport pos = eng.conditional_report(ConditionEvent{e1, EventSign::kPositive});
  VertexId v = g.head(e1);
  // Out-probability at v covers a sixth of k_1.
  EXPECT_GE(q(pos.out_probability[v]), mpq_class(5, 12));
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    EXPECT_GE(q(pos.probability[e]), 0);
    EXPECT_LE(q(pos.probability[e]), 1);
    EXPECT_GE(q(pos.multiplicity[e]), q(pos.probability[e]));
  }
  for (EdgeId f : {EdgeId{3}, g.edge_layer_begin(2) + 11, g.edge_layer_begin(3) + 200}) {
    MomentReport neg = eng.conditional_report(ConditionEvent{f, EventSign::kNegative});
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      EXPECT_LE(q(neg.probability[e]), q(neg.marginal[e]));
      EXPECT_GE(q(neg.multiplicity[e]), q(neg.probability[e]));
    }
    EXPECT_EQ(q(neg.probability[f]), 0);
  }
  MomentReport un = eng.conditional_report(std::nullopt);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    mpq_class x = eng.x_of(e);
    EXPECT_GE(q(un.marginal[e]), x);
    EXPECT_LE(q(un.marginal[e]), 6 * x);
  }
  mmda::Json j = moment_report_json(pos, g);
  EXPECT_EQ(j["edges"].size(), g.num_edges());
}

TEST(ShadowEngine, ZeroProbabilityEventThrows) {
  auto gc = mmda::instances::build_subtree_counterexample(3);
  auto m = appendix_c_model(gc);
  ShadowEngine eng(m);
  const auto& g = m.instance();
  // A private edge has x = 1, so it is always active.
  EdgeId priv = g.out_edges(g.layer_begin(1))[0];
  ASSERT_EQ(eng.marginal_q(priv), 1);
  std::vector<mpq_class> p, n;
  EXPECT_THROW(eng.event_moments({priv, EventSign::kNegative}, p, n), mmda::numerics::DomainError);
}

TEST(ShadowChecks, MarginalReportPassesAtM8AndM12) {
  for (const LayeredInstance* g : {&g8(), &g12()}) {
    ShadowModel m = depth_three_model(*g);
    ShadowEngine eng(m, false);
    MarginalReport r = marginal_report(eng);
    EXPECT_TRUE(r.passed()) << r.to_json().dump(1);
    EXPECT_EQ(r.bounds.checked(), 2 * g->num_edges());
    EXPECT_EQ(r.identities.checked(), g->num_edges());
    EXPECT_EQ(r.rows.size(), 3u);
    ASSERT_TRUE(r.max_ratio);
    EXPECT_LE(r.max_ratio->rational(), 6);
  }
}

TEST(ShadowChecks, ModelValidation) {
  EXPECT_TRUE(validate_model(m8()).passed());
  EXPECT_TRUE(validate_model(independent_model(g8())).passed());
  auto gc = mmda::instances::build_subtree_counterexample(4);
  auto c = appendix_c_model(gc);
  EXPECT_TRUE(validate_model(c).passed());
}

TEST(ShadowChecks, FrechetBoundsAtM8) {
  ViolationReport r = frechet_report(e8());
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.checked(), g8().num_edges() * (g8().num_edges() - 1));
}

TEST(ShadowChecks, NoEdgeDominates) {
  DominanceReport r = check_no_edge_dominates(m8());
  EXPECT_TRUE(r.report.passed());
  ASSERT_TRUE(r.tau(1, 2));
  EXPECT_EQ(r.tau(1, 2)->rational(), mpq_class(15, 28));
  EXPECT_EQ(r.tau(1, 2)->rational(), mpq_class(binomial(6, 2), binomial(8, 2)));
  EXPECT_EQ(r.tau(1, 1)->rational(), mpq_class(1, 15));
  EXPECT_EQ(r.tau(2, 2)->rational(), mpq_class(1, 6));
  EXPECT_FALSE(r.tau(3, 3));
}

TEST(ShadowChecks, PackingIdentities) {
  EXPECT_TRUE(l2_packing_identity(m8()).passed());
  L3PackingReport r = l3_packing_bound(m8());
  EXPECT_TRUE(r.report.passed()) << r.to_json().dump(1);
  EXPECT_EQ(r.closed_total.rational(), mpq_class(6) + mpq_class(15, 28));
  ASSERT_TRUE(r.max_total);
  EXPECT_EQ(r.max_total->rational(), r.closed_total.rational());
  L3PackingReport all = l3_packing_bound(m8(), {g8().edge_layer_begin(3) + 17}, true);
  EXPECT_TRUE(all.report.passed());
  EXPECT_EQ(all.rows.size(), g8().layer_size(3));
  ShadowModel m12 = depth_three_model(g12());
  EXPECT_TRUE(l2_packing_identity(m12).passed());
  std::vector<EdgeId> ev;
  for (EdgeId e = g12().edge_layer_begin(3); e < g12().edge_layer_end(3); e += 101) ev.push_back(e);
  EXPECT_TRUE(l3_packing_bound(m12, ev).report.passed());
}

TEST(ShadowControls, IndependentSlackEqualsX) {
  ControlReport r = independent_covering_control(g8());
  EXPECT_TRUE(r.report.passed()) << r.to_json().dump(1);
  EXPECT_EQ(r.report.checked(), 28u);
  ASSERT_TRUE(r.extreme);
  EXPECT_EQ(r.extreme->rational(), mpq_class(1, 15));
}

TEST(ShadowControls, TwoLayerSinkLoad) {
  ControlReport r = two_layer_packing_control(g8());
  EXPECT_TRUE(r.report.passed()) << r.to_json().dump(1);
  EXPECT_EQ(r.extreme->rational(), mpq_class(5, 2));
  // 15 parents u of t, each reached from v with probability 1/6 and from its
  // five other L1 parents with probability 1/90 each.
  mpq_class exact = 15 * (1 - mpq_class(5, 6) * qpow(mpq_class(89, 90), 5));
  EXPECT_EQ(r.exact_min->rational(), exact);
  EXPECT_EQ(r.exact_max->rational(), exact);
  EXPECT_GT(exact, 1);
}

TEST(ShadowControls, AppendixCLosesTheRatio) {
  for (int k : {2, 4}) {
    auto g = mmda::instances::build_subtree_counterexample(k);
    auto m = appendix_c_model(g);
    EXPECT_TRUE(mmda::relaxations::verify_assignment(g, m.base()).passed());
    EXPECT_TRUE(mmda::relaxations::verify_subtree_family(m.family()).passed());
    ShadowEngine eng(m);
    MarginalReport r = marginal_report(eng);
    EXPECT_FALSE(r.bounds.passed());
    EXPECT_EQ(r.unbounded_edges, static_cast<std::uint64_t>(k * k * k));
    for (EdgeId e = 0; e < g.num_edges(); ++e)
      if (mmda::instances::is_public_sink(g, g.head(e))) {
        EXPECT_EQ(eng.x_of(e), 0);
        EXPECT_EQ(eng.marginal_q(e), mpq_class(1, k));
      }
  }
}

TEST(ShadowCertificate, DepthThreeAtM8) {
  auto t0 = std::chrono::steady_clock::now();
  Sa1Options opt;
  opt.covering_floor = Scalar::ratio(1, 2);
  opt.packing_ceiling = Scalar(4);
  Sa1Certificate c = sa1_certificate(e8(), opt);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "sa1 m=8: " << secs << " s, worst covering "
            << c.covering.worst_covering()->factor->to_string() << " at " << c.covering.worst_covering()->id
            << ", worst packing " << c.packing.worst_packing()->factor->to_string() << " at "
            << c.packing.worst_packing()->id << ", truncation "
            << c.truncation.worst_covering()->factor->to_string() << "\n";
  EXPECT_EQ(c.events_checked, 2 * g8().num_edges());
  EXPECT_TRUE(c.passed());
  // Frozen from the run above; every moment behind them is oracle-checked.
  EXPECT_EQ(c.covering.worst_covering()->factor->to_string(),
            "10054130463127597956708659/17044555094048160000000000");
  EXPECT_EQ(c.covering.worst_covering()->id, "covering:E=+28,v=29");
  EXPECT_EQ(c.packing.worst_packing()->factor->to_string(),
            "1922149200821972655701325656490682556443063/530494369178953966710418628622720000000000");
}

TEST(ShadowCertificate, IndependentModelFailsCovering) {
  ShadowModel m = independent_model(g8());
  ShadowEngine eng(m);
  Sa1Options opt;
  opt.events = {g8().edge_layer_begin(1)};
  opt.include_unconditioned = false;
  Sa1Certificate c = sa1_certificate(eng, opt);
  EXPECT_FALSE(c.covering.passed());
  EXPECT_EQ(c.covering.worst_covering()->factor->rational(), mpq_class(1, 15));
}

TEST(ShadowSampler, Determinism) {
  ShadowSampler a(m8(), 7), b(m8(), 7);
  ShadowSample x = a.draw(3), y = b.draw(3);
  EXPECT_EQ(x.active, y.active);
  EXPECT_EQ(x.shadow, y.shadow);
  EmpiricalMoments p = sample(m8(), 11, 1), r = sample(m8(), 11, 1);
  EXPECT_EQ(p.to_json(g8()).dump(), r.to_json(g8()).dump());
  ShadowSampler c(m8(), 8);
  bool differs = false;
  for (std::uint64_t i = 0; i < 20 && !differs; ++i) differs = a.draw(i).active != c.draw(i).active;
  EXPECT_TRUE(differs);
}

TEST(ShadowSampler, SampleStructure) {
  ShadowSampler smp(m8(), 1);
  for (std::uint64_t i = 0; i < 50; ++i) {
    ShadowSample s = smp.draw(i);
    std::map<EdgeId, std::uint32_t> n;
    for (std::size_t t = 0; t < s.shadow.size(); ++t) {
      // x^{(e)}_e = 1, so every trigger is in its own subtree.
      EXPECT_NE(std::find(s.subtrees[t].begin(), s.subtrees[t].end(), s.shadow[t]), s.subtrees[t].end());
      for (EdgeId e : s.subtrees[t]) ++n[e];
    }
    ASSERT_EQ(n.size(), s.active.size());
    std::size_t k = 0;
    for (auto [e, c] : n) {
      EXPECT_EQ(s.active[k], e);
      EXPECT_EQ(s.multiplicity[k], std::make_pair(e, c));
      ++k;
    }
  }
}

TEST(ShadowSampler, BernoulliThresholds) {
  EXPECT_EQ(Bernoulli::of(mpq_class(1, 2)).threshold, 1ULL << 63);
  EXPECT_TRUE(Bernoulli::of(mpq_class(1)).always);
  EXPECT_FALSE(Bernoulli::of(mpq_class(0)).draw(0));
  EXPECT_EQ(Bernoulli::of(mpq_class(1, 3)).threshold, 6148914691236517206ULL);
}

TEST(ShadowSampler, IteratedRoundsRun) {
  EmpiricalMoments a = sample(m8(), 5, 200, 2);
  EXPECT_EQ(a.rounds, 2);
  EXPECT_EQ(a.samples, 200u);
}

TEST(ShadowSampler, ConditionalEstimateOnOneEvent) {
  EdgeId e1 = g8().edge_layer_begin(1);
  EmpiricalMoments a = sample(m8(), 3, 3000, 1, ConditionEvent{e1, EventSign::kPositive});
  EXPECT_EQ(a.hits[e1], a.event_hits);
  EXPECT_GT(a.event_hits, 0u);
}

TEST(ShadowSampler, AgreesWithExactEngine) {
  McComparison c = compare_with_exact(e8(), 20240601, 20000);
  EXPECT_TRUE(c.passed()) << c.to_json().dump(1);
  EXPECT_EQ(c.events, 2 * g8().num_edges());
  EXPECT_EQ(c.marginals.pools, 3u);
  std::cout << "conditional pools " << c.conditionals.pools << ", max |z| " << c.conditionals.max_abs_z << "\n";
}
