#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "mmda/restricted/canonical.hpp"
#include "mmda/restricted/matching.hpp"

using namespace mmda::restricted;

namespace {

// Every injection of the k big resources into the k+1 players, each with
// probability 1 / (k+1)!. Smalls stay with their own player.
std::vector<RAAssignment> all_matchings(int k) {
  std::vector<RAAssignment> out;
  std::vector<int> perm(k + 1);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    RAAssignment a(2 * k + 1, -1);
    for (int i = 0; i <= k; ++i) a[i] = i;
    // perm[b] is the owner of big b; perm[k] is the unmatched player.
    for (int b = 0; b < k; ++b) a[k + 1 + b] = perm[b];
    out.push_back(a);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

// Conditional expected value by enumeration.
std::vector<mpq_class> enumerate_conditional(const RAInstance& inst, const std::vector<ConditionedPair>& pairs) {
  int k = inst.lower_bound->k;
  std::vector<mpq_class> sum(k + 1, 0);
  long hits = 0;
  for (const auto& a : all_matchings(k)) {
    bool ok = std::all_of(pairs.begin(), pairs.end(),
                          [&](ConditionedPair p) { return a[k + 1 + p.second] == p.first; });
    if (!ok) continue;
    ++hits;
    auto v = player_values(inst, a);
    for (int i = 0; i <= k; ++i) sum[i] += v[i];
  }
  for (auto& s : sum) s /= hits;
  return sum;
}

}  // namespace

TEST(LowerBound, Shape) {
  RAInstance r = build_lower_bound(12, mpq_class(1, 12));
  EXPECT_EQ(r.players, 13u);
  EXPECT_EQ(r.num_resources(), 25u);
  EXPECT_EQ(r.values[0], mpq_class(1, 4));
  EXPECT_EQ(r.values[13], 1);
  EXPECT_EQ(build_lower_bound(3, mpq_class(1, 3)).values[0], 1);
  EXPECT_THROW(build_lower_bound(5, mpq_class(1, 3)), RAError);
  EXPECT_THROW(build_lower_bound(6, mpq_class(1, 2)), RAError);
  EXPECT_THROW(build_lower_bound(0, mpq_class(1, 3)), RAError);
  RAInstance back = RAInstance::from_json(r.to_json());
  EXPECT_EQ(back.to_json().dump(), RAInstance::from_json(back.to_json()).to_json().dump());
  EXPECT_EQ(back.values, r.values);
  EXPECT_EQ(back.eligible, r.eligible);
}

TEST(LowerBound, BruteforceOptimumIsThreeEps) {
  for (auto [k, e] : std::vector<std::pair<int, mpq_class>>{
           {3, mpq_class(1, 3)}, {4, mpq_class(1, 4)}, {6, mpq_class(1, 6)}, {6, mpq_class(1, 3)}, {5, mpq_class(1, 5)}}) {
    RABruteforce b = bruteforce_ra(build_lower_bound(k, e));
    EXPECT_EQ(b.value, 3 * e) << k;
    EXPECT_TRUE(assignment_valid(build_lower_bound(k, e), b.assignment));
  }
}

TEST(Matching, ExamplesAndSweep) {
  RAInstance r = build_lower_bound(12, mpq_class(1, 12));
  MatchingReport one = verify_matching_distribution(r, {{0, 0}});
  EXPECT_EQ(one.min_value, mpq_class(7, 6));
  EXPECT_EQ(one.expected_value[0], mpq_class(5, 4));
  MatchingReport none = verify_matching_distribution(r, {});
  EXPECT_EQ(none.min_value, mpq_class(12, 13) + mpq_class(1, 4));
  EXPECT_THROW(verify_matching_distribution(r, {{0, 0}, {1, 1}}), RAError);
  RAInstance r9 = build_lower_bound(9, mpq_class(1, 3));
  EXPECT_THROW(verify_matching_distribution(r9, {{0, 0}, {0, 1}}), RAError);
  EXPECT_THROW(verify_matching_distribution(r9, {{0, 0}, {1, 0}}), RAError);
  EXPECT_THROW(verify_matching_distribution(r9, {{10, 0}}), RAError);
  for (auto [k, e] : std::vector<std::pair<int, mpq_class>>{
           {12, mpq_class(1, 12)}, {9, mpq_class(1, 3)}, {6, mpq_class(1, 6)}}) {
    auto sweep = matching_sweep(build_lower_bound(k, e));
    mpq_class ek = e * k;
    EXPECT_EQ(static_cast<long>(sweep.size()), ek.get_num().get_si() + 1);
    for (std::size_t c = 0; c < sweep.size(); ++c) {
      EXPECT_TRUE(sweep[c].at_least_one) << k << " c=" << c;
      if (c) EXPECT_LE(sweep[c].min_value, sweep[c - 1].min_value);
    }
    mpq_class last = mpq_class((1 - e) * k / (1 + (1 - e) * k)) + 3 * e;
    EXPECT_EQ(sweep.back().min_value, last);
  }
}

TEST(Matching, AgreesWithEnumeration) {
  for (auto [k, e] : std::vector<std::pair<int, mpq_class>>{
           {3, mpq_class(1, 3)}, {4, mpq_class(1, 4)}, {5, mpq_class(1, 5)}}) {
    RAInstance r = build_lower_bound(k, e);
    std::vector<std::vector<ConditionedPair>> cases = {{}, {{0, 0}}, {{2, 1}}};
    if (k >= 4) cases.push_back({{3, 3}});
    for (const auto& pairs : cases) {
      if (mpq_class(static_cast<long>(pairs.size())) > e * k) continue;
      EXPECT_EQ(verify_matching_distribution(r, pairs).expected_value, enumerate_conditional(r, pairs)) << k;
    }
  }
  // Two conditioned pairs at k=6, eps=1/3.
  RAInstance r = build_lower_bound(6, mpq_class(1, 3));
  std::vector<ConditionedPair> two = {{1, 4}, {5, 0}};
  EXPECT_EQ(verify_matching_distribution(r, two).expected_value, enumerate_conditional(r, two));
}

TEST(Canonical, OnePlayerExample) {
  RAInstance o;
  o.players = 1;
  o.values = {mpq_class(2)};
  o.eligible = {{0}};
  CanonicalInstance c = canonicalize(o, 1, 1);
  EXPECT_EQ(c.inst.players, 2u);
  EXPECT_EQ(c.inst.num_resources(), 2u);
  EXPECT_EQ(c.inst.values[0], 1);
  EXPECT_EQ(c.inst.values[1], 1);
  EXPECT_TRUE(c.inst.is_big(0));
  EXPECT_TRUE(c.inst.is_big(1));
  EXPECT_EQ(c.inst.eligible[c.small_side[0]], std::vector<std::uint32_t>{1});
  EXPECT_EQ(c.inst.eligible[c.big_side[0]], (std::vector<std::uint32_t>{0, 1}));
  EXPECT_THROW(canonicalize(o, mpq_class(1, 2), 1), RAError);
  EXPECT_THROW(canonicalize(o, 1, 0), RAError);
}

TEST(Canonical, SmallOnlyAndRoundTrips) {
  RAInstance r = build_lower_bound(4, mpq_class(1, 4));
  CanonicalInstance c = canonicalize(r, 4, 1);
  EXPECT_EQ(c.inst.players, 2 * r.players);
  for (std::uint32_t i = 0; i < r.players; ++i)
    EXPECT_EQ(c.inst.eligible[c.big_side[i]], std::vector<std::uint32_t>{c.coupling[i]});
  for (const auto& a : all_matchings(4)) {
    RAAssignment ca = to_canonical(c, a);
    EXPECT_TRUE(assignment_valid(c.inst, ca));
    EXPECT_EQ(from_canonical(c, ca), a);
    EXPECT_EQ(to_canonical(c, from_canonical(c, ca)), ca);
    EXPECT_EQ(assignment_value(c.inst, ca), std::min(assignment_value(r, a), mpq_class(1)));
  }
  // alpha = 1: big resources stay with the big side, value capped at T.
  CanonicalInstance c1 = canonicalize(r, 1, 1);
  RABruteforce opt = bruteforce_ra(r);
  RAAssignment ca = to_canonical(c1, opt.assignment);
  EXPECT_TRUE(assignment_valid(c1.inst, ca));
  EXPECT_EQ(assignment_value(c1.inst, ca), opt.value);
  EXPECT_EQ(assignment_value(r, from_canonical(c1, ca)), opt.value);
  EXPECT_EQ(to_canonical(c1, from_canonical(c1, ca)), ca);
  // Canonical solution of value T maps to one of value T.
  RAInstance big;
  big.players = 2;
  big.values = {mpq_class(3), mpq_class(1, 2), mpq_class(1, 2), mpq_class(5, 2)};
  big.eligible = {{0, 1, 2}, {1, 2, 3}};
  CanonicalInstance cb = canonicalize(big, 2, 1);
  RABruteforce co = bruteforce_ra(cb.inst);
  EXPECT_EQ(co.value, 1);
  EXPECT_GE(assignment_value(big, from_canonical(cb, co.assignment)), 1);
  EXPECT_EQ(bruteforce_ra(big).value, 3);
  RAInstance back = RAInstance::from_json(cb.inst.to_json());
  EXPECT_EQ(back.big, cb.inst.big);
}

TEST(Davies, IntegralLift) {
  RAInstance r = build_lower_bound(4, mpq_class(1, 4));
  CanonicalInstance c = canonicalize(r, 1, 1);
  RAAssignment a = all_matchings(4)[7];
  SAWitness y = lift_from_distribution(c, {{a, mpq_class(1)}});
  DaviesReport d = map_sa1_to_davies(c, y);
  RAAssignment ca = to_canonical(c, a);
  for (std::uint32_t p = 0; p < c.inst.players; ++p)
    for (const auto& [j, v] : d.x[p]) EXPECT_EQ(v, ca[j] == p ? 1 : 0) << p << " " << j;
  // Packing and exclusion always hold; value 3 eps falls short of T for the
  // unmatched player, as the integral optimum says.
  EXPECT_TRUE(d.packing.passed());
  EXPECT_TRUE(d.exclusion.passed());
  EXPECT_EQ(d.covering.violated(), 1u);
  EXPECT_EQ(d.covering.worst_covering()->factor->rational(), mpq_class(3, 4));
}

TEST(Davies, ProductLift) {
  // One player, three smalls and a big resource; y_pair = y_s * y_c.
  RAInstance o;
  o.players = 1;
  o.values = {mpq_class(1, 2), mpq_class(1, 2), mpq_class(1, 2), mpq_class(4)};
  o.eligible = {{0, 1, 2, 3}};
  CanonicalInstance c = canonicalize(o, 2, 1);
  SAWitness y;
  y.single.resize(2);
  y.pair.resize(2);
  mpq_class ys(2, 3), yb(2, 3), yc(2, 3);
  std::uint32_t s = c.small_side[0], b = c.big_side[0], cp = c.coupling[0];
  y.single[s] = {{0, ys}, {1, ys}, {2, ys}, {cp, yc}};
  y.single[b] = {{3, yb}, {cp, 1 - yc}};
  y.pair[s] = {{0, ys * yc}, {1, ys * yc}, {2, ys * yc}};
  DaviesReport d = map_sa1_to_davies(c, y);
  EXPECT_EQ(d.x[s][0], ys * (1 - yc));
  EXPECT_TRUE(d.passed()) << d.to_json().dump(1);
  // Third constraint slack: x_s = y_s (1 - y_c) < 1 - y_c.
  EXPECT_LT(d.x[s][0], 1 - yc);
  EXPECT_EQ(d.to_json().dump(), map_sa1_to_davies(c, y).to_json().dump());

  SAWitness bad = y;
  bad.pair[s][0] = yc + mpq_class(1, 100);
  EXPECT_THROW(map_sa1_to_davies(c, bad), RAError);
  SAWitness missing = y;
  missing.pair[s].erase(1);
  EXPECT_THROW(map_sa1_to_davies(c, missing), RAError);
  SAWitness out_of_range = y;
  out_of_range.single[b][3] = mpq_class(3, 2);
  EXPECT_THROW(map_sa1_to_davies(c, out_of_range), RAError);
}

TEST(Davies, DistributionLiftOnLowerBound) {
  for (auto [k, e] : std::vector<std::pair<int, mpq_class>>{
           {12, mpq_class(1, 12)}, {9, mpq_class(1, 3)}, {6, mpq_class(1, 6)}, {3, mpq_class(1, 3)}}) {
    RAInstance r = build_lower_bound(k, e);
    CanonicalInstance c = canonicalize(r, 4, 1);
    std::vector<std::vector<std::pair<std::vector<std::uint32_t>, mpq_class>>> laws;
    for (std::uint32_t i = 0; i < r.players; ++i) laws.push_back(player_bundle_law(r, i));
    DaviesReport d = map_sa1_to_davies(c, lift_from_bundles(c, laws));
    EXPECT_TRUE(d.passed()) << k << d.to_json().dump(1);
    // Small-side value: the smalls plus k/(k+1) of the unit resources.
    for (std::uint32_t i = 0; i < r.players; ++i) {
      mpq_class v = 0;
      for (const auto& [j, x] : d.x[c.small_side[i]]) v += c.inst.values[j] * x;
      EXPECT_EQ(v, mpq_class(k, k + 1) + 3 * e);
    }
  }
  // Per-player laws give the same y as the joint distribution.
  for (int k : {3, 4}) {
    RAInstance r = build_lower_bound(k, mpq_class(1, k));
    for (mpq_class alpha : {mpq_class(1), mpq_class(4)}) {
      CanonicalInstance c = canonicalize(r, alpha, 1);
      auto ms = all_matchings(k);
      std::vector<std::pair<RAAssignment, mpq_class>> dist;
      for (const auto& a : ms) dist.push_back({a, mpq_class(1, static_cast<long>(ms.size()))});
      std::vector<std::vector<std::pair<std::vector<std::uint32_t>, mpq_class>>> laws;
      for (std::uint32_t i = 0; i < r.players; ++i) laws.push_back(player_bundle_law(r, i));
      SAWitness joint = lift_from_distribution(c, dist), local = lift_from_bundles(c, laws);
      EXPECT_EQ(joint.single, local.single);
      EXPECT_EQ(joint.pair, local.pair);
    }
  }
}

TEST(Davies, UnitAlphaContrast) {
  // With alpha = 1 the unit resources are big and x_is = y_is - y_pair drops
  // the small value whenever a big one is held, leaving k/(k+1) + 3 eps/(k+1).
  int k = 12;
  mpq_class e(1, 12);
  RAInstance r = build_lower_bound(k, e);
  CanonicalInstance c = canonicalize(r, 1, 1);
  std::vector<std::vector<std::pair<std::vector<std::uint32_t>, mpq_class>>> laws;
  for (std::uint32_t i = 0; i < r.players; ++i) laws.push_back(player_bundle_law(r, i));
  DaviesReport d = map_sa1_to_davies(c, lift_from_bundles(c, laws));
  EXPECT_TRUE(d.packing.passed());
  EXPECT_TRUE(d.exclusion.passed());
  EXPECT_EQ(d.covering.violated(), static_cast<std::uint64_t>(k + 1));
  EXPECT_EQ(d.covering.worst_covering()->factor->rational(), mpq_class(k, k + 1) + 3 * e / (k + 1));
}
