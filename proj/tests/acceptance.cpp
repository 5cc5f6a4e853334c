// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mmda/appendixb/config_lp.hpp"
#include "mmda/cli/run.hpp"
#include "mmda/instances/appendix_instances.hpp"
#include "mmda/instances/mmda_builder.hpp"
#include "mmda/integral/bruteforce.hpp"
#include "mmda/integral/certificate.hpp"
#include "mmda/numerics/proof_functions.hpp"
#include "mmda/relaxations/assignment_check.hpp"
#include "mmda/relaxations/path_counting.hpp"
#include "mmda/relaxations/path_hierarchy.hpp"
#include "mmda/relaxations/subtree_family.hpp"
#include "mmda/restricted/canonical.hpp"
#include "mmda/restricted/matching.hpp"
#include "mmda/rounding/audit.hpp"
#include "mmda/shadow/checks.hpp"
#include "mmda/shadow/controls.hpp"
#include "mmda/shadow/monte_carlo.hpp"
#include "test_support.hpp"

using namespace mmda;
using instances::build_mmda;
using instances::LayeredInstance;
using numerics::binomial;
using numerics::Scalar;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream note;

  void need(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      note << " FAILED(" << what << ")";
    }
  }
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

mpq_class ratio(const mpz_class& a, const mpz_class& b) {
  mpq_class q(a, b);
  q.canonicalize();
  return q;
}

bool same(const Scalar& a, const Scalar& b) {
  return numerics::compare_certified(a, b) == numerics::Ordering::kEqual;
}

const LayeredInstance& g8() {
  static LayeredInstance g = build_mmda(8, mpq_class(1, 4), 3);
  return g;
}

const LayeredInstance& g16h() {
  static LayeredInstance g = build_mmda(16, mpq_class(1, 4), 6);
  return g;
}

void c1(Outcome& o) {
  for (const LayeredInstance* g : {&g8(), &g16h()}) {
    auto t0 = Clock::now();
    relaxations::ViolationReport r = relaxations::verify_assignment(*g, relaxations::assignment_solution(*g));
    double s = since(t0);
    o.need(r.passed() && r.violated() == 0, "violations at m=" + std::to_string(g->params()->m));
    o.need(s < 60, "runtime");
    o.note << " m=" << g->params()->m << " checked=" << r.checked() << " (" << s << " s)";
  }
}

void c2(Outcome& o) {
  std::size_t n = 0;
  for (const auto& p : mmda::testing::valid_params(4, 20)) {
    auto prof = instances::mmda_profile(p);
    int r = p.rho_m(), phases = p.phases();
    Scalar prod(1);
    bool good = true;
    for (int i = 0; i < 3 * phases; ++i) {
      prod = prod * prof[i].gamma * Scalar(*prof[i].delta_plus);
      if (i + 1 == phases)
        good = good && same(prod, Scalar(mpq_class(binomial(p.m, r), binomial(p.m - r, r))));
      if (i + 1 == 2 * phases) good = good && same(prod, Scalar(mpq_class(binomial(p.m, r), binomial(2 * r, r))));
    }
    good = good && same(prod, Scalar(binomial(p.m, r)));
    o.need(good, "m=" + std::to_string(p.m) + " ell=" + std::to_string(p.ell));
    ++n;
  }
  o.note << " params=" << n;
}

void c3(Outcome& o) {
  for (int m : {8, 12}) {
    LayeredInstance g = build_mmda(m, mpq_class(1, 4), 3);
    relaxations::DepthThreeFamily fam(g);
    relaxations::ViolationReport lp = relaxations::verify_subtree_family(fam);
    relaxations::ViolationReport flow = relaxations::flow_splitting_report(fam);
    int r = m / 4;
    bool target = fam.sink_inflow().rational() == ratio(binomial(m - r, r), binomial(m, r));
    o.need(lp.passed(), "subtree LP m=" + std::to_string(m));
    o.need(flow.passed(), "flow splitting m=" + std::to_string(m));
    o.need(target, "sink inflow m=" + std::to_string(m));
    o.note << " m=" << m << " lp_checks=" << lp.checked() << " sink_checks=" << flow.checked()
           << " inflow=" << fam.sink_inflow().to_string();
  }
}

void c4(Outcome& o) {
  for (int m : {8, 12, 16}) {
    LayeredInstance g = build_mmda(m, mpq_class(1, 4), 3);
    shadow::ShadowModel model = shadow::depth_three_model(g);
    shadow::ShadowEngine eng(model, false);
    shadow::MarginalReport r = shadow::marginal_report(eng);
    o.need(r.bounds.passed(), "bounds m=" + std::to_string(m));
    o.need(r.identities.passed(), "identities m=" + std::to_string(m));
    o.need(r.identities.checked() == g.num_edges(), "identity count m=" + std::to_string(m));
    o.note << " m=" << m << " edges=" << g.num_edges();
  }
}

void c5(Outcome& o) {
  shadow::ShadowModel model = shadow::depth_three_model(g8());
  shadow::ShadowEngine eng(model);
  auto t0 = Clock::now();
  shadow::McComparison c = shadow::compare_with_exact(eng, 20240601, 100000);
  shadow::MarginalReport r = shadow::marginal_report(eng);
  double s = since(t0);
  o.need(c.passed(), "monte carlo");
  o.need(r.reversal.passed() && r.reversal.checked() == g8().num_edges(), "reversal");
  o.need(s < 600, "runtime");
  o.note << " samples=100000 events=" << c.events << " conditional_pools=" << c.conditionals.pools
         << " max|z|=" << c.conditionals.max_abs_z << " (" << s << " s)";
}

void c6(Outcome& o) {
  const auto& g = g8();
  shadow::ControlReport ind = shadow::independent_covering_control(g);
  Scalar x1 = relaxations::assignment_solution(g).value(g.edge_layer_begin(1));
  o.need(ind.report.passed() && ind.extreme, "independent control");
  o.need(ind.extreme && same(*ind.extreme, x1) && x1.rational() <= mpq_class(1, 15), "slack equals x_e1");
  shadow::ControlReport two = shadow::two_layer_packing_control(g);
  mpq_class want = ratio(binomial(6, 2), binomial(4, 2));
  o.need(two.report.passed() && two.extreme, "two-layer control");
  o.need(two.extreme && two.extreme->rational() == want, "sink sum");
  if (ind.extreme) o.note << " slack=" << ind.extreme->to_string();
  if (two.extreme) o.note << " sink_sum=" << two.extreme->to_string();
}

void c7(Outcome& o) {
  std::size_t n = 0;
  for (const auto& p : mmda::testing::valid_params(4, 12)) {
    LayeredInstance g = build_mmda(p);
    std::vector<instances::VertexId> all;
    for (instances::VertexId v = 0; v < g.num_vertices(); ++v) all.push_back(v);
    o.need(relaxations::check_path_counts(g, all, g.depth()).passed(), "exhaustive m=" + std::to_string(p.m));
    ++n;
  }
  const auto& g = g16h();
  std::vector<instances::VertexId> sample;
  for (int i = 0; i < g.depth(); ++i)
    for (instances::VertexId v = g.layer_begin(i); v < g.layer_end(i); v += 97) sample.push_back(v);
  relaxations::ViolationReport s = relaxations::check_path_counts(g, sample, g.depth());
  o.need(s.passed(), "sampled m=16");
  relaxations::HelperLemmaReport h = relaxations::check_helper_lemma(g, mpq_class(1, 3));
  o.need(h.checks.passed() && h.certified_distance >= 2, "count bound");
  o.note << " exhaustive_params=" << n << " sampled_sources=" << sample.size() << " certified_distance="
         << h.certified_distance;
}

void c8(Outcome& o) {
  relaxations::PathHierarchyReport r = relaxations::verify_path_hierarchy(relaxations::PathSolution(g16h(), 2));
  for (const auto* part : r.parts()) {
    o.need(part->passed() && part->violated() == 0, part->name());
    o.note << " " << part->name() << "=" << part->checked();
  }
}

void c9(Outcome& o) {
  using namespace integral;
  LayeredInstance m4 = build_mmda(4, mpq_class(1, 4), 3).with_integral_requirements();
  BruteforceResult f = bruteforce_best(m4);
  o.need(f.complete && f.quality.alpha.rational() == 1, "m=4 quality");
  LayeredInstance c4 = instances::build_subtree_counterexample(4);
  BruteforceResult a = bruteforce_best(c4);
  o.need(a.complete && a.quality.alpha.rational() <= mpq_class(3, 4), "counterexample quality");
  o.note << " m4=" << f.quality.alpha.to_string() << " counterexample(k=4)=" << a.quality.alpha.to_string();
  std::size_t compared = 0;
  for (const LayeredInstance& g : {build_mmda(4, mpq_class(1, 4), 3), m4, g8(), g8().with_integral_requirements()}) {
    BruteforceResult b = bruteforce_best(g);
    if (!b.complete) continue;
    for (auto v = g.layer_begin(1); v < g.layer_end(1); ++v) {
      CountingCertificate c = counting_certificate(g, v);
      if (!c.quality_bound()) continue;
      ++compared;
      o.need(numerics::certified_leq(b.quality.alpha, *c.quality_bound()), "certificate below optimum");
    }
  }
  o.need(compared > 0, "no certificate compared");
  o.note << " certificate_comparisons=" << compared;
}

void c10(Outcome& o) {
  using namespace restricted;
  struct P {
    int k;
    mpq_class eps;
  };
  for (const P& p : {P{12, mpq_class(1, 12)}, P{9, mpq_class(1, 3)}, P{6, mpq_class(1, 6)}}) {
    RAInstance inst = build_lower_bound(p.k, p.eps);
    std::string tag = "k=" + std::to_string(p.k);
    for (const auto& r : matching_sweep(inst)) o.need(r.at_least_one, "matching " + tag);
    CanonicalInstance ci = canonicalize(inst, mpq_class(4), inst.target);
    std::vector<std::vector<std::pair<std::vector<std::uint32_t>, mpq_class>>> laws;
    for (std::uint32_t i = 0; i < inst.players; ++i) laws.push_back(player_bundle_law(inst, i));
    DaviesReport d = map_sa1_to_davies(ci, lift_from_bundles(ci, laws));
    o.need(d.passed() && d.covering.violated() + d.packing.violated() + d.exclusion.violated() == 0,
           "davies " + tag);
  }
  std::size_t brute = 0;
  for (int k = 2; k <= 6; ++k)
    for (int c = 1; c <= k; ++c) {
      if (k % c || 3 * c > k) continue;
      mpq_class eps = ratio(c, k);
      RABruteforce b = bruteforce_ra(build_lower_bound(k, eps));
      o.need(b.value == 3 * eps, "bruteforce k=" + std::to_string(k));
      ++brute;
    }
  o.note << " bruteforce_instances=" << brute;
}

void c11(Outcome& o) {
  using numerics::scan_proof_function;
  auto t0 = Clock::now();
  mpq_class lo(1, 10000), hi(1, 100);
  auto fp = scan_proof_function("f_packing", lo, hi, 100);
  o.need(fp.all_hold && fp.undecided.empty(), "f_packing");
  auto gi = scan_proof_function("g_integral", lo, hi, 100);
  o.need(gi.all_hold && gi.undecided.empty(), "g_integral");
  mpq_class rho(1, 100);
  auto f1 = scan_proof_function("f1_appendix", mpq_class(2), mpq_class(203, 100), 31, rho);
  auto f2 = scan_proof_function("f2_appendix", mpq_class(197, 100), mpq_class(2), 31, rho);
  mpq_class d1 = f1.run_from_lo_end ? mpq_class(f1.points[*f1.run_from_lo_end].x - 2) : mpq_class(0);
  mpq_class d2 = f2.run_from_hi_start ? mpq_class(2 - f2.points[*f2.run_from_hi_start].x) : mpq_class(0);
  o.need(d1 > 0, "delta1");
  o.need(d2 > 0, "delta2");
  for (const char* name : {"k_bound_phase1", "k_bound_phase2", "k_bound_phase3"}) {
    auto r = scan_proof_function(name, mpq_class(1, 1000), mpq_class(1, 1000), 1, mpq_class(0), mpq_class(1, 100));
    o.need(r.points[0].sign == 1, name);
  }
  double s = since(t0);
  o.need(s < 60, "runtime");
  o.note << " delta1=" << d1.get_str() << " delta2=" << d2.get_str() << " (" << s << " s)";
}

void c12(Outcome& o) {
  for (const LayeredInstance* g : {&g8(), &g16h()}) {
    std::string tag = " m=" + std::to_string(g->params()->m);
    o.need(rounding::expected_children_identity(*g).passed(), "children identity" + tag);
    o.need(rounding::expected_congestion(*g, 1).passed(), "congestion" + tag);
  }
  rounding::SeedStudy s = rounding::seed_study(g8(), 10000, 1, 1);
  o.need(s.means_within() && s.truncated == 0, "children means");
  o.note << " seeds=" << s.seeds;
  for (const auto& l : s.layers) o.note << " L" << l.layer << "_z=" << l.z;
}

void c13(Outcome& o) {
  auto cfg = [](const std::string& cmd) {
    cli::RunConfig c;
    c.command = cmd;
    c.seed = 7;
    c.samples = 2000;
    c.seeds = 20;
    return c;
  };
  std::vector<cli::RunConfig> runs;
  for (const char* cmd : {"build", "verify-lp", "shadow-sample", "locally-good", "ra", "bruteforce", "scan"})
    runs.push_back(cfg(cmd));
  runs[2].compare = true;
  runs[6].fn = "g_integral";
  runs[6].lo = "1e-4";
  runs[6].hi = "1e-2";
  for (auto& c : runs) {
    std::string a = cli::render(cli::run(c).report, "json");
    std::string b = cli::render(cli::run(c).report, "json");
    o.need(a == b, c.command);
    o.need(cli::render(cli::run(c).report, "csv") == cli::render(cli::run(c).report, "csv"), c.command + " csv");
  }
  rounding::SampledPathForest f1 = rounding::sample_forest(g16h(), 42), f2 = rounding::sample_forest(g16h(), 42);
  o.need(f1.to_json(true).dump() == f2.to_json(true).dump(), "forest");
  o.note << " commands=" << runs.size();
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Outcome&)> fn;
  };
  const std::vector<Criterion> all = {
      {1, "exact assignment LP feasibility", c1},
      {2, "degree desiderata products", c2},
      {3, "subtree solutions and flow splitting", c3},
      {4, "shadow marginals", c4},
      {5, "conditional engine against Monte Carlo", c5},
      {6, "negative controls", c6},
      {7, "path counting", c7},
      {8, "path hierarchy", c8},
      {9, "integral gap at desk scale", c9},
      {10, "restricted assignment", c10},
      {11, "proof-function scans", c11},
      {12, "rounding sampler", c12},
      {13, "determinism", c13},
  };
  int failed = 0;
  for (const auto& c : all) {
    Outcome o;
    auto t0 = Clock::now();
    try {
      c.fn(o);
    } catch (const std::exception& e) {
      o.ok = false;
      o.note << " exception: " << e.what();
    }
    if (!o.ok) ++failed;
    std::printf("[%s] %2d %s (%.1f s)%s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, since(t0), o.note.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed ? 1 : 0;
}
