#pragma once

#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mmda/appendixb/config_lp.hpp"
#include "mmda/instances/appendix_instances.hpp"
#include "mmda/instances/json_io.hpp"
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
#include "mmda/shadow/certificate.hpp"
#include "mmda/shadow/controls.hpp"
#include "mmda/shadow/monte_carlo.hpp"
#include "mmda/util/rng.hpp"

namespace mmda::cli {

using instances::LayeredInstance;
using instances::VertexId;
using numerics::Scalar;
using relaxations::ViolationReport;

enum ExitCode : int { kPass = 0, kUsage = 2, kUndecided = 3, kFailed = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;

  // Instance selection.
  std::string instance_file;
  std::string family = "mmda";  // mmda | config_lp_gap | subtree_counterexample
  int m = 8;
  std::string rho = "1/4";
  int ell = 3;
  std::optional<int> k;
  bool integral_requirements = false;

  std::uint64_t seed = 1;
  std::uint64_t samples = 10000;
  std::uint64_t seeds = 100;
  int radius = 1;
  int rounds = 2;
  std::string output;       // empty: stdout
  std::string format = "json";
  std::optional<long> precision_cap;

  // verify-lp
  std::string allowance = "1";
  bool subtrees = false;
  // verify-paths
  bool explicit_route = false;
  std::uint64_t max_paths = 10'000'000;
  // count-paths
  std::optional<VertexId> from, to;
  std::optional<std::uint64_t> sample_sources;
  std::string xi = "1/3";
  // sa1-report / shadow-sample
  std::string model = "subtree";  // subtree | independent
  std::string floor = "1/2", ceiling = "4";
  std::optional<std::string> truncation;
  std::vector<std::uint64_t> events;
  bool no_certificate = false;
  bool exact = false, compare = false;
  bool negative = false;
  double tolerance = 4;
  // bruteforce / certificate
  std::uint64_t budget = 20'000'000;
  std::optional<int> threshold;
  std::optional<VertexId> vertex;
  // ra
  std::string eps = "1/12";
  std::string alpha = "4";
  std::optional<bool> ra_bruteforce;
  std::string ra_instance;
  // appendixb
  int control_m = 8;
  // scan
  std::string fn;
  std::string lo, hi;
  std::size_t resolution = 101;
  std::string scan_rho = "1/4", scan_eps = "1/100";
};

struct RunResult {
  int exit_code = kPass;
  Json report;
};

inline mpq_class parse_q(const std::string& s, const std::string& what) {
  try {
    Scalar v = Scalar::parse(s);
    if (!v.is_rational()) throw UsageError(what + " must be rational");
    return v.rational();
  } catch (const numerics::DomainError&) {
    throw UsageError("cannot parse " + what + " '" + s + "'");
  }
}

// Outcome of each asserted check, in the order they ran.
class Status {
 public:
  void absorb(const std::string& name, const ViolationReport& r) {
    add(name, r.violated() ? "fail" : r.undecided() ? "undecided" : "pass");
  }
  void require(const std::string& name, bool ok) { add(name, ok ? "pass" : "fail"); }
  void undecided(const std::string& name) { add(name, "undecided"); }

  int code() const { return failed_ ? kFailed : undecided_ ? kUndecided : kPass; }
  const char* label() const { return failed_ ? "fail" : undecided_ ? "undecided" : "pass"; }
  Json to_json() const { return checks_; }

 private:
  void add(const std::string& name, const char* s) {
    checks_.push_back({{"check", name}, {"status", s}});
    failed_ = failed_ || std::string(s) == "fail";
    undecided_ = undecided_ || std::string(s) == "undecided";
  }
  Json checks_ = Json::array();
  bool failed_ = false, undecided_ = false;
};

inline Json config_json(const RunConfig& c) {
  Json j;
  const std::string& cmd = c.command;
  if (cmd == "ra") {
    if (!c.ra_instance.empty()) {
      j["instance_file"] = c.ra_instance;
    } else {
      j["k"] = c.k.value_or(12);
      j["eps"] = c.eps;
    }
    j["alpha"] = c.alpha;
  } else if (cmd == "appendixb") {
    j["k"] = c.k.value_or(3);
    j["control_m"] = c.control_m;
  } else if (cmd == "appendixc") {
    j["k"] = c.k.value_or(4);
    j["budget"] = c.budget;
  } else if (cmd == "scan") {
    j["fn"] = c.fn;
    j["lo"] = c.lo;
    j["hi"] = c.hi;
    j["resolution"] = c.resolution;
    j["rho"] = c.scan_rho;
    j["eps"] = c.scan_eps;
  } else if (!c.instance_file.empty()) {
    j["instance_file"] = c.instance_file;
  } else {
    j["family"] = c.family;
    if (c.family == "mmda") {
      j["m"] = c.m;
      j["rho"] = c.rho;
      j["ell"] = c.ell;
    }
    if (c.k) j["k"] = *c.k;
  }
  if (c.integral_requirements) j["integral_requirements"] = true;
  if (cmd == "shadow-sample" || cmd == "locally-good" || cmd == "count-paths") j["seed"] = c.seed;
  if (cmd == "shadow-sample") {
    j["samples"] = c.samples;
    j["mode"] = c.exact ? "exact" : c.compare ? "compare" : "mc";
    j["model"] = c.model;
  }
  if (cmd == "locally-good") {
    j["seeds"] = c.seeds;
    j["radius"] = c.radius;
  }
  if (cmd == "sa1-report") {
    j["model"] = c.model;
    j["floor"] = c.floor;
    j["ceiling"] = c.ceiling;
  }
  if (!c.events.empty()) j["events"] = c.events;
  if (c.precision_cap) j["precision_cap"] = *c.precision_cap;
  return j;
}

inline LayeredInstance load_instance(const RunConfig& c, int default_k = 3) {
  LayeredInstance g;
  if (!c.instance_file.empty()) {
    std::ifstream in(c.instance_file);
    if (!in) throw UsageError("cannot open " + c.instance_file);
    Json j;
    try {
      in >> j;
    } catch (const Json::exception& e) {
      throw UsageError(std::string("bad instance JSON: ") + e.what());
    }
    g = instances::instance_from_json(j);
  } else if (c.family == "mmda") {
    g = instances::build_mmda(c.m, parse_q(c.rho, "rho"), c.ell);
  } else if (c.family == "config_lp_gap") {
    g = instances::build_config_lp_gap(c.k.value_or(default_k));
  } else if (c.family == "subtree_counterexample") {
    g = instances::build_subtree_counterexample(c.k.value_or(default_k));
  } else {
    throw UsageError("unknown family " + c.family);
  }
  if (c.integral_requirements) g = g.with_integral_requirements();
  return g;
}

inline Json hierarchy_json(const relaxations::PathHierarchyReport& r) {
  Json j;
  j["route"] = r.route;
  j["paths_enumerated"] = r.paths_enumerated;
  j["passed"] = r.passed();
  Json parts = Json::array();
  for (const auto* p : r.parts()) parts.push_back(p->to_json());
  j["constraints"] = parts;
  return j;
}

inline Json helper_json(const relaxations::HelperLemmaReport& h) {
  Json j;
  j["certified_distance"] = h.certified_distance;
  j["xi_star"] = h.xi_star.get_str();
  Json rows = Json::array();
  for (const auto& r : h.rows)
    rows.push_back({{"i", r.i}, {"j", r.j}, {"max_paths", r.max_paths.get_str()},
                    {"inverse_gamma_product", scalar_json(r.inverse_gamma_product)},
                    {"ordering", numerics::to_string(r.ordering)}});
  j["rows"] = rows;
  j["checks"] = h.checks.to_json();
  return j;
}

inline Json scan_json(const numerics::ScanReport& r) {
  Json j;
  j["function"] = r.name;
  j["variable"] = r.variable;
  j["condition"] = numerics::to_string(r.condition);
  j["rho"] = r.rho.get_str();
  j["eps"] = r.eps.get_str();
  j["all_hold"] = r.all_hold;
  j["undecided"] = r.undecided;
  j["longest_run"] = r.longest_run ? Json{r.longest_run->first, r.longest_run->second} : Json(nullptr);
  j["run_from_lo_end"] = r.run_from_lo_end ? Json(*r.run_from_lo_end) : Json(nullptr);
  j["run_from_hi_start"] = r.run_from_hi_start ? Json(*r.run_from_hi_start) : Json(nullptr);
  Json pts = Json::array();
  for (const auto& p : r.points)
    pts.push_back({{"x", p.x.get_str()}, {"x_approx", p.x.get_d()}, {"sign", p.sign ? Json(*p.sign) : Json(nullptr)},
                   {"enclosure", p.enclosure}, {"holds", p.holds}});
  j["points"] = pts;
  return j;
}

namespace detail {

inline Json cmd_build(const RunConfig& c, Status&) { return instances::instance_to_json(load_instance(c)); }

inline Json cmd_verify_lp(const RunConfig& c, Status& st) {
  LayeredInstance g = load_instance(c, 4);
  relaxations::AssignmentCheckOptions opt;
  opt.congestion_allowance = Scalar(parse_q(c.allowance, "allowance"));
  relaxations::EdgeSolution x = g.family() == instances::Family::kSubtreeCounterexample
                                    ? shadow::appendix_c_base_solution(g)
                                    : g.family() == instances::Family::kMmda
                                          ? relaxations::assignment_solution(g)
                                          : throw UsageError("no closed-form LP solution for this family");
  ViolationReport r = relaxations::verify_assignment(g, x, opt);
  st.absorb("assignment_lp", r);
  Json j;
  j["assignment_lp"] = r.to_json();
  if (c.subtrees) {
    auto fam = relaxations::subtree_solutions(g);
    ViolationReport s = relaxations::verify_subtree_family(*fam);
    st.absorb("subtree_solutions", s);
    j["subtree_solutions"] = s.to_json();
    if (auto* d3 = dynamic_cast<const relaxations::DepthThreeFamily*>(fam.get())) {
      ViolationReport f = relaxations::flow_splitting_report(*d3);
      st.absorb("flow_splitting", f);
      j["flow_splitting"] = f.to_json();
    }
  }
  return j;
}

inline Json cmd_verify_paths(const RunConfig& c, Status& st) {
  LayeredInstance g = load_instance(c);
  relaxations::PathSolution ps(g, c.rounds);
  auto r = c.explicit_route ? relaxations::verify_path_hierarchy_explicit(ps, c.max_paths)
                            : relaxations::verify_path_hierarchy(ps);
  for (const auto* p : r.parts()) st.absorb(p->name(), *p);
  Json j = hierarchy_json(r);
  j["rounds"] = c.rounds;
  return j;
}

inline Json cmd_count_paths(const RunConfig& c, Status& st) {
  LayeredInstance g = load_instance(c);
  Json j;
  if (c.from || c.to) {
    if (!c.from || !c.to) throw UsageError("--from and --to go together");
    g.check_vertex(*c.from);
    g.check_vertex(*c.to);
    mpz_class n = relaxations::count_paths(g, *c.from, *c.to);
    j["from"] = *c.from;
    j["to"] = *c.to;
    j["paths"] = n.get_str();
    if (g.family() == instances::Family::kMmda && g.layer_of(*c.to) >= g.layer_of(*c.from) && n > 0) {
      int i = g.layer_of(*c.from), jj = g.layer_of(*c.to);
      int u = std::popcount(g.label(*c.from) | g.label(*c.to));
      mpz_class cf = relaxations::closed_form_paths(g, i, jj, u);
      j["closed_form"] = cf.get_str();
      st.require("closed_form", cf == n);
    }
    return j;
  }
  std::vector<VertexId> sources;
  if (c.sample_sources) {
    for (std::uint64_t i = 0; i < *c.sample_sources; ++i)
      sources.push_back(static_cast<VertexId>(util::counter_draw(c.seed, i, 0, 0, 0) % g.num_vertices()));
  } else {
    for (VertexId v = 0; v < g.num_vertices(); ++v) sources.push_back(v);
  }
  ViolationReport r = relaxations::check_path_counts(g, sources, g.depth());
  st.absorb("path_counts", r);
  j["sources"] = sources.size();
  j["path_counts"] = r.to_json();
  if (g.family() == instances::Family::kMmda) {
    auto h = relaxations::check_helper_lemma(g, parse_q(c.xi, "xi"));
    st.absorb("count_vs_inverse_gamma", h.checks);
    j["xi"] = c.xi;
    j["count_vs_inverse_gamma"] = helper_json(h);
  }
  return j;
}

inline shadow::ShadowModel pick_model(const RunConfig& c, const LayeredInstance& g) {
  if (g.family() == instances::Family::kSubtreeCounterexample) return shadow::appendix_c_model(g);
  if (c.model == "independent") return shadow::independent_model(g);
  if (c.model != "subtree") throw UsageError("--model is subtree or independent");
  return shadow::depth_three_model(g);
}

inline Json cmd_sa1_report(const RunConfig& c, Status& st) {
  LayeredInstance g = load_instance(c, 4);
  if (!shadow::is_depth_three(g)) throw UsageError("sa1-report needs a depth-3 instance");
  shadow::ShadowModel model = pick_model(c, g);
  Json j;
  j["model"] = model.name();
  ViolationReport v = shadow::validate_model(model);
  st.absorb("model", v);
  j["model_validation"] = v.to_json();
  shadow::ShadowEngine eng(model, !c.no_certificate);
  shadow::MarginalReport mr = shadow::marginal_report(eng);
  st.absorb("marginal_bounds", mr.bounds);
  st.absorb("reversal_bound", mr.reversal);
  // The closed forms describe the subtree model only.
  if (c.model == "subtree" || g.family() != instances::Family::kMmda) st.absorb("layer_identities", mr.identities);
  st.absorb("multiplicity", mr.multiplicity);
  j["marginals"] = mr.to_json();
  if (g.family() == instances::Family::kMmda) {
    auto ic = shadow::independent_covering_control(g);
    auto tp = shadow::two_layer_packing_control(g);
    st.absorb("independent_covering_control", ic.report);
    st.absorb("two_layer_packing_control", tp.report);
    j["controls"] = {ic.to_json(), tp.to_json()};
  }
  if (!c.no_certificate) {
    shadow::Sa1Options opt;
    opt.covering_floor = Scalar(parse_q(c.floor, "floor"));
    opt.packing_ceiling = Scalar(parse_q(c.ceiling, "ceiling"));
    if (c.truncation) opt.truncation = Scalar(parse_q(*c.truncation, "truncation"));
    for (auto e : c.events) {
      if (e >= g.num_edges()) throw UsageError("event edge out of range");
      opt.events.push_back(static_cast<instances::EdgeId>(e));
    }
    shadow::Sa1Certificate cert = shadow::sa1_certificate(eng, opt);
    st.absorb("sa1_covering", cert.covering);
    st.absorb("sa1_packing", cert.packing);
    st.absorb("sa1_truncation", cert.truncation);
    j["certificate"] = cert.to_json();
  }
  return j;
}

inline Json cmd_shadow_sample(const RunConfig& c, Status& st) {
  LayeredInstance g = load_instance(c, 4);
  if (!shadow::is_depth_three(g)) throw UsageError("shadow-sample needs a depth-3 instance");
  shadow::ShadowModel model = pick_model(c, g);
  std::optional<shadow::ConditionEvent> ev;
  if (!c.events.empty()) {
    if (c.events.size() > 1) throw UsageError("shadow-sample takes at most one --event");
    if (c.events[0] >= g.num_edges()) throw UsageError("event edge out of range");
    ev = shadow::ConditionEvent{static_cast<instances::EdgeId>(c.events[0]),
                                c.negative ? shadow::EventSign::kNegative : shadow::EventSign::kPositive};
  }
  Json j;
  j["model"] = model.name();
  if (c.exact) {
    shadow::ShadowEngine eng(model, false);
    j["exact"] = shadow::moment_report_json(eng.conditional_report(ev), g);
    return j;
  }
  if (c.compare) {
    shadow::ShadowEngine eng(model);
    shadow::McOptions opt;
    opt.tolerance = c.tolerance;
    shadow::McComparison r = shadow::compare_with_exact(eng, c.seed, c.samples, opt);
    st.require("marginal_pools", r.marginals.passed());
    st.require("conditional_pools", r.conditionals.passed());
    st.require("multiplicity_pools", r.multiplicity.passed());
    st.require("multiplicity_bound", r.multiplicity_bound.passed());
    j["comparison"] = r.to_json();
    return j;
  }
  shadow::EmpiricalMoments m = shadow::sample(model, c.seed, c.samples, c.rounds, ev);
  j["sampled"] = m.to_json(g);
  return j;
}

inline Json certificate_bound_json(const LayeredInstance& g, const Scalar& opt, Status& st) {
  if (g.family() != instances::Family::kMmda || !g.params()) return nullptr;
  integral::CountingCertificate cc = integral::counting_certificate(g, g.layer_begin(g.params()->phases()));
  Json j = cc.to_json();
  auto b = cc.quality_bound();
  if (b) {
    auto o = numerics::compare_certified(opt, *b);
    if (o == numerics::Ordering::kUndecided) st.undecided("certificate_bound_covers_optimum");
    else st.require("certificate_bound_covers_optimum", o != numerics::Ordering::kGreater);
  }
  return j;
}

inline Json cmd_bruteforce(const RunConfig& c, Status& st) {
  LayeredInstance g = load_instance(c, 4);
  integral::BruteforceOptions opt;
  opt.node_budget = c.budget;
  integral::BruteforceResult r = integral::bruteforce_best(g, opt);
  if (!r.complete) st.undecided("search_complete");
  Json j = r.to_json();
  j["certificate"] = certificate_bound_json(g, r.quality.alpha, st);
  return j;
}

inline Json cmd_certificate(const RunConfig& c, Status& st) {
  if (c.family != "mmda" && c.instance_file.empty()) throw UsageError("the certificate needs an MMDA instance");
  if (c.vertex || !c.instance_file.empty()) {
    LayeredInstance g = load_instance(c);
    if (!g.params()) throw UsageError("the certificate needs an MMDA instance");
    VertexId v = c.vertex.value_or(g.layer_begin(g.params()->phases()));
    g.check_vertex(v);
    integral::CountingCertificate cc = integral::counting_certificate(g, v, c.threshold);
    Json j = cc.to_json();
    // Cross-check the closed-form counts against direct enumeration.
    Json en = Json::array();
    for (const auto& var : cc.variants) {
      integral::EnumeratedCounts e = integral::enumerate_counts(g, v, var.threshold);
      bool ok = e.t1 == var.t1 && e.t2 == var.t2;
      st.require("enumeration:" + var.name, ok);
      en.push_back({{"variant", var.name}, {"T1", e.t1}, {"T2", e.t2}, {"agrees", ok}});
    }
    j["enumeration"] = en;
    return j;
  }
  auto p = instances::InstanceParams::make(c.m, parse_q(c.rho, "rho"), c.ell);
  return integral::counting_certificate(p, c.threshold).to_json();
}

inline Json cmd_locally_good(const RunConfig& c, Status& st) {
  LayeredInstance g = load_instance(c);
  if (c.radius < 1 || c.radius > g.depth()) throw UsageError("--radius must lie in [1, depth]");
  Json j;
  ViolationReport kids = rounding::expected_children_identity(g);
  st.absorb("expected_children", kids);
  j["expected_children"] = kids.to_json();
  ViolationReport cong = rounding::expected_congestion(g, c.radius);
  st.absorb("expected_congestion", cong);
  j["expected_congestion"] = cong.to_json();
  rounding::SeedStudy s = rounding::seed_study(g, c.seeds, c.seed, c.radius, std::nullopt, c.tolerance);
  st.require("children_means", s.means_within());
  j["study"] = s.to_json();
  return j;
}

inline Json cmd_ra(const RunConfig& c, Status& st) {
  using namespace restricted;
  Json j;
  mpq_class alpha = parse_q(c.alpha, "alpha");
  if (!c.ra_instance.empty()) {
    std::ifstream in(c.ra_instance);
    if (!in) throw UsageError("cannot open " + c.ra_instance);
    Json f;
    try {
      in >> f;
    } catch (const Json::exception& e) {
      throw UsageError(std::string("bad instance JSON: ") + e.what());
    }
    RAInstance inst = RAInstance::from_json(f);
    j["instance"] = inst.to_json();
    if (c.ra_bruteforce.value_or(true)) j["bruteforce"] = bruteforce_ra(inst).to_json();
    j["canonical"] = canonicalize(inst, alpha, inst.target).to_json();
    return j;
  }
  int k = c.k.value_or(12);
  mpq_class eps = parse_q(c.eps, "eps");
  RAInstance inst = build_lower_bound(k, eps);
  j["k"] = k;
  j["epsilon"] = eps.get_str();
  Json sweep = Json::array();
  bool all = true;
  for (const auto& r : matching_sweep(inst)) {
    all = all && r.at_least_one;
    sweep.push_back(r.to_json());
  }
  st.require("matching_distribution_at_least_one", all);
  j["matching_sweep"] = sweep;
  if (c.ra_bruteforce.value_or(k <= 6)) {
    RABruteforce b = bruteforce_ra(inst);
    st.require("integral_optimum_is_3eps", b.value == 3 * eps);
    j["bruteforce"] = b.to_json();
  }
  CanonicalInstance ci = canonicalize(inst, alpha, inst.target);
  std::vector<std::vector<std::pair<std::vector<std::uint32_t>, mpq_class>>> laws;
  for (std::uint32_t i = 0; i < inst.players; ++i) laws.push_back(player_bundle_law(inst, i));
  DaviesReport d = map_sa1_to_davies(ci, lift_from_bundles(ci, laws));
  st.absorb("davies_covering", d.covering);
  st.absorb("davies_packing", d.packing);
  st.absorb("davies_small_exclusion", d.exclusion);
  j["alpha"] = alpha.get_str();
  j["davies"] = d.to_json();
  return j;
}

inline Json cmd_appendixb(const RunConfig& c, Status& st) {
  LayeredInstance g = instances::build_config_lp_gap(c.k.value_or(3));
  Json j;
  j["k"] = g.family_k();
  appendixb::ConfigCheck cc = appendixb::verify_config_solution(appendixb::build_config_solution(g));
  st.require("configuration_lp_feasible", cc.passed());
  j["configuration_lp"] = cc.to_json();
  appendixb::DefeatReport d = appendixb::sa1_defeats(g);
  st.require("every_l1_endpoint_infeasible", d.all_infeasible());
  j["sa1_defeats"] = d.to_json(true);
  LayeredInstance ctl = instances::build_mmda(c.control_m, mpq_class(1, 4), 3);
  appendixb::DefeatReport dc = appendixb::sa1_defeats(ctl);
  st.require("depth3_control_feasible", dc.none_infeasible());
  j["depth3_control"] = dc.to_json();
  j["depth3_control"]["m"] = c.control_m;
  return j;
}

inline Json cmd_appendixc(const RunConfig& c, Status& st) {
  int k = c.k.value_or(4);
  LayeredInstance g = instances::build_subtree_counterexample(k);
  shadow::ShadowModel model = shadow::appendix_c_model(g);
  Json j;
  j["k"] = k;
  ViolationReport lp = relaxations::verify_assignment(g, model.base());
  st.absorb("assignment_lp", lp);
  j["assignment_lp"] = lp.to_json();
  ViolationReport fam = relaxations::verify_subtree_family(model.family());
  st.absorb("subtree_solutions", fam);
  j["subtree_solutions"] = fam.to_json();
  shadow::ShadowEngine eng(model, false);
  shadow::MarginalReport mr = shadow::marginal_report(eng);
  // The shadow loses x_e <= s_e <= 6 x_e on the public sinks.
  st.require("marginal_ratio_unbounded", mr.unbounded_edges > 0);
  j["marginals"] = mr.to_json();
  integral::BruteforceOptions opt;
  opt.node_budget = c.budget;
  integral::BruteforceResult r = integral::bruteforce_best(g, opt);
  if (!r.complete) st.undecided("search_complete");
  long root = static_cast<long>(std::sqrt(static_cast<double>(k)));
  while ((root + 1) * (root + 1) <= k) ++root;
  while (root * root > k) --root;
  mpq_class cap(root + 1, k);
  cap.canonicalize();
  st.require("quality_at_most_sqrt_bound", numerics::certified_leq(r.quality.alpha, Scalar(cap)));
  j["sqrt_bound"] = cap.get_str();
  j["bruteforce"] = r.to_json();
  return j;
}

inline Json cmd_scan(const RunConfig& c, Status& st) {
  if (c.fn.empty() || c.lo.empty() || c.hi.empty()) throw UsageError("scan needs --fn, --lo and --hi");
  numerics::ScanReport r =
      numerics::scan_proof_function(c.fn, parse_q(c.lo, "lo"), parse_q(c.hi, "hi"), c.resolution,
                                    parse_q(c.scan_rho, "rho"), parse_q(c.scan_eps, "eps"),
                                    numerics::PrecisionPolicy::from_env());
  if (!r.undecided.empty()) st.undecided("sign_condition");
  else st.require("sign_condition", r.all_hold);
  return scan_json(r);
}

}  // namespace detail

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {"build",         "verify-lp",  "verify-paths", "count-paths",
                                             "sa1-report",    "shadow-sample", "bruteforce", "certificate",
                                             "locally-good",  "ra",         "appendixb",    "appendixc",
                                             "scan"};
  return c;
}

// Runs one command. Parameter errors give kUsage with a diagnostic; the
// report always carries the per-check outcomes.
inline RunResult run(const RunConfig& c) {
  if (c.precision_cap) {
    if (*c.precision_cap < 2) return {kUsage, {{"error", "--precision-cap must be at least 2"}}};
    setenv("MMDA_PRECISION_CAP", std::to_string(*c.precision_cap).c_str(), 1);
  }
  Status st;
  Json body;
  try {
    const std::string& cmd = c.command;
    if (cmd == "build") body = detail::cmd_build(c, st);
    else if (cmd == "verify-lp") body = detail::cmd_verify_lp(c, st);
    else if (cmd == "verify-paths") body = detail::cmd_verify_paths(c, st);
    else if (cmd == "count-paths") body = detail::cmd_count_paths(c, st);
    else if (cmd == "sa1-report") body = detail::cmd_sa1_report(c, st);
    else if (cmd == "shadow-sample") body = detail::cmd_shadow_sample(c, st);
    else if (cmd == "bruteforce") body = detail::cmd_bruteforce(c, st);
    else if (cmd == "certificate") body = detail::cmd_certificate(c, st);
    else if (cmd == "locally-good") body = detail::cmd_locally_good(c, st);
    else if (cmd == "ra") body = detail::cmd_ra(c, st);
    else if (cmd == "appendixb") body = detail::cmd_appendixb(c, st);
    else if (cmd == "appendixc") body = detail::cmd_appendixc(c, st);
    else if (cmd == "scan") body = detail::cmd_scan(c, st);
    else throw UsageError("unknown command " + cmd);
  } catch (const UsageError& e) {
    return {kUsage, {{"schema_version", kSchemaVersion}, {"command", c.command}, {"error", e.what()}}};
  } catch (const instances::InstanceError& e) {
    return {kUsage, {{"schema_version", kSchemaVersion}, {"command", c.command}, {"error", e.what()}}};
  } catch (const numerics::DomainError& e) {
    return {kUsage, {{"schema_version", kSchemaVersion}, {"command", c.command}, {"error", e.what()}}};
  } catch (const restricted::RAError& e) {
    return {kUsage, {{"schema_version", kSchemaVersion}, {"command", c.command}, {"error", e.what()}}};
  } catch (const integral::SolutionError& e) {
    return {kUsage, {{"schema_version", kSchemaVersion}, {"command", c.command}, {"error", e.what()}}};
  }
  if (c.command == "build") return {kPass, body};
  RunResult out;
  out.exit_code = st.code();
  out.report["schema_version"] = kSchemaVersion;
  out.report["command"] = c.command;
  out.report["config"] = config_json(c);
  out.report["status"] = st.label();
  out.report["exit_code"] = out.exit_code;
  out.report["checks"] = st.to_json();
  out.report["report"] = std::move(body);
  return out;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char ch : s) {
    if (ch == '"') o += '"';
    o += ch;
  }
  return o + "\"";
}

inline void flatten(const Json& j, const std::string& path, std::ostream& os) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), path.empty() ? it.key() : path + "." + it.key(), os);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "[" + std::to_string(i) + "]", os);
  } else {
    os << csv_field(path) << ',' << csv_field(j.is_string() ? j.get<std::string>() : j.dump()) << '\n';
  }
}

}  // namespace detail

// JSON is pretty-printed; CSV is one "path,value" row per leaf.
inline std::string render(const Json& report, const std::string& format) {
  if (format == "csv") {
    std::ostringstream os;
    os << "path,value\n";
    detail::flatten(report, "", os);
    return os.str();
  }
  return report.dump(2) + "\n";
}

}  // namespace mmda::cli
