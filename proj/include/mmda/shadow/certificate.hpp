#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mmda/numerics/combinatorics.hpp"
#include "mmda/shadow/checks.hpp"

namespace mmda::shadow {

struct Sa1Options {
  // Covering needs out >= floor * k_v * in; packing needs in <= ceiling.
  Scalar covering_floor{1};
  Scalar packing_ceiling{1};
  // out-probability >= truncation * out-multiplicity; defaults to 1/m^4.
  std::optional<Scalar> truncation;
  // Edges to condition on; empty means every edge.
  std::vector<EdgeId> events;
  bool include_unconditioned = true;
  bool keep_all = false;
  numerics::PrecisionPolicy policy = numerics::PrecisionPolicy::from_env();
};

struct Sa1Certificate {
  ViolationReport covering{"sa1_covering"};
  ViolationReport packing{"sa1_packing"};
  ViolationReport truncation{"sa1_truncation"};
  Scalar covering_floor{1}, packing_ceiling{1};
  std::optional<Scalar> truncation_factor;
  std::uint64_t events_checked = 0, events_skipped = 0;
  std::vector<std::string> notes;

  bool passed() const { return covering.passed() && packing.passed() && truncation.passed(); }

  ViolationReport combined() const {
    ViolationReport r("sa1_certificate");
    r.merge(covering);
    r.merge(packing);
    r.merge(truncation);
    for (const auto& n : notes) r.note(n);
    return r;
  }

  Json to_json() const {
    Json j;
    j["passed"] = passed();
    j["covering_floor"] = scalar_json(covering_floor);
    j["packing_ceiling"] = scalar_json(packing_ceiling);
    j["truncation_factor"] = truncation_factor ? scalar_json(*truncation_factor) : Json(nullptr);
    j["events_checked"] = events_checked;
    j["events_skipped"] = events_skipped;
    j["covering"] = covering.to_json();
    j["packing"] = packing.to_json();
    j["truncation"] = truncation.to_json();
    j["notes"] = notes;
    return j;
  }
};

namespace detail {

inline std::string event_tag(const std::optional<ConditionEvent>& ev) {
  if (!ev) return "E=none";
  return std::string("E=") + (ev->sign == EventSign::kPositive ? "+" : "-") + std::to_string(ev->edge);
}

inline void check_event(const LayeredInstance& g, const std::optional<ConditionEvent>& ev,
                        const std::vector<mpq_class>& prob, const std::vector<mpq_class>& mult, Sa1Certificate& c,
                        const Sa1Options& opt) {
  const std::size_t nv = g.num_vertices();
  std::vector<mpq_class> ip(nv), op(nv), om(nv);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    ip[g.head(e)] += prob[e];
    op[g.tail(e)] += prob[e];
    om[g.tail(e)] += mult[e];
  }
  const std::string tag = event_tag(ev);
  for (VertexId v = 0; v < nv; ++v) {
    const std::string vid = tag + ",v=" + std::to_string(v);
    if (!g.is_sink(v)) {
      const Scalar& k = g.requirement(v);
      if (v == g.source()) {
        c.covering.check_scaled("covering_root:" + vid, ConstraintSense::kAtLeast, Scalar(op[v]), k,
                                opt.covering_floor, opt.policy);
      } else if (ip[v] > 0) {
        c.covering.check_scaled("covering:" + vid, ConstraintSense::kAtLeast, Scalar(op[v]), k * Scalar(ip[v]),
                                opt.covering_floor, opt.policy);
      } else {
        c.covering.add_trivial(1);
      }
      if (c.truncation_factor) {
        if (om[v] > 0)
          c.truncation.check_scaled("truncation:" + vid, ConstraintSense::kAtLeast, Scalar(op[v]), Scalar(om[v]),
                                    *c.truncation_factor, opt.policy);
        else
          c.truncation.add_trivial(1);
      }
    }
    if (v != g.source()) {
      if (ip[v] > 0)
        c.packing.check_scaled("packing:" + vid, ConstraintSense::kAtMost, Scalar(ip[v]), Scalar(1),
                               opt.packing_ceiling, opt.policy);
      else
        c.packing.add_trivial(1);
    }
  }
}

}  // namespace detail

// Conditions on every single-edge event of both signs and checks the
// assignment constraints on the conditional probabilities P[e in A | E].
inline Sa1Certificate sa1_certificate(ShadowEngine& eng, const Sa1Options& opt = {}) {
  const LayeredInstance& g = eng.instance();
  Sa1Certificate c;
  c.covering = ViolationReport("sa1_covering", opt.keep_all);
  c.packing = ViolationReport("sa1_packing", opt.keep_all);
  c.truncation = ViolationReport("sa1_truncation", opt.keep_all);
  c.covering_floor = opt.covering_floor;
  c.packing_ceiling = opt.packing_ceiling;
  if (opt.truncation) {
    c.truncation_factor = opt.truncation;
  } else if (g.params()) {
    long m = g.params()->m;
    c.truncation_factor = Scalar(mpq_class(1, m * m * m * m));
  }
  std::vector<mpq_class> prob(g.num_edges()), mult(g.num_edges());
  if (opt.include_unconditioned) {
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      prob[e] = eng.marginal_info(e).s;
      mult[e] = eng.marginal_info(e).mean;
    }
    detail::check_event(g, std::nullopt, prob, mult, c, opt);
  }
  std::vector<EdgeId> events = opt.events;
  if (events.empty())
    for (EdgeId e = 0; e < g.num_edges(); ++e) events.push_back(e);
  std::uint64_t skipped_neg = 0, skipped_pos = 0;
  for (EdgeId e1 : events) {
    for (EventSign sign : {EventSign::kPositive, EventSign::kNegative}) {
      ConditionEvent ev{e1, sign};
      if (eng.event_probability(ev) == 0) {
        ++c.events_skipped;
        ++(sign == EventSign::kPositive ? skipped_pos : skipped_neg);
        continue;
      }
      eng.event_moments(ev, prob, mult);
      detail::check_event(g, ev, prob, mult, c, opt);
      ++c.events_checked;
    }
  }
  if (skipped_neg)
    c.notes.push_back("skipped " + std::to_string(skipped_neg) + " negative events on edges with s_e = 1");
  if (skipped_pos)
    c.notes.push_back("skipped " + std::to_string(skipped_pos) + " positive events on edges with s_e = 0");
  return c;
}

// max(0, s_e + s_f - 1) <= P[both] <= min(s_e, s_f) over all pairs e < f.
inline ViolationReport frechet_report(ShadowEngine& eng, const numerics::PrecisionPolicy& pol = {}) {
  const LayeredInstance& g = eng.instance();
  ViolationReport rep("frechet_bounds");
  std::vector<bool> done;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    for (EdgeId f = e + 1; f < g.num_edges(); ++f) {
      std::uint32_t id = eng.joint_id(e, f);
      if (id < done.size() && done[id]) {
        rep.add_trivial(2);
        continue;
      }
      if (done.size() <= id) done.resize(id + 1, false);
      done[id] = true;
      const mpq_class& se = eng.marginal_q(e);
      const mpq_class& sf = eng.marginal_q(f);
      const mpq_class& both = eng.joint_info(id).both;
      mpq_class lo = se + sf - 1;
      if (lo < 0) lo = 0;
      std::string tag = "e=" + std::to_string(e) + ",f=" + std::to_string(f);
      rep.check("frechet_lower:" + tag, ConstraintSense::kAtLeast, Scalar(both), Scalar(lo), pol);
      rep.check("frechet_upper:" + tag, ConstraintSense::kAtMost, Scalar(both), Scalar(mpq_class(std::min(se, sf))),
                pol);
    }
  }
  return rep;
}

struct DominanceRow {
  int trigger_layer = 0, vertex_layer = 0;
  Scalar tau;
  EdgeId trigger = 0;
  VertexId vertex = 0;
};

struct DominanceReport {
  ViolationReport report{"no_edge_dominates"};
  std::vector<DominanceRow> rows;  // largest tau per (trigger layer, vertex layer)

  std::optional<Scalar> tau(int trigger_layer, int vertex_layer) const {
    for (const auto& r : rows)
      if (r.trigger_layer == trigger_layer && r.vertex_layer == vertex_layer) return r.tau;
    return std::nullopt;
  }

  Json to_json() const {
    Json j;
    Json rs = Json::array();
    for (const auto& r : rows)
      rs.push_back({{"trigger_layer", r.trigger_layer}, {"vertex_layer", r.vertex_layer}, {"tau", scalar_json(r.tau)},
                    {"trigger", r.trigger}, {"vertex", r.vertex}});
    j["rows"] = rs;
    j["report"] = report.to_json();
    return j;
  }
};

// For every trigger f and every vertex v below e with positive expected
// out-degree in S_f, tau(f, v) is the largest single x^{(f)} on delta+(v)
// over their sum. Certifies  sum - x_{e'} >= (1 - tau) sum  with tau the
// largest value over the (layer f, layer v) class.
inline DominanceReport check_no_edge_dominates(const ShadowModel& model, const numerics::PrecisionPolicy& pol = {}) {
  const LayeredInstance& g = model.instance();
  const SubtreeFamily& fam = model.family();
  DominanceReport out;
  struct Item {
    EdgeId f;
    VertexId v;
    mpq_class sum, max;
  };
  std::vector<Item> items;
  std::map<std::pair<int, int>, std::size_t> best;
  for (EdgeId f = 0; f < g.num_edges(); ++f) {
    std::map<VertexId, std::pair<mpq_class, mpq_class>> per;
    fam.for_each_support(f, [&](EdgeId e, ClassId c) {
      if (e == f) return;
      mpq_class v = fam.table()[c].rational();
      auto& [s, mx] = per[g.tail(e)];
      s += v;
      if (v > mx) mx = v;
    });
    for (auto& [v, sm] : per) {
      if (sm.first == 0) continue;
      items.push_back({f, v, sm.first, sm.second});
      auto key = std::make_pair(g.edge_layer(f), g.layer_of(v));
      mpq_class tau = sm.second / sm.first;
      auto it = best.find(key);
      if (it == best.end() || mpq_class(items[it->second].max / items[it->second].sum) < tau) best[key] = items.size() - 1;
    }
  }
  for (const auto& [key, idx] : best) {
    const Item& it = items[idx];
    out.rows.push_back({key.first, key.second, Scalar(mpq_class(it.max / it.sum)), it.f, it.v});
  }
  for (const auto& it : items) {
    Scalar tau = *out.tau(g.edge_layer(it.f), g.layer_of(it.v));
    out.report.check_scaled("dominance:f=" + std::to_string(it.f) + ",v=" + std::to_string(it.v),
                            ConstraintSense::kAtLeast, Scalar(mpq_class(it.sum - it.max)), Scalar(it.sum),
                            Scalar(1) - tau, pol);
  }
  return out;
}

// L2 case of the packing argument: sum over L1 triggers f in A(v) of the
// in-flow of x^{(f)} at v is exactly 1, for every v in L2.
inline ViolationReport l2_packing_identity(const ShadowModel& model, const numerics::PrecisionPolicy& pol = {}) {
  const LayeredInstance& g = model.instance();
  if (!is_depth_three(g)) throw instances::InstanceError("the L2 packing identity needs a depth-3 instance");
  const SubtreeFamily& fam = model.family();
  ViolationReport rep("l2_packing_identity");
  for (VertexId v = g.layer_begin(2); v < g.layer_end(2); ++v) {
    mpq_class s = 0;
    for (EdgeId e = g.in_begin(v); e < g.in_end(v); ++e)
      fam.for_each_trigger(e, [&](EdgeId f, ClassId c) {
        if (g.edge_layer(f) == 1) s += fam.table()[c].rational();
      });
    rep.check("l2_congestion:v=" + std::to_string(v), ConstraintSense::kEqual, Scalar(s), Scalar(1), pol);
  }
  return rep;
}

struct L3PackingRow {
  EdgeId e1 = 0;
  VertexId v = 0;
  Scalar six_part, overlap_part, total;
};

struct L3PackingReport {
  ViolationReport report{"l3_packing_bound"};
  std::vector<L3PackingRow> rows;
  Scalar closed_total;  // 6 + F with F the sink in-flow of an L1 subtree
  std::optional<Scalar> max_total;
  Json to_json() const {
    Json j;
    j["closed_total"] = scalar_json(closed_total);
    j["max_total"] = max_total ? scalar_json(*max_total) : Json(nullptr);
    j["evaluated"] = rows.size();
    j["report"] = report.to_json();
    return j;
  }
};

// For events e1 in L3 and sinks v, evaluates
//   sum_{f in L1} (6 x_{e1} + x^{(f)}_{e1}) * sum_{e' in in(v)} x^{(f)}_{e'}
// exactly and compares the overlap part, grouped by j = |S_f cap S_{head(e1)}|,
// with F^2 C(rho m, j)^2 / C(m - 2 rho m + j, j).
inline L3PackingReport l3_packing_bound(const ShadowModel& model, std::vector<EdgeId> events = {},
                                        bool all_sinks = false, const numerics::PrecisionPolicy& pol = {}) {
  const LayeredInstance& g = model.instance();
  if (!is_depth_three(g)) throw instances::InstanceError("the L3 packing bound needs a depth-3 instance");
  const SubtreeFamily& fam = model.family();
  const int m = g.params()->m, r = g.params()->rho_m();
  using numerics::binomial;
  const mpq_class F(binomial(m - r, r), binomial(m, r));
  L3PackingReport out;
  out.closed_total = Scalar(mpq_class(6 + F));
  const VertexId s0 = g.layer_begin(3), s1 = g.layer_end(3);
  const EdgeId f0 = g.edge_layer_begin(1), f1 = g.edge_layer_end(1);
  // inflow[(f - f0) * sinks + (t - s0)]
  const std::size_t ns = s1 - s0;
  std::vector<mpq_class> inflow((f1 - f0) * ns);
  std::vector<mpq_class> total_in(ns);
  for (EdgeId f = f0; f < f1; ++f)
    fam.for_each_support(f, [&](EdgeId e, ClassId c) {
      if (g.edge_layer(e) == 3) inflow[(f - f0) * ns + (g.head(e) - s0)] += fam.table()[c].rational();
    });
  for (EdgeId f = f0; f < f1; ++f)
    for (std::size_t t = 0; t < ns; ++t) total_in[t] += inflow[(f - f0) * ns + t];
  if (events.empty())
    for (EdgeId e = g.edge_layer_begin(3); e < g.edge_layer_end(3); ++e) events.push_back(e);
  for (EdgeId e1 : events) {
    if (g.edge_layer(e1) != 3) throw instances::InstanceError("L3 packing bound events must be L3 edges");
    const mpq_class x1 = model.base().value(e1).rational();
    std::vector<std::pair<EdgeId, ClassId>> trig;
    fam.for_each_trigger(e1, [&](EdgeId f, ClassId c) {
      if (g.edge_layer(f) == 1) trig.emplace_back(f, c);
    });
    const instances::Label s_top = g.label(g.head(e1));
    std::vector<VertexId> sinks;
    if (all_sinks)
      for (VertexId t = s0; t < s1; ++t) sinks.push_back(t);
    else
      sinks.push_back(g.head(e1));
    for (VertexId t : sinks) {
      mpq_class six = 6 * x1 * total_in[t - s0];
      std::vector<mpq_class> by_j(r + 1);
      for (const auto& [f, c] : trig)
        by_j[std::popcount(g.label(g.head(f)) & s_top)] += fam.table()[c].rational() * inflow[(f - f0) * ns + (t - s0)];
      mpq_class overlap = 0;
      std::string tag = "e1=" + std::to_string(e1) + ",v=" + std::to_string(t);
      for (int j = 0; j <= r; ++j) {
        overlap += by_j[j];
        mpq_class closed = F * F * binomial(r, j) * binomial(r, j) / mpq_class(binomial(m - 2 * r + j, j));
        out.report.check("overlap_term:" + tag + ",j=" + std::to_string(j), ConstraintSense::kEqual,
                         Scalar(by_j[j]), Scalar(closed), pol);
      }
      out.report.check("six_part:" + tag, ConstraintSense::kEqual, Scalar(six), Scalar(6), pol);
      Scalar total(mpq_class(six + overlap));
      out.report.check("closed_total:" + tag, ConstraintSense::kEqual, total, out.closed_total, pol);
      if (!out.max_total || total.rational() > out.max_total->rational()) out.max_total = total;
      out.rows.push_back({e1, t, Scalar(six), Scalar(overlap), total});
    }
  }
  return out;
}

}  // namespace mmda::shadow
