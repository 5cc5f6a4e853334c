#pragma once

#include <string>
#include <vector>

#include "mmda/numerics/combinatorics.hpp"
#include "mmda/shadow/certificate.hpp"

namespace mmda::shadow {

struct ControlReport {
  std::string name;
  ViolationReport report;
  // The reproduced quantity: smallest covering slack or largest sink load.
  std::optional<Scalar> extreme;
  std::optional<Scalar> predicted;
  std::optional<Scalar> exact_min, exact_max;

  Json to_json() const {
    Json j;
    j["name"] = name;
    j["extreme"] = extreme ? scalar_json(*extreme) : Json(nullptr);
    j["predicted"] = predicted ? scalar_json(*predicted) : Json(nullptr);
    j["exact_min"] = exact_min ? scalar_json(*exact_min) : Json(nullptr);
    j["exact_max"] = exact_max ? scalar_json(*exact_max) : Json(nullptr);
    j["report"] = report.to_json();
    return j;
  }
};

// Independent edges: after conditioning on e1 = (s, v) in A, the covering
// slack out(v) / (k_v in(v)) equals x_{e1}.
inline ControlReport independent_covering_control(const LayeredInstance& g, const numerics::PrecisionPolicy& pol = {}) {
  ShadowModel model = independent_model(g);
  ShadowEngine eng(model);
  ControlReport out{"independent_covering", ViolationReport("independent_covering"), {}, {}, {}, {}};
  std::vector<mpq_class> prob, mult;
  for (EdgeId e1 = g.edge_layer_begin(1); e1 < g.edge_layer_end(1); ++e1) {
    VertexId v = g.head(e1);
    if (g.is_sink(v)) continue;
    eng.event_moments({e1, EventSign::kPositive}, prob, mult);
    mpq_class in = 0, outp = 0;
    for (EdgeId e = g.in_begin(v); e < g.in_end(v); ++e) in += prob[e];
    for (EdgeId e : g.out_edges(v)) outp += prob[e];
    Scalar slack = Scalar(outp) / (g.requirement(v) * Scalar(in));
    Scalar x1 = model.base().value(e1);
    out.report.check("slack_equals_x:e1=" + std::to_string(e1), ConstraintSense::kEqual, slack, x1, pol);
    if (!out.extreme || slack.approx() < out.extreme->approx()) {
      out.extreme = slack;
      out.predicted = x1;
    }
  }
  return out;
}

// Two-layer rounding: L1 edges with probability x_e, edges out of reached L1
// vertices with probability 1/C(2 rho m, rho m), every edge out of a reached
// L2 vertex. Conditioned on e1 = (s, v), the sink t with S_t = S_v receives
// at least |in(t)| / C(2 rho m, rho m) = C((1-rho)m, rho m) / C(2 rho m, rho m).
inline ControlReport two_layer_packing_control(const LayeredInstance& g, const numerics::PrecisionPolicy& pol = {}) {
  if (!is_depth_three(g)) throw instances::InstanceError("the two-layer control needs a depth-3 instance");
  using numerics::binomial;
  const int m = g.params()->m, r = g.params()->rho_m();
  const mpq_class p2(1, binomial(2 * r, r));
  const mpq_class predicted(binomial(m - r, r), binomial(2 * r, r));
  EdgeSolution x = relaxations::assignment_solution(g);
  ControlReport out{"two_layer_packing", ViolationReport("two_layer_packing"), {}, Scalar(predicted), {}, {}};
  for (EdgeId e1 = g.edge_layer_begin(1); e1 < g.edge_layer_end(1); ++e1) {
    VertexId v = g.head(e1);
    VertexId t = g.vertex_with_label(3, g.label(v));
    mpq_class bound = 0, exact = 0;
    for (EdgeId e = g.in_begin(t); e < g.in_end(t); ++e) {
      VertexId u = g.tail(e);
      // P[u reached | e1 in A]: every L1 parent is reached independently.
      mpq_class miss = 1;
      for (EdgeId a = g.in_begin(u); a < g.in_end(u); ++a) {
        VertexId w = g.tail(a);
        mpq_class reach = w == v ? mpq_class(1) : x.value(g.in_begin(w)).rational();
        miss *= 1 - reach * p2;
      }
      exact += 1 - miss;
      if (g.find_edge(v, u)) bound += p2;
    }
    std::string tag = "e1=" + std::to_string(e1) + ",t=" + std::to_string(t);
    out.report.check("lower_bound_term:" + tag, ConstraintSense::kEqual, Scalar(bound), Scalar(predicted), pol);
    out.report.check("exact_at_least_bound:" + tag, ConstraintSense::kAtLeast, Scalar(exact), Scalar(bound), pol);
    Scalar ex(exact);
    if (!out.exact_min || exact < out.exact_min->rational()) out.exact_min = ex;
    if (!out.exact_max || exact > out.exact_max->rational()) out.exact_max = ex;
    if (!out.extreme || bound > out.extreme->rational()) out.extreme = Scalar(bound);
  }
  return out;
}

}  // namespace mmda::shadow
