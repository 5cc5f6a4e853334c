#pragma once

#include <bit>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "mmda/shadow/exact_engine.hpp"

namespace mmda::shadow {

inline bool is_depth_three(const LayeredInstance& g) {
  return g.family() == instances::Family::kMmda && g.params() && g.params()->ell == 3;
}

// One row per distinct (layer, x_e, trigger multiset) class of edges.
struct MarginalRow {
  int layer;
  std::uint64_t edges;
  Scalar x, s, mean;
};

struct MarginalReport {
  ViolationReport bounds{"marginal_bounds"};      // x_e <= s_e <= 6 x_e
  ViolationReport reversal{"reversal_bound"};     // x_e / s_e >= 1/6
  ViolationReport identities{"layer_identities"};  // depth-3 closed forms
  ViolationReport multiplicity{"multiplicity"};   // E[n_e] < 2 and, in L3, <= 3 x_e
  std::vector<MarginalRow> rows;
  std::optional<Scalar> max_ratio;  // max s_e / x_e over x_e > 0
  std::uint64_t unbounded_edges = 0;  // x_e = 0 < s_e

  bool passed() const { return bounds.passed() && reversal.passed() && identities.passed() && multiplicity.passed(); }

  Json to_json() const {
    Json j;
    j["passed"] = passed();
    Json rs = Json::array();
    for (const auto& r : rows)
      rs.push_back({{"layer", r.layer}, {"edges", r.edges}, {"x", scalar_json(r.x)}, {"s", scalar_json(r.s)},
                    {"expected_multiplicity", scalar_json(r.mean)}});
    j["classes"] = rs;
    j["max_ratio"] = max_ratio ? scalar_json(*max_ratio) : Json(nullptr);
    j["unbounded_edges"] = unbounded_edges;
    j["bounds"] = bounds.to_json();
    j["reversal"] = reversal.to_json();
    j["identities"] = identities.to_json();
    j["multiplicity"] = multiplicity.to_json();
    return j;
  }
};

// Checks every edge, evaluating each distinct class once. Works without the
// trigger cache, so million-edge instances stream through.
inline MarginalReport marginal_report(ShadowEngine& eng, const numerics::PrecisionPolicy& pol = {}) {
  const LayeredInstance& g = eng.instance();
  const bool d3 = is_depth_three(g);
  MarginalReport rep;
  struct Seen {
    std::uint64_t checks = 0;
    std::size_t row = 0;
  };
  std::map<std::tuple<int, ClassId, std::uint32_t, std::uint32_t>, Seen> seen;
  std::vector<Trigger> t, l1part;
  Scalar sixth = Scalar::ratio(1, 6);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    eng.collect_triggers(e, t);
    std::uint32_t sig = eng.signature_of(t);
    int layer = g.edge_layer(e);
    ClassId xc = eng.model().base().class_of(e);
    // The L1 part is interned like a signature; its mean is the ancestor sum.
    std::uint32_t l1sig = 0;
    if (d3 && layer == 3) {
      l1part.clear();
      for (const auto& tr : t)
        if (g.edge_layer(tr.f) == 1) l1part.push_back(tr);
      l1sig = eng.signature_of(l1part);
    }
    auto key = std::make_tuple(layer, xc, sig, l1sig);
    auto it = seen.find(key);
    if (it != seen.end()) {
      ++rep.rows[it->second.row].edges;
      rep.bounds.add_trivial(2);
      rep.identities.add_trivial(it->second.checks);
      rep.multiplicity.add_trivial(layer == 3 && d3 ? 2 : 1);
      rep.reversal.add_trivial(eng.signature_marginal(sig).s > 0 ? 1 : 0);
      if (eng.x_value(std::get<1>(key)) == 0 && eng.signature_marginal(sig).s > 0) ++rep.unbounded_edges;
      continue;
    }
    const auto& m = eng.signature_marginal(sig);
    const mpq_class x = eng.x_value(xc);
    std::string id = "edge=" + std::to_string(e) + ",layer=" + std::to_string(layer);
    Scalar xs(x), ss(m.s), mean(m.mean);
    rep.bounds.check("lower:" + id, ConstraintSense::kAtLeast, ss, xs, pol);
    rep.bounds.check_scaled("upper:" + id, ConstraintSense::kAtMost, ss, xs, Scalar(6), pol);
    if (x > 0) {
      Scalar ratio(mpq_class(m.s / x));
      if (!rep.max_ratio || ratio.rational() > rep.max_ratio->rational()) rep.max_ratio = ratio;
    } else if (m.s > 0) {
      ++rep.unbounded_edges;
    }
    if (m.s > 0) rep.reversal.check_scaled("reversal:" + id, ConstraintSense::kAtLeast, xs, ss, sixth, pol);
    std::uint64_t checks = 0;
    if (d3) {
      if (layer == 1) {
        rep.identities.check("l1_equals_x:" + id, ConstraintSense::kEqual, ss, xs, pol);
        ++checks;
      } else if (layer == 2) {
        rep.identities.check("l2_two_trigger:" + id, ConstraintSense::kEqual, ss,
                             Scalar(mpq_class(1 - (1 - x) * (1 - x))), pol);
        ++checks;
      } else if (layer == 3) {
        rep.identities.check("l3_ancestor_sum:" + id, ConstraintSense::kEqual, Scalar(eng.signature_marginal(l1sig).mean), xs, pol);
        ++checks;
      }
    }
    rep.multiplicity.check("below_two:" + id, ConstraintSense::kAtMost, mean, Scalar(2), pol);
    if (d3 && layer == 3)
      rep.multiplicity.check_scaled("three_x:" + id, ConstraintSense::kAtMost, mean, xs, Scalar(3), pol);
    seen.emplace(key, Seen{checks, rep.rows.size()});
    rep.rows.push_back({layer, 1, xs, ss, mean});
  }
  return rep;
}

}  // namespace mmda::shadow
