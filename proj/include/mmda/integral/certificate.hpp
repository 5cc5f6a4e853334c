#pragma once

#include <bit>
#include <optional>
#include <string>
#include <vector>

#include "mmda/instances/graph_queries.hpp"
#include "mmda/instances/subsets.hpp"
#include "mmda/numerics/combinatorics.hpp"
#include "mmda/integral/solution.hpp"

namespace mmda::integral {

struct CertificateVariant {
  std::string name;  // "floor", "ceil" or "given"
  int threshold = 0;  // index j at which |S' cap S_v| counts as large
  mpz_class t1, t2;   // |T_1^(v)| and |T_2^(u)|
  // Largest quality the dichotomy does not exclude; absent when nothing is excluded.
  std::optional<Scalar> quality_bound;
  std::optional<Scalar> alpha_min;

  Json to_json() const {
    return {{"variant", name},
            {"threshold", threshold},
            {"T1", t1.get_str()},
            {"T2", t2.get_str()},
            {"min_alpha", alpha_min ? scalar_json(*alpha_min) : Json(nullptr)},
            {"quality_bound", quality_bound ? scalar_json(*quality_bound) : Json(nullptr)}};
  }
};

struct CountingCertificate {
  mpq_class theta;
  int m = 0, rho_m = 0, inv_eps = 0;
  std::optional<VertexId> v;
  std::vector<CertificateVariant> variants;

  // The tightest bound across the variants.
  std::optional<Scalar> quality_bound() const {
    std::optional<Scalar> b;
    for (const auto& c : variants)
      if (c.quality_bound && (!b || numerics::certified_less(*c.quality_bound, *b))) b = *c.quality_bound;
    return b;
  }

  Json to_json() const {
    Json j;
    j["theta"] = theta.get_str();
    j["m"] = m;
    j["rho_m"] = rho_m;
    j["one_over_eps"] = inv_eps;
    j["vertex"] = v ? Json(*v) : Json(nullptr);
    Json vs = Json::array();
    for (const auto& c : variants) vs.push_back(c.to_json());
    j["variants"] = vs;
    auto b = quality_bound();
    j["quality_bound"] = b ? scalar_json(*b) : Json(nullptr);
    return j;
  }
};

inline mpz_class t1_count(int m, int r, int threshold) {
  mpz_class s = 0;
  for (int j = std::max(threshold, 0); j <= r; ++j) s += numerics::binomial(r, j) * numerics::binomial(m - r, r - j);
  return s;
}

inline mpz_class t2_count(int r, int threshold) {
  mpz_class s = 0;
  for (int j = 0; j < std::min(threshold, r + 1); ++j) s += numerics::binomial(r, j) * numerics::binomial(r, r - j);
  return s;
}

// An alpha-approximate solution needs
//   max(|T1| alpha^{2/eps} / C((1-rho)m, rho m), |T2| alpha^{1/eps} / C(2 rho m, rho m)) >= 1/2,
// so alpha >= min over the two terms of (C / (2 |T|))^{1/power}.
inline CertificateVariant evaluate_variant(std::string name, int m, int r, int inv_eps, int threshold) {
  using numerics::binomial;
  CertificateVariant c{std::move(name), threshold, t1_count(m, r, threshold), t2_count(r, threshold), {}, {}};
  std::optional<Scalar> amin;
  auto consider = [&](const mpz_class& t, const mpz_class& denom, int power) {
    if (t == 0) return;
    mpq_class base(denom, 2 * t);
    base.canonicalize();
    Scalar a = Scalar(base).pow(mpq_class(1, power));
    if (!amin || numerics::certified_less(a, *amin)) amin = a;
  };
  consider(c.t1, binomial(m - r, r), 2 * inv_eps);
  consider(c.t2, binomial(2 * r, r), inv_eps);
  c.alpha_min = amin;
  if (amin) c.quality_bound = Scalar(1) / *amin;
  return c;
}

// theta = rho / 3. A non-integral theta*m yields both rounded thresholds.
inline CountingCertificate counting_certificate(const instances::InstanceParams& p, std::optional<int> threshold = {},
                                               std::optional<VertexId> v = {}) {
  CountingCertificate cc;
  cc.theta = p.rho / 3;
  cc.theta.canonicalize();
  cc.m = p.m;
  cc.rho_m = p.rho_m();
  cc.inv_eps = p.phases();
  cc.v = v;
  if (threshold) {
    cc.variants.push_back(evaluate_variant("given", p.m, cc.rho_m, cc.inv_eps, *threshold));
    return cc;
  }
  mpq_class tm = cc.theta * p.m;
  mpz_class lo = numerics::detail::floor_q(tm).get_num();
  mpz_class hi = lo + (tm == lo ? 0 : 1);
  cc.variants.push_back(evaluate_variant("floor", p.m, cc.rho_m, cc.inv_eps, static_cast<int>(lo.get_si())));
  if (hi != lo) cc.variants.push_back(evaluate_variant("ceil", p.m, cc.rho_m, cc.inv_eps, static_cast<int>(hi.get_si())));
  return cc;
}

inline CountingCertificate counting_certificate(const LayeredInstance& g, VertexId v, std::optional<int> threshold = {}) {
  if (!g.params()) throw instances::InstanceError("the counting certificate needs a labelled MMDA instance");
  if (g.layer_of(v) != g.params()->phases())
    throw instances::InstanceError("the certificate vertex must lie in layer 1/eps");
  return counting_certificate(*g.params(), threshold, v);
}

// Direct count over the built instance: T1 over all sinks, T2 over the sinks
// below a layer-2/eps vertex u above v.
struct EnumeratedCounts {
  std::uint64_t t1 = 0, t2 = 0;
  VertexId u = 0;
};

inline EnumeratedCounts enumerate_counts(const LayeredInstance& g, VertexId v, int threshold) {
  const int p = g.params()->phases();
  const instances::Label sv = g.label(v);
  EnumeratedCounts out;
  auto small = [&](instances::Label s) { return std::popcount(s & sv) < threshold; };
  for (VertexId t = g.layer_begin(g.depth()); t < g.layer_end(g.depth()); ++t)
    if (!small(g.label(t))) ++out.t1;
  // The first vertex of layer 2/eps whose label contains S_v.
  for (VertexId u = g.layer_begin(2 * p); u < g.layer_end(2 * p); ++u)
    if ((g.label(u) & sv) == sv) {
      out.u = u;
      break;
    }
  for (VertexId t : instances::descendants(g, out.u))
    if (g.is_sink(t) && small(g.label(t))) ++out.t2;
  return out;
}

struct HallResult {
  bool infeasible = false;
  VertexId root = 0;
  // Witness: the first depth at which demand exceeds supply.
  std::optional<int> depth;
  mpz_class demand, supply;
  std::vector<std::pair<mpz_class, mpz_class>> levels;  // (demand, supply) per depth

  Json to_json() const {
    Json lv = Json::array();
    for (std::size_t d = 0; d < levels.size(); ++d)
      lv.push_back({{"depth", d + 1}, {"demand", levels[d].first.get_str()}, {"supply", levels[d].second.get_str()}});
    return {{"root", root},
            {"infeasible", infeasible},
            {"witness_depth", depth ? Json(*depth) : Json(nullptr)},
            {"demand", demand.get_str()},
            {"supply", supply.get_str()},
            {"levels", lv}};
  }
};

// A subtree rooted at `root` meeting ceil(k) at every vertex needs the
// product of those degrees distinct vertices at each depth below it.
inline HallResult hall_infeasibility(const LayeredInstance& g, VertexId root, std::optional<int> depth = {},
                                     const numerics::PrecisionPolicy& pol = {}) {
  HallResult h;
  h.root = root;
  const int top = g.layer_of(root);
  const int dmax = std::min(depth.value_or(g.depth() - top), g.depth() - top);
  std::vector<char> cur(g.num_vertices(), 0);
  cur[root] = 1;
  mpz_class demand = 1;
  for (int d = 1; d <= dmax; ++d) {
    const int layer = top + d - 1;
    demand *= numerics::ceil_certified(g.layer_requirement(layer), pol);
    std::vector<char> next(g.num_vertices(), 0);
    mpz_class supply = 0;
    for (VertexId u = g.layer_begin(layer); u < g.layer_end(layer); ++u)
      if (cur[u])
        for (EdgeId e : g.out_edges(u))
          if (!next[g.head(e)]) {
            next[g.head(e)] = 1;
            ++supply;
          }
    h.levels.emplace_back(demand, supply);
    if (!h.infeasible && demand > supply) {
      h.infeasible = true;
      h.depth = d;
      h.demand = demand;
      h.supply = supply;
    }
    cur = std::move(next);
  }
  if (!h.infeasible && !h.levels.empty()) {
    h.demand = h.levels.back().first;
    h.supply = h.levels.back().second;
  }
  return h;
}

}  // namespace mmda::integral
