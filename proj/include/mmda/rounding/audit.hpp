#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mmda/relaxations/path_counting.hpp"
#include "mmda/relaxations/violation_report.hpp"
#include "mmda/rounding/forest.hpp"

namespace mmda::rounding {

using relaxations::ConstraintSense;
using relaxations::ViolationReport;

struct Quantiles {
  double min = 0, q10 = 0, median = 0, q90 = 0, max = 0;
  std::uint64_t count = 0;

  static Quantiles of(std::vector<double> v) {
    Quantiles q;
    q.count = v.size();
    if (v.empty()) return q;
    std::sort(v.begin(), v.end());
    auto at = [&](double p) { return v[static_cast<std::size_t>(p * static_cast<double>(v.size() - 1) + 0.5)]; };
    q.min = v.front();
    q.q10 = at(0.1);
    q.median = at(0.5);
    q.q90 = at(0.9);
    q.max = v.back();
    return q;
  }
  Json to_json() const {
    return {{"count", count}, {"min", min}, {"q10", q10}, {"median", median}, {"q90", q90}, {"max", max}};
  }
};

// (log2 n)^11 for an n-vertex instance.
inline double default_congestion_bound(const LayeredInstance& g) {
  return std::pow(std::log2(static_cast<double>(g.num_vertices())), 11.0);
}

struct ChildViolation {
  std::int64_t node;  // -1 for the empty path
  VertexId end;
  std::uint32_t children;
};

struct CongestionRecord {
  std::int64_t node;
  VertexId v;
  std::uint64_t count;
};

struct LocalityAudit {
  int radius = 1;
  double congestion_bound = 0;
  std::uint64_t paths_audited = 0;     // paths ending at a non-sink, including the empty one
  std::uint64_t child_violations = 0;  // children < k_p / 2
  std::uint64_t congestion_pairs = 0;  // (p, v) pairs with positive congestion
  std::uint64_t congestion_violations = 0;
  std::uint64_t max_congestion = 0;
  std::optional<CongestionRecord> worst_congestion;
  Quantiles child_ratio;
  std::map<std::uint64_t, std::uint64_t> congestion_histogram;
  std::vector<ChildViolation> child_examples;  // first few violations
  bool truncated_forest = false;

  bool passed() const { return child_violations == 0 && congestion_violations == 0; }

  Json to_json() const {
    Json j;
    j["radius"] = radius;
    j["congestion_bound"] = congestion_bound;
    j["paths_audited"] = paths_audited;
    j["child_violations"] = child_violations;
    j["congestion_pairs"] = congestion_pairs;
    j["congestion_violations"] = congestion_violations;
    j["max_congestion"] = max_congestion;
    j["worst_congestion"] = worst_congestion ? Json{{"path", worst_congestion->node}, {"vertex", worst_congestion->v},
                                                     {"count", worst_congestion->count}}
                                             : Json(nullptr);
    j["children_over_k"] = child_ratio.to_json();
    Json h = Json::array();
    for (auto [c, n] : congestion_histogram) h.push_back({c, n});
    j["congestion_histogram"] = h;
    Json ex = Json::array();
    for (const auto& c : child_examples) ex.push_back({{"path", c.node}, {"end", c.end}, {"children", c.children}});
    j["child_violation_examples"] = ex;
    j["truncated_forest"] = truncated_forest;
    j["passed"] = passed();
    return j;
  }
};

// Children of every path against k_p / 2, and for every path p the number of
// extensions of p inside P' ending at each v within `radius` more edges.
inline LocalityAudit audit_locality(const SampledPathForest& f, int radius, std::optional<double> congestion_bound = {},
                                    const numerics::PrecisionPolicy& pol = {}) {
  const LayeredInstance& g = f.instance();
  if (radius < 1 || radius > g.depth()) throw instances::InstanceError("radius must lie in [1, depth]");
  LocalityAudit a;
  a.radius = radius;
  a.congestion_bound = congestion_bound.value_or(default_congestion_bound(g));
  a.truncated_forest = f.truncated();
  std::map<std::pair<int, std::uint32_t>, bool> short_of_half;
  std::vector<double> ratios;
  std::unordered_map<VertexId, std::uint64_t> count;
  std::vector<std::uint32_t> frontier, next;

  auto audit = [&](std::int64_t p, VertexId end) {
    if (g.is_sink(end)) return;
    ++a.paths_audited;
    const auto& kids = f.children(p);
    auto c = static_cast<std::uint32_t>(kids.size());
    int layer = g.layer_of(end);
    const Scalar& k = g.requirement(end);
    auto key = std::make_pair(layer, c);
    auto it = short_of_half.find(key);
    if (it == short_of_half.end())
      it = short_of_half.emplace(key, numerics::certified_less(Scalar(2 * static_cast<long>(c)), k, pol)).first;
    if (it->second) {
      ++a.child_violations;
      if (a.child_examples.size() < 20) a.child_examples.push_back({p, end, c});
    }
    ratios.push_back(k.is_zero() ? 0.0 : static_cast<double>(c) / k.approx());
    count.clear();
    frontier.assign(kids.begin(), kids.end());
    for (int d = 1; d <= radius && !frontier.empty(); ++d) {
      next.clear();
      for (std::uint32_t q : frontier) {
        ++count[f.nodes()[q].end];
        const auto& qk = f.children(q);
        next.insert(next.end(), qk.begin(), qk.end());
      }
      std::swap(frontier, next);
    }
    for (auto [v, n] : count) {
      ++a.congestion_pairs;
      ++a.congestion_histogram[n];
      if (n > a.max_congestion) {
        a.max_congestion = n;
        a.worst_congestion = CongestionRecord{p, v, n};
      }
      if (static_cast<double>(n) > a.congestion_bound) ++a.congestion_violations;
    }
  };
  audit(-1, g.source());
  for (std::size_t i = 0; i < f.size(); ++i) audit(static_cast<std::int64_t>(i), f.nodes()[i].end);
  a.child_ratio = Quantiles::of(std::move(ratios));
  return a;
}

// gamma_i * delta_i^+ == k_i for every non-sink layer: the expected number of
// children of a selected path ending there.
inline ViolationReport expected_children_identity(const LayeredInstance& g, const numerics::PrecisionPolicy& pol = {}) {
  ViolationReport r("expected_children");
  for (int i = 0; i < g.depth(); ++i) {
    const auto& lp = g.layer_profile(i);
    if (!lp.delta_plus) {
      r.note("layer " + std::to_string(i) + " has no uniform out-degree");
      continue;
    }
    r.check("gamma_times_delta:layer=" + std::to_string(i), ConstraintSense::kEqual, lp.gamma * Scalar(*lp.delta_plus),
            lp.k, pol);
  }
  return r;
}

// E[congestion(p, v)] = #paths(end(p) -> v) * prod gamma over the layers
// crossed, at its largest over each layer pair within the radius.
inline ViolationReport expected_congestion(const LayeredInstance& g, int radius,
                                           const numerics::PrecisionPolicy& pol = {}) {
  ViolationReport r("expected_congestion", true);
  for (int i = 0; i < g.depth(); ++i)
    for (int j = i + 1; j <= std::min(g.depth(), i + radius); ++j) {
      mpz_class paths;
      if (g.family() == instances::Family::kMmda) {
        paths = relaxations::max_paths_between_layers(g, i, j);
      } else {
        paths = 0;
        for (VertexId v = g.layer_begin(i); v < g.layer_end(i); ++v) {
          auto c = relaxations::path_counts_from(g, v, j);
          VertexId off = g.layer_begin(i);
          for (VertexId u = g.layer_begin(j); u < g.layer_end(j); ++u) paths = std::max(paths, c[u - off]);
        }
      }
      Scalar prod(1);
      for (int l = i; l < j; ++l) prod = prod * g.layer_profile(l).gamma;
      r.check("layers=" + std::to_string(i) + "->" + std::to_string(j), ConstraintSense::kAtMost, Scalar(paths) * prod,
              Scalar(1), pol);
    }
  return r;
}

struct LayerChildStats {
  int layer;
  std::uint64_t paths = 0;
  std::uint64_t children = 0;
  double mean = 0, expected = 0, se = 0, z = 0;
  bool exact = false;  // gamma = 1: every draw is deterministic
  bool within = true;
};

struct SeedStudy {
  std::uint64_t seeds = 0, first_seed = 0;
  int radius = 1;
  double tolerance = 4;
  std::uint64_t seeds_without_child_violations = 0;
  std::uint64_t seeds_without_congestion_violations = 0;
  std::uint64_t truncated = 0;
  std::uint64_t max_congestion = 0;
  std::vector<LayerChildStats> layers;

  bool means_within() const {
    return std::all_of(layers.begin(), layers.end(), [](const auto& l) { return l.within; });
  }

  Json to_json() const {
    Json j;
    j["seeds"] = seeds;
    j["first_seed"] = first_seed;
    j["radius"] = radius;
    j["seeds_without_child_violations"] = seeds_without_child_violations;
    j["zero_violation_rate"] = seeds ? static_cast<double>(seeds_without_child_violations) / seeds : 0.0;
    j["seeds_without_congestion_violations"] = seeds_without_congestion_violations;
    j["truncated_forests"] = truncated;
    j["max_congestion"] = max_congestion;
    Json ls = Json::array();
    for (const auto& l : layers)
      ls.push_back({{"layer", l.layer}, {"paths", l.paths}, {"children", l.children}, {"mean", l.mean},
                    {"k", l.expected}, {"se", l.se}, {"z", l.z}, {"exact", l.exact}, {"within", l.within}});
    j["children_per_layer"] = ls;
    j["means_within_tolerance"] = means_within();
    return j;
  }
};

// Seeds first_seed .. first_seed + seeds - 1. The children of a path ending
// in L_i are Binomial(delta_i^+, gamma_i), so the pooled mean has standard
// error sqrt(delta gamma (1 - gamma) / paths).
inline SeedStudy seed_study(const LayeredInstance& g, std::uint64_t seeds, std::uint64_t first_seed, int radius,
                            std::optional<double> congestion_bound = {}, double tolerance = 4,
                            const ForestOptions& opt = {}) {
  SeedStudy s;
  s.seeds = seeds;
  s.first_seed = first_seed;
  s.radius = radius;
  s.tolerance = tolerance;
  std::vector<std::uint64_t> paths(g.depth(), 0), kids(g.depth(), 0);
  for (std::uint64_t i = 0; i < seeds; ++i) {
    SampledPathForest f = sample_forest(g, first_seed + i, opt);
    if (f.truncated()) ++s.truncated;
    LocalityAudit a = audit_locality(f, radius, congestion_bound, opt.policy);
    if (a.child_violations == 0) ++s.seeds_without_child_violations;
    if (a.congestion_violations == 0) ++s.seeds_without_congestion_violations;
    s.max_congestion = std::max(s.max_congestion, a.max_congestion);
    ++paths[0];
    kids[0] += f.children(-1).size();
    for (std::size_t n = 0; n < f.size(); ++n) {
      VertexId v = f.nodes()[n].end;
      if (g.is_sink(v)) continue;
      ++paths[g.layer_of(v)];
      kids[g.layer_of(v)] += f.children(static_cast<std::int64_t>(n)).size();
    }
  }
  for (int l = 0; l < g.depth(); ++l) {
    LayerChildStats st;
    st.layer = l;
    st.paths = paths[l];
    st.children = kids[l];
    const auto& lp = g.layer_profile(l);
    st.expected = lp.k.approx();
    double gam = lp.gamma.approx(), del = lp.delta_plus ? lp.delta_plus->get_d() : 0.0;
    st.exact = lp.gamma.is_rational() && lp.gamma.rational() == 1;
    if (st.paths) {
      st.mean = static_cast<double>(st.children) / static_cast<double>(st.paths);
      st.se = std::sqrt(del * gam * (1 - gam) / static_cast<double>(st.paths));
      if (st.exact) {
        st.within = st.children == st.paths * static_cast<std::uint64_t>(del);
      } else {
        st.z = st.se > 0 ? (st.mean - st.expected) / st.se : 0.0;
        st.within = std::abs(st.z) <= tolerance;
      }
    }
    s.layers.push_back(st);
  }
  return s;
}

}  // namespace mmda::rounding
