#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmda/relaxations/edge_solution.hpp"
#include "mmda/relaxations/violation_report.hpp"

namespace mmda::relaxations {

struct AssignmentCheckOptions {
  Scalar congestion_allowance = Scalar(1);
  // Relocated source: its in-flow is taken as 1 and the real source loses
  // its special covering constraint.
  std::optional<VertexId> root;
  bool keep_all = false;
  PrecisionPolicy policy = PrecisionPolicy::from_env();
};

namespace detail {

using Signature = std::vector<std::pair<ClassId, std::uint32_t>>;

template <class Range>
Signature signature_of(const EdgeSolution& x, const Range& edges) {
  Signature s;
  for (EdgeId e : edges) {
    ClassId c = x.class_of(e);
    if (c == kZeroClass) continue;
    auto it = std::find_if(s.begin(), s.end(), [c](const auto& p) { return p.first == c; });
    if (it == s.end()) s.emplace_back(c, 1);
    else ++it->second;
  }
  std::sort(s.begin(), s.end());
  return s;
}

inline LinearSum sum_of(const EdgeSolution& x, const Signature& s) {
  LinearSum out;
  for (const auto& [c, n] : s) out.add(x.table()[c], mpz_class(static_cast<unsigned long>(n)));
  return out;
}

struct EdgeRange {
  EdgeId b, e;
  struct It {
    EdgeId v;
    EdgeId operator*() const { return v; }
    It& operator++() { ++v; return *this; }
    bool operator!=(const It& o) const { return v != o.v; }
  };
  It begin() const { return {b}; }
  It end() const { return {e}; }
};

}  // namespace detail

// Certifies x(out(s)) >= k_s, x(out(v)) >= k_v x(in(v)) at non-sinks,
// x(in(v)) <= allowance, and 0 <= x_e <= 1. Vertices with identical value
// signatures share one exact evaluation.
inline ViolationReport verify_assignment(const LayeredInstance& g, const EdgeSolution& x,
                                         const AssignmentCheckOptions& opt = {}) {
  ViolationReport rep("assignment_lp", opt.keep_all);
  const VertexId root = opt.root.value_or(g.source());
  g.check_vertex(root);

  for (ClassId c = 1; c < x.table().size(); ++c) {
    rep.check("bound_lo:class=" + std::to_string(c), ConstraintSense::kAtLeast, x.table()[c], Scalar(0), opt.policy);
    rep.check("bound_hi:class=" + std::to_string(c), ConstraintSense::kAtMost, x.table()[c], Scalar(1), opt.policy);
  }

  std::vector<VertexId> touched;
  const std::size_t n = g.num_vertices();
  if (x.dense()) {
    touched.resize(n);
    for (VertexId v = 0; v < n; ++v) touched[v] = v;
  } else {
    x.for_each_support([&](EdgeId e, ClassId) {
      touched.push_back(g.tail(e));
      touched.push_back(g.head(e));
    });
    touched.push_back(root);
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  }

  std::uint64_t non_sinks = g.layer_begin(g.depth());
  std::uint64_t cover_seen = 0, pack_seen = 0;
  std::map<std::pair<int, std::pair<detail::Signature, detail::Signature>>, ConstraintRecord> cover_memo;
  std::map<detail::Signature, ConstraintRecord> pack_memo;

  for (VertexId v : touched) {
    int layer = g.layer_of(v);
    detail::Signature in = detail::signature_of(x, detail::EdgeRange{g.in_begin(v), g.in_end(v)});
    ++pack_seen;
    auto pit = pack_memo.find(in);
    if (pit == pack_memo.end()) {
      ViolationReport tmp;
      ConstraintRecord r = tmp.check("", ConstraintSense::kAtMost, detail::sum_of(x, in),
                                     LinearSum(opt.congestion_allowance), opt.policy);
      pit = pack_memo.emplace(in, r).first;
    }
    ConstraintRecord pr = pit->second;
    pr.id = "packing:v=" + std::to_string(v);
    rep.add(std::move(pr));

    if (g.is_sink(v)) continue;
    ++cover_seen;
    detail::Signature out = detail::signature_of(x, g.out_edges(v));
    // Convention: the (relocated) root has in-flow 1.
    int key_layer = v == root ? -1 - layer : layer;
    auto key = std::make_pair(key_layer, std::make_pair(out, v == root ? detail::Signature{} : in));
    auto cit = cover_memo.find(key);
    if (cit == cover_memo.end()) {
      LinearSum rhs;
      if (v == root) rhs.add(g.requirement(v));
      else rhs.add(detail::sum_of(x, in), g.requirement(v));
      ViolationReport tmp;
      ConstraintRecord r = tmp.check("", ConstraintSense::kAtLeast, detail::sum_of(x, out), rhs, opt.policy);
      cit = cover_memo.emplace(key, r).first;
    }
    ConstraintRecord cr = cit->second;
    cr.id = (v == root ? "covering_root:v=" : "covering:v=") + std::to_string(v);
    rep.add(std::move(cr));
  }
  // Constraints at untouched vertices compare two zero sums.
  rep.add_trivial((n - pack_seen) + (non_sinks - cover_seen));
  return rep;
}

// Layer route: with uniform degrees and one value per layer, every vertex of
// a layer has the same constraints, so the check needs only the profile.
inline ViolationReport verify_assignment_by_layer(const std::vector<instances::LayerProfile>& prof,
                                                  const AssignmentCheckOptions& opt = {}) {
  ViolationReport rep("assignment_lp_by_layer", opt.keep_all);
  std::vector<Scalar> x = assignment_layer_values(prof);
  const int ell = static_cast<int>(prof.size()) - 1;
  for (int i = 1; i <= ell; ++i) {
    rep.check("bound_lo:layer=" + std::to_string(i), ConstraintSense::kAtLeast, x[i], Scalar(0), opt.policy);
    rep.check("bound_hi:layer=" + std::to_string(i), ConstraintSense::kAtMost, x[i], Scalar(1), opt.policy);
  }
  for (int i = 0; i <= ell; ++i) {
    Scalar in = i == 0 ? Scalar(1) : (x[i] * Scalar(*prof[i].delta_minus)).simplified();
    if (i > 0)
      rep.check("packing:layer=" + std::to_string(i), ConstraintSense::kAtMost, in, opt.congestion_allowance,
                opt.policy);
    if (i < ell)
      rep.check((i == 0 ? "covering_root:layer=" : "covering:layer=") + std::to_string(i), ConstraintSense::kAtLeast,
                (x[i + 1] * Scalar(*prof[i].delta_plus)).simplified(), (prof[i].k * in).simplified(), opt.policy);
  }
  return rep;
}

}  // namespace mmda::relaxations
