#pragma once

#include <bit>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mmda/instances/appendix_instances.hpp"
#include "mmda/instances/graph_queries.hpp"
#include "mmda/instances/mmda_builder.hpp"
#include "mmda/relaxations/assignment_check.hpp"

namespace mmda::relaxations {

using EdgeClassFn = std::function<void(EdgeId, ClassId)>;

// One solution x^{(f)} per edge f. Values live in a shared table so that the
// shadow engine can work with class ids.
class SubtreeFamily {
 public:
  explicit SubtreeFamily(const LayeredInstance& g) : g_(&g), table_(std::make_shared<ValueTable>()) {}
  virtual ~SubtreeFamily() = default;

  const LayeredInstance& instance() const { return *g_; }
  const ValueTable& table() const { return *table_; }
  const std::shared_ptr<ValueTable>& shared_table() const { return table_; }

  virtual std::string name() const = 0;
  // Class of x^{(f)}_e.
  virtual ClassId value_class(EdgeId f, EdgeId e) const = 0;
  // Support of x^{(f)}, in increasing edge order.
  virtual void for_each_support(EdgeId f, const EdgeClassFn& fn) const = 0;
  // Every f with x^{(f)}_e > 0, in increasing order of f, with the class of
  // x^{(f)}_e. The default scans A(e) and e itself.
  virtual void for_each_trigger(EdgeId e, const EdgeClassFn& fn) const {
    std::vector<EdgeId> cand = instances::ancestor_edges(*g_, e);
    cand.push_back(e);
    std::sort(cand.begin(), cand.end());
    for (EdgeId f : cand) {
      ClassId c = value_class(f, e);
      if (c != kZeroClass) fn(f, c);
    }
  }

  EdgeSolution solution(EdgeId f) const {
    EdgeSolution x(*g_, table_, false);
    for_each_support(f, [&](EdgeId e, ClassId c) { x.push_sparse(e, c); });
    return x;
  }

 protected:
  ClassId intern(const Scalar& v) { return table_->intern(v); }

  const LayeredInstance* g_;
  std::shared_ptr<ValueTable> table_;
};

// x^{(e)} is the indicator of e.
class IndependentFamily : public SubtreeFamily {
 public:
  explicit IndependentFamily(const LayeredInstance& g) : SubtreeFamily(g), one_(intern(Scalar(1))) {}
  std::string name() const override { return "independent"; }
  ClassId value_class(EdgeId f, EdgeId e) const override { return f == e ? one_ : kZeroClass; }
  void for_each_support(EdgeId f, const EdgeClassFn& fn) const override { fn(f, one_); }
  void for_each_trigger(EdgeId e, const EdgeClassFn& fn) const override { fn(e, one_); }

 private:
  ClassId one_;
};

// Closed-form subtree solutions of the depth-3 instance (epsilon = 1).
class DepthThreeFamily : public SubtreeFamily {
 public:
  explicit DepthThreeFamily(const LayeredInstance& g) : SubtreeFamily(g) {
    const auto& p = g.params();
    if (g.family() != instances::Family::kMmda || !p || p->ell != 3)
      throw instances::InstanceError("closed-form subtree solutions need a depth-3 instance with epsilon = 1");
    m_ = p->m;
    r_ = p->rho_m();
    one_ = intern(Scalar(1));
    l2_ = intern(Scalar(mpq_class(1, numerics::binomial(2 * r_, r_))));
    mpq_class base(numerics::binomial(m_ - r_, r_), numerics::binomial(m_, r_));
    for (int j = 0; j <= r_; ++j) l3_.push_back(intern(Scalar(mpq_class(base / numerics::binomial(m_ - 2 * r_ + j, j)))));
  }

  std::string name() const override { return "depth3_closed_form"; }

  // C((1-rho)m, rho m) / C(m, rho m): in-flow of x^{(e)} at each sink, e in L1.
  Scalar sink_inflow() const {
    return Scalar(mpq_class(numerics::binomial(m_ - r_, r_), numerics::binomial(m_, r_)));
  }

  ClassId value_class(EdgeId f, EdgeId e) const override {
    if (f == e) return one_;
    const LayeredInstance& g = *g_;
    int lf = g.edge_layer(f), le = g.edge_layer(e);
    if (lf == 1) {
      VertexId v = g.head(f);
      if (le == 2) return g.tail(e) == v ? l2_ : kZeroClass;
      if (le == 3) {
        instances::Label sv = g.label(v), sw = g.label(g.tail(e));
        if ((sv & sw) != sv) return kZeroClass;
        return l3_[std::popcount(sv & g.label(g.head(e)))];
      }
      return kZeroClass;
    }
    if (lf == 2 && le == 3) return g.tail(e) == g.head(f) ? one_ : kZeroClass;
    return kZeroClass;
  }

  void for_each_support(EdgeId f, const EdgeClassFn& fn) const override {
    const LayeredInstance& g = *g_;
    int lf = g.edge_layer(f);
    if (lf == 3) {
      fn(f, one_);
      return;
    }
    if (lf == 2) {
      fn(f, one_);
      for (EdgeId e : g.out_edges(g.head(f))) fn(e, one_);
      return;
    }
    VertexId v = g.head(f);
    instances::Label sv = g.label(v);
    fn(f, one_);
    std::vector<std::pair<EdgeId, ClassId>> l3;
    for (EdgeId e : g.out_edges(v)) {
      fn(e, l2_);
      for (EdgeId e3 : g.out_edges(g.head(e))) l3.emplace_back(e3, l3_[std::popcount(sv & g.label(g.head(e3)))]);
    }
    std::sort(l3.begin(), l3.end());
    for (const auto& [e, c] : l3) fn(e, c);
  }

  void for_each_trigger(EdgeId e, const EdgeClassFn& fn) const override {
    const LayeredInstance& g = *g_;
    int le = g.edge_layer(e);
    if (le == 2) {
      fn(g.in_begin(g.tail(e)), l2_);
    } else if (le == 3) {
      VertexId w = g.tail(e);
      instances::Label sw = g.label(w), st = g.label(g.head(e));
      std::vector<std::pair<EdgeId, ClassId>> l1;
      instances::for_each_subset_of(sw, r_, [&](instances::Label sv) {
        VertexId v = g.vertex_with_label(1, sv);
        l1.emplace_back(g.in_begin(v), l3_[std::popcount(sv & st)]);
      });
      std::sort(l1.begin(), l1.end());
      for (const auto& [f, c] : l1) fn(f, c);
      for (EdgeId f = g.in_begin(w); f < g.in_end(w); ++f) fn(f, one_);
    }
    fn(e, one_);
  }

 private:
  int m_ = 0, r_ = 0;
  ClassId one_ = 0, l2_ = 0;
  std::vector<ClassId> l3_;
};

// Subtree solutions of the depth-2 instance whose L1 vertices share k public
// sinks: x^{(e)} for e into v puts 1 on e and on every public edge out of v.
class AppendixCFamily : public SubtreeFamily {
 public:
  explicit AppendixCFamily(const LayeredInstance& g) : SubtreeFamily(g), one_(intern(Scalar(1))) {
    if (g.family() != instances::Family::kSubtreeCounterexample)
      throw instances::InstanceError("family needs the shared-public-sink instance");
  }
  std::string name() const override { return "appendix_c"; }

  ClassId value_class(EdgeId f, EdgeId e) const override {
    if (f == e) return one_;
    const LayeredInstance& g = *g_;
    if (g.edge_layer(f) == 1 && g.edge_layer(e) == 2 && g.tail(e) == g.head(f) &&
        instances::is_public_sink(g, g.head(e)))
      return one_;
    return kZeroClass;
  }
  void for_each_support(EdgeId f, const EdgeClassFn& fn) const override {
    const LayeredInstance& g = *g_;
    fn(f, one_);
    if (g.edge_layer(f) != 1) return;
    for (EdgeId e : g.out_edges(g.head(f)))
      if (instances::is_public_sink(g, g.head(e))) fn(e, one_);
  }
  void for_each_trigger(EdgeId e, const EdgeClassFn& fn) const override {
    const LayeredInstance& g = *g_;
    if (g.edge_layer(e) == 2 && instances::is_public_sink(g, g.head(e))) fn(g.in_begin(g.tail(e)), one_);
    fn(e, one_);
  }

 private:
  ClassId one_;
};

// Arbitrary solutions given edge by edge; x^{(f)}_f = 1 is added when absent.
class ExplicitFamily : public SubtreeFamily {
 public:
  explicit ExplicitFamily(const LayeredInstance& g) : SubtreeFamily(g), one_(intern(Scalar(1))) {}
  std::string name() const override { return "explicit"; }

  void set(EdgeId f, EdgeId e, const Scalar& v) {
    g_->check_edge(f);
    g_->check_edge(e);
    ClassId c = intern(v);
    if (c == kZeroClass) values_[f].erase(e);
    else values_[f][e] = c;
  }

  ClassId value_class(EdgeId f, EdgeId e) const override {
    if (f == e) return one_;
    auto it = values_.find(f);
    if (it == values_.end()) return kZeroClass;
    auto jt = it->second.find(e);
    return jt == it->second.end() ? kZeroClass : jt->second;
  }
  void for_each_support(EdgeId f, const EdgeClassFn& fn) const override {
    std::map<EdgeId, ClassId> s;
    if (auto it = values_.find(f); it != values_.end()) s = it->second;
    s[f] = one_;
    for (const auto& [e, c] : s) fn(e, c);
  }

 private:
  ClassId one_;
  std::map<EdgeId, std::map<EdgeId, ClassId>> values_;
};

inline std::unique_ptr<SubtreeFamily> subtree_solutions(const LayeredInstance& g) {
  return std::make_unique<DepthThreeFamily>(g);
}

// Checks x^{(f)}_f = 1, support within D(f) and f, and the relocated-source
// assignment constraints for every f.
inline ViolationReport verify_subtree_family(const SubtreeFamily& fam, const AssignmentCheckOptions& base = {}) {
  const LayeredInstance& g = fam.instance();
  ViolationReport rep("subtree_family:" + fam.name(), base.keep_all);
  AssignmentCheckOptions opt = base;
  for (EdgeId f = 0; f < g.num_edges(); ++f) {
    EdgeSolution x = fam.solution(f);
    rep.check("self_value:f=" + std::to_string(f), ConstraintSense::kEqual, x.value(f), Scalar(1), opt.policy);
    std::vector<EdgeId> allowed = instances::descendant_edges(g, f);
    std::uint64_t outside = 0;
    x.for_each_support([&](EdgeId e, ClassId) {
      if (e != f && !std::binary_search(allowed.begin(), allowed.end(), e)) ++outside;
    });
    rep.check("support_in_descendants:f=" + std::to_string(f), ConstraintSense::kEqual,
              Scalar(static_cast<unsigned long>(outside)), Scalar(0), opt.policy);
    opt.root = g.head(f);
    ViolationReport r = verify_assignment(g, x, opt);
    rep.merge(r);
  }
  return rep;
}

// Sum over in(t) of x^{(e)} equals C((1-rho)m, rho m)/C(m, rho m) at every
// sink t, for every e in L1.
inline ViolationReport flow_splitting_report(const DepthThreeFamily& fam, bool keep_all = false) {
  const LayeredInstance& g = fam.instance();
  ViolationReport rep("flow_splitting", keep_all);
  Scalar target = fam.sink_inflow();
  const int d = g.depth();
  for (EdgeId f = g.edge_layer_begin(1); f < g.edge_layer_end(1); ++f) {
    std::map<VertexId, std::map<ClassId, unsigned long>> in;
    fam.for_each_support(f, [&](EdgeId e, ClassId c) {
      if (g.edge_layer(e) == d) ++in[g.head(e)][c];
    });
    for (VertexId t = g.layer_begin(d); t < g.layer_end(d); ++t) {
      LinearSum s;
      if (auto it = in.find(t); it != in.end())
        for (const auto& [c, n] : it->second) s.add(fam.table()[c], mpz_class(n));
      rep.check("flow_split:f=" + std::to_string(f) + ",t=" + std::to_string(t), ConstraintSense::kEqual, s,
                LinearSum(target));
    }
  }
  return rep;
}

}  // namespace mmda::relaxations
