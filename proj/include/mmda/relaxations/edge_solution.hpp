#pragma once

#include <algorithm>
#include <memory>
#include <utility>
#include <vector>

#include "mmda/instances/layered_instance.hpp"
#include "mmda/relaxations/value_table.hpp"

namespace mmda::relaxations {

using instances::EdgeId;
using instances::LayeredInstance;
using instances::VertexId;

// Edge values x_e, stored as interned classes. Dense storage holds one class
// per edge; sparse storage holds sorted (edge, class) pairs for the support.
class EdgeSolution {
 public:
  EdgeSolution(const LayeredInstance& g, std::shared_ptr<ValueTable> table, bool dense)
      : g_(&g), table_(std::move(table)), dense_(dense) {
    if (dense_) classes_.assign(g.num_edges(), kZeroClass);
  }

  static EdgeSolution zeros(const LayeredInstance& g) {
    return EdgeSolution(g, std::make_shared<ValueTable>(), false);
  }

  const LayeredInstance& instance() const { return *g_; }
  const ValueTable& table() const { return *table_; }
  const std::shared_ptr<ValueTable>& shared_table() const { return table_; }
  bool dense() const { return dense_; }

  void set(EdgeId e, const Scalar& x) { set_class(e, table_->intern(x)); }

  void set_class(EdgeId e, ClassId c) {
    g_->check_edge(e);
    if (dense_) {
      classes_[e] = c;
      return;
    }
    auto it = std::lower_bound(sparse_.begin(), sparse_.end(), e,
                               [](const auto& p, EdgeId id) { return p.first < id; });
    if (it != sparse_.end() && it->first == e) {
      if (c == kZeroClass) sparse_.erase(it);
      else it->second = c;
    } else if (c != kZeroClass) {
      sparse_.insert(it, {e, c});
    }
  }

  // Appends in increasing edge order; the fast path for builders.
  void push_sparse(EdgeId e, ClassId c) {
    if (dense_ || (!sparse_.empty() && sparse_.back().first >= e)) {
      set_class(e, c);
      return;
    }
    if (c != kZeroClass) sparse_.emplace_back(e, c);
  }

  ClassId class_of(EdgeId e) const {
    if (dense_) return classes_.at(e);
    auto it = std::lower_bound(sparse_.begin(), sparse_.end(), e,
                               [](const auto& p, EdgeId id) { return p.first < id; });
    return it != sparse_.end() && it->first == e ? it->second : kZeroClass;
  }
  const Scalar& value(EdgeId e) const { return (*table_)[class_of(e)]; }

  // Calls f(edge, class) for every edge with a nonzero value, in edge order.
  template <class F>
  void for_each_support(F&& f) const {
    if (dense_) {
      for (EdgeId e = 0; e < classes_.size(); ++e)
        if (classes_[e] != kZeroClass) f(e, classes_[e]);
    } else {
      for (const auto& [e, c] : sparse_) f(e, c);
    }
  }

  std::size_t support_size() const {
    if (!dense_) return sparse_.size();
    return static_cast<std::size_t>(std::count_if(classes_.begin(), classes_.end(),
                                                  [](ClassId c) { return c != kZeroClass; }));
  }

 private:
  const LayeredInstance* g_;
  std::shared_ptr<ValueTable> table_;
  bool dense_;
  std::vector<ClassId> classes_;
  std::vector<std::pair<EdgeId, ClassId>> sparse_;
};

// x_e for an edge into L_i: gamma_{i-1} times prod_{j<i} gamma_{j-1} delta_j^-.
// Needs uniform degrees per layer.
inline std::vector<Scalar> assignment_layer_values(const std::vector<instances::LayerProfile>& prof) {
  std::vector<Scalar> out(prof.size());
  Scalar prefix(1);
  for (std::size_t i = 1; i < prof.size(); ++i) {
    if (i > 1) {
      const auto& dm = prof[i - 1].delta_minus;
      if (!dm) throw instances::InstanceError("layer in-degrees are not uniform");
      prefix = (prefix * prof[i - 2].gamma * Scalar(*dm)).simplified();
    }
    if (!prof[i - 1].delta_plus) throw instances::InstanceError("layer out-degrees are not uniform");
    out[i] = (prof[i - 1].gamma * prefix).simplified();
  }
  return out;
}

inline std::vector<Scalar> assignment_layer_values(const LayeredInstance& g) {
  return assignment_layer_values(g.profile());
}

inline EdgeSolution assignment_solution(const LayeredInstance& g) {
  auto table = std::make_shared<ValueTable>();
  EdgeSolution x(g, table, true);
  std::vector<Scalar> vals = assignment_layer_values(g);
  for (int i = 1; i < g.num_layers(); ++i) {
    ClassId c = table->intern(vals[i]);
    for (EdgeId e = g.edge_layer_begin(i); e < g.edge_layer_end(i); ++e) x.set_class(e, c);
  }
  return x;
}

}  // namespace mmda::relaxations
