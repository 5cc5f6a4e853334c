#pragma once

#include <memory>
#include <string>
#include <utility>

#include "mmda/instances/appendix_instances.hpp"
#include "mmda/relaxations/assignment_check.hpp"
#include "mmda/relaxations/edge_solution.hpp"
#include "mmda/relaxations/subtree_family.hpp"

namespace mmda::shadow {

using instances::EdgeId;
using instances::LayeredInstance;
using instances::VertexId;
using numerics::Scalar;
using relaxations::ClassId;
using relaxations::ConstraintSense;
using relaxations::EdgeSolution;
using relaxations::SubtreeFamily;
using relaxations::ViolationReport;

// Base solution x and one subtree solution per edge on a common instance.
class ShadowModel {
 public:
  ShadowModel(EdgeSolution x, std::shared_ptr<const SubtreeFamily> family)
      : x_(std::move(x)), family_(std::move(family)) {
    if (!family_) throw instances::InstanceError("shadow model needs a subtree family");
    if (&x_.instance() != &family_->instance())
      throw instances::InstanceError("base solution and family live on different instances");
  }

  const LayeredInstance& instance() const { return x_.instance(); }
  const EdgeSolution& base() const { return x_; }
  const SubtreeFamily& family() const { return *family_; }
  std::string name() const { return family_->name(); }

 private:
  EdgeSolution x_;
  std::shared_ptr<const SubtreeFamily> family_;
};

// Every base and subtree value lies in [0,1] and x^{(e)}_e = 1.
inline ViolationReport validate_model(const ShadowModel& model) {
  ViolationReport rep("shadow_model:" + model.name());
  const auto& xt = model.base().table();
  const auto& ft = model.family().table();
  for (ClassId c = 0; c < xt.size(); ++c) {
    rep.check("base_lower:class=" + std::to_string(c), ConstraintSense::kAtLeast, xt[c], Scalar(0));
    rep.check("base_upper:class=" + std::to_string(c), ConstraintSense::kAtMost, xt[c], Scalar(1));
  }
  for (ClassId c = 0; c < ft.size(); ++c) {
    rep.check("subtree_lower:class=" + std::to_string(c), ConstraintSense::kAtLeast, ft[c], Scalar(0));
    rep.check("subtree_upper:class=" + std::to_string(c), ConstraintSense::kAtMost, ft[c], Scalar(1));
  }
  const LayeredInstance& g = model.instance();
  std::uint64_t bad = 0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Scalar& v = ft[model.family().value_class(e, e)];
    if (!(v.is_rational() && v.rational() == 1)) ++bad;
  }
  rep.check("self_value_one", ConstraintSense::kEqual, Scalar(static_cast<unsigned long>(bad)), Scalar(0));
  return rep;
}

inline ShadowModel depth_three_model(const LayeredInstance& g) {
  return ShadowModel(relaxations::assignment_solution(g), std::make_shared<relaxations::DepthThreeFamily>(g));
}

// Same base solution, no correlation between edges.
inline ShadowModel independent_model(const LayeredInstance& g) {
  return ShadowModel(relaxations::assignment_solution(g), std::make_shared<relaxations::IndependentFamily>(g));
}

// 1/k on source edges, 1 on private edges, 0 on public edges.
inline EdgeSolution appendix_c_base_solution(const LayeredInstance& g) {
  if (g.family() != instances::Family::kSubtreeCounterexample)
    throw instances::InstanceError("base solution needs the shared-public-sink instance");
  auto table = std::make_shared<relaxations::ValueTable>();
  EdgeSolution x(g, table, true);
  ClassId inv_k = table->intern(Scalar(mpq_class(1, g.family_k()))), one = table->intern(Scalar(1));
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    if (g.edge_layer(e) == 1) x.set_class(e, inv_k);
    else if (!instances::is_public_sink(g, g.head(e))) x.set_class(e, one);
  }
  return x;
}

inline ShadowModel appendix_c_model(const LayeredInstance& g) {
  return ShadowModel(appendix_c_base_solution(g), std::make_shared<relaxations::AppendixCFamily>(g));
}

}  // namespace mmda::shadow
