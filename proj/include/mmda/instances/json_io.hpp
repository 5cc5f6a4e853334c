#pragma once

#include <string>

#include "mmda/instances/appendix_instances.hpp"
#include "mmda/instances/layered_instance.hpp"
#include "mmda/instances/mmda_builder.hpp"
#include "mmda/util/json_support.hpp"

namespace mmda::instances {

inline Json instance_to_json(const LayeredInstance& g) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "instance";
  j["family"] = to_string(g.family());
  Json params = Json::object();
  if (g.params()) {
    const auto& p = *g.params();
    params["m"] = p.m;
    params["rho"] = rational_text(p.rho);
    params["epsilon"] = rational_text(p.epsilon);
    params["ell"] = p.ell;
  } else {
    params["k"] = g.family_k();
  }
  j["params"] = params;
  j["integral_requirements"] = g.integral_requirements();
  j["num_vertices"] = g.num_vertices();
  j["num_edges"] = g.num_edges();
  Json layers = Json::array(), profile = Json::array();
  for (const auto& lp : g.profile()) {
    Json l;
    l["index"] = lp.index;
    if (lp.label_size >= 0) l["label_size"] = lp.label_size;
    l["size"] = lp.size;
    layers.push_back(l);
    Json q;
    q["layer"] = lp.index;
    q["k"] = scalar_json(lp.k);
    q["gamma"] = scalar_json(lp.gamma);
    q["delta_plus"] = lp.delta_plus ? Json(lp.delta_plus->get_str()) : Json(nullptr);
    q["delta_minus"] = lp.delta_minus ? Json(lp.delta_minus->get_str()) : Json(nullptr);
    profile.push_back(q);
  }
  j["layers"] = layers;
  j["profile"] = profile;
  return j;
}

// Rebuilds an instance from its parameters; edges are regenerated.
inline LayeredInstance instance_from_json(const Json& j, const BuildLimits& limits = BuildLimits{}) {
  if (!j.contains("family") || !j.contains("params")) throw InstanceError("instance JSON needs family and params");
  std::string fam = j.at("family").get<std::string>();
  const Json& p = j.at("params");
  LayeredInstance g;
  if (fam == "mmda") {
    int m = p.at("m").get<int>(), ell = p.at("ell").get<int>();
    mpq_class rho(p.at("rho").get<std::string>());
    rho.canonicalize();
    InstanceParams ip = InstanceParams::make(m, rho, ell);
    if (p.contains("epsilon") && mpq_class(p.at("epsilon").get<std::string>()) != ip.epsilon)
      throw InstanceError("epsilon does not equal 3/ell");
    g = build_mmda(ip, limits);
  } else if (fam == "config_lp_gap") {
    g = build_config_lp_gap(p.at("k").get<int>());
  } else if (fam == "subtree_counterexample") {
    g = build_subtree_counterexample(p.at("k").get<int>());
  } else {
    throw InstanceError("unknown instance family: " + fam);
  }
  if (j.value("integral_requirements", false)) g = g.with_integral_requirements();
  return g;
}

}  // namespace mmda::instances
