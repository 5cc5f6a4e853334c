#pragma once

#include <map>
#include <vector>

#include "mmda/instances/appendix_instances.hpp"
#include "mmda/integral/certificate.hpp"

namespace mmda::appendixb {

using instances::LayeredInstance;
using instances::SantaView;
using instances::VertexId;

struct Configuration {
  std::vector<std::uint32_t> resources;  // indices into SantaView::resource_vertex
  mpq_class weight;
};

struct ConfigSolution {
  int k = 0;
  SantaView view;
  std::vector<std::vector<Configuration>> configs;  // per player
};

// The source splits L1 into k blocks of k; below it each player keeps its
// private resource at 1 - 1/k and its k children at 1/k.
inline ConfigSolution build_config_solution(const LayeredInstance& g) {
  ConfigSolution s;
  s.view = instances::santa_view(g);
  s.k = g.family_k();
  const auto uk = static_cast<std::uint32_t>(s.k);
  mpq_class w(1, s.k);
  std::vector<std::int64_t> resource_of(g.num_vertices(), -1);
  for (std::uint32_t r = 0; r < s.view.resource_vertex.size(); ++r) resource_of[s.view.resource_vertex[r]] = r;
  s.configs.resize(s.view.player_vertex.size());
  for (std::uint32_t p = 0; p < s.view.player_vertex.size(); ++p) {
    VertexId v = s.view.player_vertex[p];
    std::vector<std::uint32_t> kids;
    for (auto e : g.out_edges(v)) kids.push_back(static_cast<std::uint32_t>(resource_of[g.head(e)]));
    if (v == g.source()) {
      for (std::uint32_t b = 0; b < uk; ++b)
        s.configs[p].push_back({{kids.begin() + b * uk, kids.begin() + (b + 1) * uk}, w});
    } else {
      s.configs[p].push_back({{static_cast<std::uint32_t>(s.view.private_resource[p])}, 1 - w});
      s.configs[p].push_back({kids, w});
    }
  }
  return s;
}

struct ConfigCheck {
  bool weights_nonnegative = true;
  bool weights_sum_to_one = true;
  bool configurations_meet_target = true;
  bool loads_within_one = true;
  mpq_class max_load = 0, min_config_value = -1;
  std::uint64_t configurations = 0;
  std::vector<std::string> failures;

  bool passed() const {
    return weights_nonnegative && weights_sum_to_one && configurations_meet_target && loads_within_one;
  }

  Json to_json() const {
    return {{"passed", passed()},
            {"configurations", configurations},
            {"weights_nonnegative", weights_nonnegative},
            {"weights_sum_to_one", weights_sum_to_one},
            {"configurations_meet_target", configurations_meet_target},
            {"loads_within_one", loads_within_one},
            {"max_load", max_load.get_str()},
            {"min_configuration_value", min_config_value.get_str()},
            {"failures", failures}};
  }
};

inline ConfigCheck verify_config_solution(const ConfigSolution& s, const mpq_class& target = 1) {
  ConfigCheck c;
  std::vector<mpq_class> load(s.view.resource_vertex.size(), 0);
  for (std::size_t p = 0; p < s.configs.size(); ++p) {
    std::map<std::uint32_t, mpq_class> val;
    for (const auto& v : s.view.valuations[p]) val[v.resource] = v.value.rational();
    mpq_class total = 0;
    for (const auto& cf : s.configs[p]) {
      ++c.configurations;
      if (cf.weight < 0) {
        c.weights_nonnegative = false;
        c.failures.push_back("negative weight at player " + std::to_string(p));
      }
      total += cf.weight;
      mpq_class value = 0;
      for (std::uint32_t r : cf.resources) {
        auto it = val.find(r);
        if (it != val.end()) value += it->second;
        load[r] += cf.weight;
      }
      if (c.min_config_value < 0 || value < c.min_config_value) c.min_config_value = value;
      if (value < target) {
        c.configurations_meet_target = false;
        c.failures.push_back("configuration below target at player " + std::to_string(p));
      }
    }
    if (total != 1) {
      c.weights_sum_to_one = false;
      c.failures.push_back("weights of player " + std::to_string(p) + " sum to " + total.get_str());
    }
  }
  for (std::size_t r = 0; r < load.size(); ++r) {
    c.max_load = std::max(c.max_load, load[r]);
    if (load[r] > 1) {
      c.loads_within_one = false;
      c.failures.push_back("resource " + std::to_string(r) + " loaded " + load[r].get_str());
    }
  }
  return c;
}

struct DefeatReport {
  std::uint64_t endpoints = 0, infeasible = 0;
  mpz_class min_demand, max_supply;
  std::vector<integral::HallResult> results;

  bool all_infeasible() const { return endpoints > 0 && infeasible == endpoints; }
  bool none_infeasible() const { return infeasible == 0; }

  Json to_json(bool detail = false) const {
    Json j = {{"l1_endpoints", endpoints},
              {"infeasible_endpoints", infeasible},
              {"all_infeasible", all_infeasible()},
              {"min_witness_demand", min_demand.get_str()},
              {"max_witness_supply", max_supply.get_str()}};
    if (detail) {
      Json rs = Json::array();
      for (const auto& h : results) rs.push_back(h.to_json());
      j["endpoints"] = rs;
    }
    return j;
  }
};

// Conditioning on an L1 edge asks for a subtree below its endpoint; each
// endpoint is checked for a depth at which demand exceeds reachable supply.
inline DefeatReport sa1_defeats(const LayeredInstance& g, const numerics::PrecisionPolicy& pol = {}) {
  DefeatReport d;
  bool first = true;
  for (VertexId v = g.layer_begin(1); v < g.layer_end(1); ++v) {
    integral::HallResult h = integral::hall_infeasibility(g, v, {}, pol);
    ++d.endpoints;
    if (h.infeasible) ++d.infeasible;
    if (first || h.demand < d.min_demand) d.min_demand = h.demand;
    if (first || h.supply > d.max_supply) d.max_supply = h.supply;
    first = false;
    d.results.push_back(std::move(h));
  }
  return d;
}

}  // namespace mmda::appendixb
