#pragma once

#include <set>
#include <utility>
#include <vector>

#include "mmda/restricted/ra_instance.hpp"

namespace mmda::restricted {

// (player, big resource index b in 0..k-1) fixed to 1.
using ConditionedPair = std::pair<std::uint32_t, std::uint32_t>;

struct MatchingReport {
  int k = 0;
  mpq_class epsilon;
  std::vector<ConditionedPair> conditioned;
  std::vector<mpq_class> expected_value;  // per player
  mpq_class min_value;
  bool at_least_one = false;

  Json to_json() const {
    Json j;
    j["k"] = k;
    j["epsilon"] = epsilon.get_str();
    Json cs = Json::array();
    for (auto [p, b] : conditioned) cs.push_back({p, b});
    j["conditioned"] = cs;
    Json ev = Json::array();
    for (const auto& v : expected_value) ev.push_back(v.get_str());
    j["expected_value"] = ev;
    j["min_value"] = min_value.get_str();
    j["min_value_approx"] = min_value.get_d();
    j["at_least_one"] = at_least_one;
    return j;
  }
};

// A uniform matching of the k big resources into the k+1 players, with the
// small resources fixed. Conditioning on c pairs leaves the k-c remaining
// big resources uniformly matched into the k+1-c remaining players.
inline MatchingReport verify_matching_distribution(const RAInstance& inst, const std::vector<ConditionedPair>& pairs) {
  if (!inst.lower_bound) throw RAError("the matching distribution needs the lower-bound instance");
  const int k = inst.lower_bound->k;
  const mpq_class& eps = inst.lower_bound->epsilon;
  mpq_class c_max = eps * k;
  if (mpq_class(static_cast<long>(pairs.size())) > c_max) throw RAError("more than eps*k conditioned pairs");
  std::set<std::uint32_t> ps, bs;
  for (auto [p, b] : pairs) {
    if (p > static_cast<std::uint32_t>(k) || b >= static_cast<std::uint32_t>(k))
      throw RAError("conditioned pair out of range");
    if (!ps.insert(p).second || !bs.insert(b).second) throw RAError("conditioned pairs share a player or a resource");
  }
  MatchingReport r;
  r.k = k;
  r.epsilon = eps;
  r.conditioned = pairs;
  const long c = static_cast<long>(pairs.size());
  mpq_class small = 3 * eps;
  mpq_class free_value = mpq_class(k - c, k + 1 - c) + small;
  free_value.canonicalize();
  mpq_class fixed_value = 1 + small;
  for (std::uint32_t i = 0; i <= static_cast<std::uint32_t>(k); ++i)
    r.expected_value.push_back(ps.count(i) ? fixed_value : free_value);
  r.min_value = *std::min_element(r.expected_value.begin(), r.expected_value.end());
  r.at_least_one = r.min_value >= 1;
  return r;
}

// Conditioning sets of every size c <= eps k, each the first c players
// matched to the first c big resources; by symmetry that covers every case.
inline std::vector<MatchingReport> matching_sweep(const RAInstance& inst) {
  std::vector<MatchingReport> out;
  mpq_class cm = inst.lower_bound->epsilon * inst.lower_bound->k;
  long cmax = mpz_class(cm.get_num() / cm.get_den()).get_si();
  for (long c = 0; c <= cmax; ++c) {
    std::vector<ConditionedPair> pairs;
    for (long i = 0; i < c; ++i) pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i));
    out.push_back(verify_matching_distribution(inst, pairs));
  }
  return out;
}

// Law of one player's bundle under the unconditioned distribution: s_i plus
// each b_j with probability 1/(k+1), or s_i alone with probability 1/(k+1).
inline std::vector<std::pair<std::vector<std::uint32_t>, mpq_class>> player_bundle_law(const RAInstance& inst,
                                                                                       std::uint32_t i) {
  const int k = inst.lower_bound->k;
  mpq_class p(1, k + 1);
  std::vector<std::pair<std::vector<std::uint32_t>, mpq_class>> law;
  law.push_back({{i}, p});
  for (int b = 0; b < k; ++b) law.push_back({{i, static_cast<std::uint32_t>(k + 1 + b)}, p});
  return law;
}

}  // namespace mmda::restricted
