#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmda/util/json_support.hpp"

namespace mmda::restricted {

class RAError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LowerBoundParams {
  int k = 0;
  mpq_class epsilon;
};

// Restricted assignment: resource j has value v_j for every eligible player.
struct RAInstance {
  std::uint32_t players = 0;
  std::vector<mpq_class> values;
  std::vector<std::vector<std::uint32_t>> eligible;  // R(i), sorted
  mpq_class target = 1;
  // Explicit big/small split of a canonical instance; empty otherwise.
  std::vector<char> big;
  std::optional<LowerBoundParams> lower_bound;

  std::size_t num_resources() const { return values.size(); }

  bool is_big(std::uint32_t j, const mpq_class& alpha = 1) const {
    if (!big.empty()) return big[j];
    return values[j] >= alpha * target;
  }

  // Players eligible for each resource.
  std::vector<std::vector<std::uint32_t>> holders() const {
    std::vector<std::vector<std::uint32_t>> h(values.size());
    for (std::uint32_t i = 0; i < players; ++i)
      for (std::uint32_t j : eligible[i]) h[j].push_back(i);
    return h;
  }

  void validate() const {
    if (eligible.size() != players) throw RAError("eligibility list size differs from the player count");
    if (!big.empty() && big.size() != values.size()) throw RAError("big flags size differs from the resource count");
    for (const auto& v : values)
      if (v < 0) throw RAError("negative resource value");
    for (const auto& r : eligible)
      for (std::uint32_t j : r)
        if (j >= values.size()) throw RAError("eligible resource out of range");
  }

  Json to_json() const {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["players"] = players;
    Json rs = Json::array();
    for (std::size_t r = 0; r < values.size(); ++r) {
      Json e = {{"value", values[r].get_str()}};
      if (!big.empty()) e["big"] = static_cast<bool>(big[r]);
      rs.push_back(e);
    }
    j["resources"] = rs;
    j["eligibility"] = eligible;
    j["T"] = target.get_str();
    if (lower_bound) j["lower_bound"] = {{"k", lower_bound->k}, {"epsilon", lower_bound->epsilon.get_str()}};
    return j;
  }

  static RAInstance from_json(const Json& j) {
    RAInstance r;
    r.players = j.at("players").get<std::uint32_t>();
    bool any_big = false;
    for (const auto& e : j.at("resources")) {
      mpq_class v(e.at("value").get<std::string>());
      v.canonicalize();
      r.values.push_back(v);
      any_big = any_big || e.contains("big");
    }
    if (any_big)
      for (const auto& e : j.at("resources")) r.big.push_back(e.value("big", false) ? 1 : 0);
    r.eligible = j.at("eligibility").get<std::vector<std::vector<std::uint32_t>>>();
    for (auto& e : r.eligible) std::sort(e.begin(), e.end());
    r.target = mpq_class(j.value("T", std::string("1")));
    r.target.canonicalize();
    r.validate();
    return r;
  }
};

// k+1 players, small resources s_1..s_{k+1} of value 3 eps (ids 0..k), big
// resources b_1..b_k of value 1 (ids k+1..2k); R(i) = {s_i, b_1..b_k}.
inline RAInstance build_lower_bound(int k, const mpq_class& epsilon) {
  if (k < 1) throw RAError("k must be positive");
  if (epsilon <= 0 || epsilon > mpq_class(1, 3)) throw RAError("epsilon must lie in (0, 1/3]");
  mpq_class ek = epsilon * k;
  ek.canonicalize();
  if (ek.get_den() != 1) throw RAError("epsilon * k must be an integer");
  RAInstance r;
  r.players = static_cast<std::uint32_t>(k + 1);
  mpq_class small = 3 * epsilon;
  small.canonicalize();
  r.values.assign(k + 1, small);
  r.values.resize(2 * k + 1, mpq_class(1));
  for (int i = 0; i <= k; ++i) {
    std::vector<std::uint32_t> e = {static_cast<std::uint32_t>(i)};
    for (int b = 0; b < k; ++b) e.push_back(static_cast<std::uint32_t>(k + 1 + b));
    r.eligible.push_back(std::move(e));
  }
  r.target = 1;
  r.lower_bound = LowerBoundParams{k, epsilon};
  return r;
}

// owner[j] is the player holding resource j, or -1.
using RAAssignment = std::vector<std::int64_t>;

inline std::vector<mpq_class> player_values(const RAInstance& inst, const RAAssignment& a) {
  std::vector<mpq_class> v(inst.players, 0);
  for (std::size_t j = 0; j < a.size(); ++j)
    if (a[j] >= 0) v[a[j]] += inst.values[j];
  return v;
}

inline mpq_class assignment_value(const RAInstance& inst, const RAAssignment& a) {
  auto v = player_values(inst, a);
  return v.empty() ? mpq_class(0) : *std::min_element(v.begin(), v.end());
}

inline bool assignment_valid(const RAInstance& inst, const RAAssignment& a) {
  if (a.size() != inst.num_resources()) return false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] < 0) continue;
    if (a[j] >= static_cast<std::int64_t>(inst.players)) return false;
    const auto& e = inst.eligible[a[j]];
    if (!std::binary_search(e.begin(), e.end(), static_cast<std::uint32_t>(j))) return false;
  }
  return true;
}

struct RABruteforce {
  mpq_class value;
  RAAssignment assignment;
  std::uint64_t assignments = 0;

  Json to_json() const {
    return {{"optimum", value.get_str()}, {"optimum_approx", value.get_d()}, {"assignment", assignment},
            {"assignments_enumerated", assignments}};
  }
};

// Every resource goes to one of its eligible players; giving a resource away
// never lowers the minimum, so unassigned outcomes are skipped.
inline RABruteforce bruteforce_ra(const RAInstance& inst, std::uint64_t cap = 50'000'000) {
  inst.validate();
  auto h = inst.holders();
  long double total = 1;
  for (const auto& x : h) total *= std::max<std::size_t>(1, x.size());
  if (total > static_cast<long double>(cap)) throw RAError("too many assignments to enumerate");
  RABruteforce best;
  best.value = -1;
  RAAssignment a(inst.num_resources(), -1);
  std::vector<mpq_class> val(inst.players, 0);
  std::vector<std::size_t> pos(inst.num_resources(), 0);
  // Odometer over the resources that have holders.
  std::vector<std::uint32_t> live;
  for (std::uint32_t j = 0; j < h.size(); ++j)
    if (!h[j].empty()) {
      live.push_back(j);
      a[j] = h[j][0];
      val[h[j][0]] += inst.values[j];
    }
  while (true) {
    ++best.assignments;
    mpq_class m = val.empty() ? mpq_class(0) : *std::min_element(val.begin(), val.end());
    if (m > best.value) {
      best.value = m;
      best.assignment = a;
    }
    std::size_t d = 0;
    for (; d < live.size(); ++d) {
      std::uint32_t j = live[d];
      val[a[j]] -= inst.values[j];
      if (++pos[j] < h[j].size()) {
        a[j] = h[j][pos[j]];
        val[a[j]] += inst.values[j];
        break;
      }
      pos[j] = 0;
      a[j] = h[j][0];
      val[a[j]] += inst.values[j];
    }
    if (d == live.size()) break;
  }
  return best;
}

}  // namespace mmda::restricted
