#pragma once

#include <map>
#include <utility>
#include <vector>

#include "mmda/relaxations/violation_report.hpp"
#include "mmda/restricted/ra_instance.hpp"

namespace mmda::restricted {

using relaxations::ConstraintSense;
using relaxations::ViolationReport;

// Player i of the original becomes small_side[i] and big_side[i], joined by
// coupling[i]. Original resources keep their ids; couplings follow them.
struct CanonicalInstance {
  RAInstance inst;
  mpq_class alpha, target;
  std::vector<std::uint32_t> small_side, big_side, coupling;
  std::vector<char> orig_big;  // original resource was big (v_j >= alpha T)
  std::size_t original_resources = 0;

  Json to_json() const {
    Json j = inst.to_json();
    j["alpha"] = alpha.get_str();
    j["small_side"] = small_side;
    j["big_side"] = big_side;
    j["coupling"] = coupling;
    return j;
  }
};

inline CanonicalInstance canonicalize(const RAInstance& orig, const mpq_class& alpha, const mpq_class& T) {
  if (alpha < 1 || T <= 0) throw RAError("canonicalization needs alpha >= 1 and T > 0");
  orig.validate();
  CanonicalInstance c;
  c.alpha = alpha;
  c.target = T;
  c.original_resources = orig.num_resources();
  RAInstance& r = c.inst;
  r.target = T;
  r.players = 2 * orig.players;
  for (std::size_t j = 0; j < orig.num_resources(); ++j) {
    bool b = orig.values[j] >= alpha * T;
    c.orig_big.push_back(b ? 1 : 0);
    r.values.push_back(b ? T : orig.values[j]);
    r.big.push_back(b ? 1 : 0);
  }
  r.eligible.resize(r.players);
  for (std::uint32_t i = 0; i < orig.players; ++i) {
    auto cid = static_cast<std::uint32_t>(r.values.size());
    r.values.push_back(T);
    r.big.push_back(1);
    c.coupling.push_back(cid);
    c.small_side.push_back(2 * i);
    c.big_side.push_back(2 * i + 1);
    auto& sm = r.eligible[2 * i];
    auto& bg = r.eligible[2 * i + 1];
    for (std::uint32_t j : orig.eligible[i]) (c.orig_big[j] ? bg : sm).push_back(j);
    sm.push_back(cid);
    bg.push_back(cid);
  }
  return c;
}

// Splits one original player's bundle between its two canonical players. A
// bundle with a big resource sends the coupling to the small side, whose
// small resources are then left unassigned.
inline std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> split_bundle(
    const CanonicalInstance& c, std::uint32_t i, const std::vector<std::uint32_t>& bundle) {
  std::vector<std::uint32_t> sm, bg;
  for (std::uint32_t j : bundle) (c.orig_big[j] ? bg : sm).push_back(j);
  if (bg.empty()) {
    bg.push_back(c.coupling[i]);
  } else {
    sm.assign(1, c.coupling[i]);
  }
  return {sm, bg};
}

inline RAAssignment to_canonical(const CanonicalInstance& c, const RAAssignment& a) {
  std::size_t np = c.coupling.size();
  std::vector<std::vector<std::uint32_t>> bundles(np);
  for (std::size_t j = 0; j < a.size(); ++j)
    if (a[j] >= 0) bundles[a[j]].push_back(static_cast<std::uint32_t>(j));
  RAAssignment out(c.inst.num_resources(), -1);
  for (std::uint32_t i = 0; i < np; ++i) {
    auto [sm, bg] = split_bundle(c, i, bundles[i]);
    for (std::uint32_t j : sm) out[j] = c.small_side[i];
    for (std::uint32_t j : bg) out[j] = c.big_side[i];
  }
  return out;
}

// Original player i receives whatever its two canonical players hold. Value
// is kept up to the cap T on each side.
inline RAAssignment from_canonical(const CanonicalInstance& c, const RAAssignment& a) {
  RAAssignment out(c.original_resources, -1);
  for (std::size_t j = 0; j < c.original_resources; ++j)
    if (a[j] >= 0) out[j] = a[j] / 2;
  return out;
}

// One-round lift restricted to what the mapping needs: y_ij for every
// eligible pair and y_{ij, ib} for players with a single big resource b.
struct SAWitness {
  std::vector<std::map<std::uint32_t, mpq_class>> single;
  std::vector<std::map<std::uint32_t, mpq_class>> pair;  // keyed by the small resource j
};

// y from independent per-player bundle laws (outcome, probability).
inline SAWitness lift_from_bundles(
    const CanonicalInstance& c,
    const std::vector<std::vector<std::pair<std::vector<std::uint32_t>, mpq_class>>>& laws) {
  SAWitness y;
  y.single.resize(c.inst.players);
  y.pair.resize(c.inst.players);
  for (std::uint32_t p = 0; p < c.inst.players; ++p)
    for (std::uint32_t j : c.inst.eligible[p]) y.single[p][j] = 0;
  for (std::uint32_t i = 0; i < laws.size(); ++i) {
    std::uint32_t s = c.small_side[i], cp = c.coupling[i];
    for (std::uint32_t j : c.inst.eligible[s])
      if (j != cp) y.pair[s][j] = 0;
    for (const auto& [bundle, prob] : laws[i]) {
      auto [sm, bg] = split_bundle(c, i, bundle);
      bool coupled = std::find(sm.begin(), sm.end(), cp) != sm.end();
      for (std::uint32_t j : sm) {
        y.single[s][j] += prob;
        if (coupled && j != cp) y.pair[s][j] += prob;
      }
      for (std::uint32_t j : bg) y.single[c.big_side[i]][j] += prob;
    }
  }
  return y;
}

// y from an explicit distribution over original assignments.
inline SAWitness lift_from_distribution(const CanonicalInstance& c,
                                        const std::vector<std::pair<RAAssignment, mpq_class>>& dist) {
  SAWitness y;
  y.single.resize(c.inst.players);
  y.pair.resize(c.inst.players);
  for (std::uint32_t p = 0; p < c.inst.players; ++p)
    for (std::uint32_t j : c.inst.eligible[p]) y.single[p][j] = 0;
  for (std::uint32_t i = 0; i < c.coupling.size(); ++i)
    for (std::uint32_t j : c.inst.eligible[c.small_side[i]])
      if (j != c.coupling[i]) y.pair[c.small_side[i]][j] = 0;
  for (const auto& [a, prob] : dist) {
    RAAssignment ca = to_canonical(c, a);
    for (std::uint32_t i = 0; i < c.coupling.size(); ++i) {
      std::uint32_t s = c.small_side[i];
      bool coupled = ca[c.coupling[i]] == s;
      for (auto& [j, v] : y.pair[s])
        if (coupled && ca[j] == s) v += prob;
    }
    for (std::size_t j = 0; j < ca.size(); ++j)
      if (ca[j] >= 0) y.single[ca[j]][static_cast<std::uint32_t>(j)] += prob;
  }
  return y;
}

struct DaviesReport {
  std::vector<std::map<std::uint32_t, mpq_class>> x;
  ViolationReport covering{"davies_covering"};
  ViolationReport packing{"davies_packing"};
  ViolationReport exclusion{"davies_small_exclusion"};

  bool passed() const { return covering.passed() && packing.passed() && exclusion.passed(); }

  Json to_json() const {
    Json j;
    j["passed"] = passed();
    j["covering"] = covering.to_json();
    j["packing"] = packing.to_json();
    j["exclusion"] = exclusion.to_json();
    Json xs = Json::array();
    for (std::size_t p = 0; p < x.size(); ++p)
      for (const auto& [r, v] : x[p]) xs.push_back({{"player", p}, {"resource", r}, {"x", v.get_str()}});
    j["x"] = xs;
    return j;
  }
};

// x_ij = y_ij on big resources; for a player whose only big resource is b,
// x_is = y_is - y_{is, ib} on its small resources.
inline DaviesReport map_sa1_to_davies(const CanonicalInstance& c, const SAWitness& y) {
  const RAInstance& in = c.inst;
  if (y.single.size() != in.players) throw RAError("witness has the wrong number of players");
  DaviesReport rep;
  rep.x.resize(in.players);
  for (std::uint32_t p = 0; p < in.players; ++p) {
    std::vector<std::uint32_t> bigs, smalls;
    for (std::uint32_t j : in.eligible[p]) (in.is_big(j) ? bigs : smalls).push_back(j);
    auto get = [&](std::uint32_t j) -> const mpq_class& {
      auto it = y.single[p].find(j);
      if (it == y.single[p].end())
        throw RAError("witness misses y for player " + std::to_string(p) + ", resource " + std::to_string(j));
      if (it->second < 0 || it->second > 1) throw RAError("witness value outside [0, 1]");
      return it->second;
    };
    for (std::uint32_t j : bigs) rep.x[p][j] = get(j);
    if (!smalls.empty() && bigs.size() > 1) throw RAError("player " + std::to_string(p) + " is not canonical");
    for (std::uint32_t s : smalls) {
      if (bigs.empty()) {
        rep.x[p][s] = get(s);
        continue;
      }
      auto it = y.pair.size() > p ? y.pair[p].find(s) : y.pair[p].end();
      if (y.pair.size() <= p || it == y.pair[p].end())
        throw RAError("witness misses the pair value for player " + std::to_string(p));
      const mpq_class& yp = it->second;
      if (yp < 0 || yp > get(s) || yp > get(bigs[0])) throw RAError("pair value exceeds a single value");
      rep.x[p][s] = get(s) - yp;
    }
  }
  std::vector<mpq_class> load(in.num_resources(), 0);
  for (std::uint32_t p = 0; p < in.players; ++p) {
    mpq_class value = 0, bigsum = 0;
    for (const auto& [j, v] : rep.x[p]) {
      value += in.values[j] * v;
      load[j] += v;
      if (in.is_big(j)) bigsum += v;
    }
    std::string id = "player=" + std::to_string(p);
    rep.covering.check("covering:" + id, ConstraintSense::kAtLeast, numerics::Scalar(value), numerics::Scalar(in.target));
    for (const auto& [j, v] : rep.x[p])
      if (!in.is_big(j))
        rep.exclusion.check("exclusion:" + id + ",s=" + std::to_string(j), ConstraintSense::kAtMost,
                            numerics::Scalar(v), numerics::Scalar(mpq_class(1 - bigsum)));
  }
  for (std::uint32_t j = 0; j < in.num_resources(); ++j)
    rep.packing.check("load:resource=" + std::to_string(j), ConstraintSense::kAtMost, numerics::Scalar(load[j]),
                      numerics::Scalar(1));
  return rep;
}

}  // namespace mmda::restricted
