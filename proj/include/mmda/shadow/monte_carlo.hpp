#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "mmda/shadow/exact_engine.hpp"
#include "mmda/util/rng.hpp"

namespace mmda::shadow {

using util::Bernoulli;
using util::counter_draw;
using util::splitmix64;

struct ShadowSample {
  std::vector<EdgeId> shadow;                 // triggers of the last round
  std::vector<std::vector<EdgeId>> subtrees;  // S_f for each trigger, same order
  std::vector<EdgeId> active;                 // A, sorted
  std::vector<std::pair<EdgeId, std::uint32_t>> multiplicity;  // n_e over A
};

// Draws the shadow distribution. rounds = 1 is the three-step process; more
// rounds let the edges of one round trigger subtrees in the next.
class ShadowSampler {
 public:
  ShadowSampler(const ShadowModel& model, std::uint64_t seed, int rounds = 1,
                std::uint64_t max_support_entries = 50'000'000)
      : g_(&model.instance()), seed_(seed), rounds_(rounds) {
    if (rounds < 1) throw instances::InstanceError("rounds must be at least 1");
    const LayeredInstance& g = *g_;
    const EdgeSolution& x = model.base();
    const SubtreeFamily& fam = model.family();
    std::uint64_t total = 0;
    x.for_each_support([&](EdgeId e, ClassId c) { base_.push_back({e, Bernoulli::of(x.table()[c].rational())}); });
    support_.resize(g.num_edges());
    for (EdgeId f = 0; f < g.num_edges(); ++f) {
      fam.for_each_support(f, [&](EdgeId e, ClassId c) {
        support_[f].push_back({e, Bernoulli::of(fam.table()[c].rational())});
      });
      total += support_[f].size();
      if (total > max_support_entries)
        throw instances::SizeCapExceeded("subtree supports exceed the sampler cap of " +
                                         std::to_string(max_support_entries) + " entries");
    }
  }

  std::uint64_t seed() const { return seed_; }
  int rounds() const { return rounds_; }

  // Fills the sorted active set and adds n_e into count (indexed by edge).
  // The caller clears count for the returned edges.
  void draw_active(std::uint64_t index, std::vector<EdgeId>& active, std::vector<std::uint32_t>& count,
                   ShadowSample* full = nullptr) const {
    std::vector<EdgeId> cur;
    for (const auto& b : base_)
      if (b.p.draw(counter_draw(seed_, index, 0, b.e, 0))) cur.push_back(b.e);
    for (int round = 1; round <= rounds_; ++round) {
      const bool last = round == rounds_;
      active.clear();
      if (full && last) {
        full->shadow = cur;
        full->subtrees.assign(cur.size(), {});
      }
      for (std::size_t i = 0; i < cur.size(); ++i) {
        EdgeId f = cur[i];
        for (const auto& b : support_[f]) {
          if (!b.p.always && !b.p.draw(counter_draw(seed_, index, round, f, b.e))) continue;
          if (count[b.e]++ == 0) active.push_back(b.e);
          if (full && last) full->subtrees[i].push_back(b.e);
        }
      }
      std::sort(active.begin(), active.end());
      if (!last) {
        for (EdgeId e : active) count[e] = 0;
        cur = active;
      }
    }
  }

  ShadowSample draw(std::uint64_t index) const {
    ShadowSample s;
    std::vector<std::uint32_t> count(g_->num_edges(), 0);
    draw_active(index, s.active, count, &s);
    for (EdgeId e : s.active) s.multiplicity.emplace_back(e, count[e]);
    return s;
  }

 private:
  struct Entry {
    EdgeId e;
    Bernoulli p;
  };
  const LayeredInstance* g_;
  std::uint64_t seed_;
  int rounds_;
  std::vector<Entry> base_;
  std::vector<std::vector<Entry>> support_;
};

struct EmpiricalMoments {
  std::uint64_t seed = 0, samples = 0;
  int rounds = 1;
  std::optional<ConditionEvent> event;
  std::uint64_t event_hits = 0;
  std::vector<std::uint64_t> hits;      // samples with e in A (and E when given)
  std::vector<std::uint64_t> mult_sum;  // sum of n_e (over samples with E)
  std::vector<std::uint64_t> mult_sq;

  std::uint64_t base() const { return event ? event_hits : samples; }
  double probability(EdgeId e) const { return base() ? double(hits[e]) / double(base()) : 0.0; }
  double probability_se(EdgeId e) const {
    double p = probability(e);
    return base() ? std::sqrt(p * (1 - p) / double(base())) : 0.0;
  }
  double multiplicity(EdgeId e) const { return base() ? double(mult_sum[e]) / double(base()) : 0.0; }
  double multiplicity_se(EdgeId e) const {
    if (base() < 2) return 0.0;
    double n = double(base()), mu = multiplicity(e);
    double var = (double(mult_sq[e]) - n * mu * mu) / (n - 1);
    return std::sqrt(std::max(var, 0.0) / n);
  }

  Json to_json(const LayeredInstance& g) const {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "empirical_moments";
    j["seed"] = seed;
    j["samples"] = samples;
    j["rounds"] = rounds;
    if (event) j["event"] = {{"edge", event->edge}, {"sign", to_string(event->sign)}, {"hits", event_hits}};
    else j["event"] = nullptr;
    Json edges = Json::array();
    for (EdgeId e = 0; e < hits.size(); ++e)
      edges.push_back({{"edge", e},
                       {"tail", g.tail(e)},
                       {"head", g.head(e)},
                       {"hits", hits[e]},
                       {"probability", probability(e)},
                       {"probability_se", probability_se(e)},
                       {"multiplicity", multiplicity(e)},
                       {"multiplicity_se", multiplicity_se(e)}});
    j["edges"] = edges;
    return j;
  }
};

// Empirical marginals (or conditionals on one event) over n seeded samples.
inline EmpiricalMoments sample(const ShadowModel& model, std::uint64_t seed, std::uint64_t n, int rounds = 1,
                               std::optional<ConditionEvent> event = std::nullopt) {
  if (n < 1) throw instances::InstanceError("n_samples must be at least 1");
  const LayeredInstance& g = model.instance();
  if (event) g.check_edge(event->edge);
  ShadowSampler smp(model, seed, rounds);
  EmpiricalMoments out;
  out.seed = seed;
  out.samples = n;
  out.rounds = rounds;
  out.event = event;
  out.hits.assign(g.num_edges(), 0);
  out.mult_sum.assign(g.num_edges(), 0);
  out.mult_sq.assign(g.num_edges(), 0);
  std::vector<EdgeId> active;
  std::vector<std::uint32_t> count(g.num_edges(), 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    smp.draw_active(i, active, count);
    bool take = true;
    if (event) {
      bool in = count[event->edge] > 0;
      take = event->sign == EventSign::kPositive ? in : !in;
      if (take) ++out.event_hits;
    }
    for (EdgeId e : active) {
      if (take) {
        ++out.hits[e];
        out.mult_sum[e] += count[e];
        out.mult_sq[e] += std::uint64_t{count[e]} * count[e];
      }
      count[e] = 0;
    }
  }
  return out;
}

// Ratio of summed per-sample numerators and denominators, with a delta-method
// standard error that keeps the correlation inside one sample.
struct RatioPool {
  std::string label;
  Scalar exact;
  long double num = 0, den = 0, num2 = 0, den2 = 0, numden = 0;
  std::uint64_t members = 0;

  void add(long double a, long double b) {
    num += a;
    den += b;
    num2 += a * a;
    den2 += b * b;
    numden += a * b;
  }
  double estimate() const { return den > 0 ? double(num / den) : 0.0; }
  double se(double p) const {
    if (den <= 0) return 0.0;
    long double r = num / den;
    long double v = (num2 - 2 * r * numden + r * r * den2) / (den * den);
    double delta = std::sqrt(std::max(0.0L, v));
    double floor = std::sqrt(std::max(0.0, p * (1 - p)) / double(den));
    return std::max(delta, floor);
  }
};

struct PoolVerdict {
  std::string label;
  Scalar exact;
  double estimate = 0, se = 0, z = 0;
  std::uint64_t members = 0;
  long double observations = 0;
  bool passed = false;
};

struct PoolSummary {
  std::string name;
  std::uint64_t pools = 0, failed = 0, skipped = 0;
  double max_abs_z = 0;
  std::vector<PoolVerdict> failures;
  std::vector<PoolVerdict> worst;  // largest |z|, up to five
  bool passed() const { return failed == 0; }

  Json to_json() const {
    auto row = [](const PoolVerdict& v) {
      return Json{{"label", v.label},     {"exact", scalar_json(v.exact)}, {"estimate", v.estimate},
                  {"se", v.se},           {"z", v.z},                      {"members", v.members},
                  {"observations", static_cast<double>(v.observations)}, {"passed", v.passed}};
    };
    Json j;
    j["name"] = name;
    j["pools"] = pools;
    j["failed"] = failed;
    j["skipped"] = skipped;
    j["max_abs_z"] = max_abs_z;
    j["passed"] = passed();
    Json f = Json::array(), w = Json::array();
    for (const auto& v : failures) f.push_back(row(v));
    for (const auto& v : worst) w.push_back(row(v));
    j["failures"] = f;
    j["worst"] = w;
    return j;
  }
};

// |estimate - exact| <= tolerance * se, with se floored by the binomial
// error; exact 0 or 1 must be matched exactly.
inline PoolSummary judge_pools(std::string name, const std::vector<RatioPool>& pools, double tolerance) {
  PoolSummary s;
  s.name = std::move(name);
  std::vector<PoolVerdict> all;
  for (const auto& p : pools) {
    if (p.den <= 0) {
      ++s.skipped;
      continue;
    }
    ++s.pools;
    PoolVerdict v;
    v.label = p.label;
    v.exact = p.exact;
    v.members = p.members;
    v.observations = p.den;
    v.estimate = p.estimate();
    double ex = p.exact.approx();
    v.se = p.se(ex);
    const mpq_class q = p.exact.rational();
    if (q == 0 || q == 1) {
      v.passed = q == 0 ? p.num == 0 : p.num == p.den;
      v.z = v.passed ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      v.z = v.se > 0 ? (v.estimate - ex) / v.se : 0.0;
      v.passed = std::abs(v.z) <= tolerance;
    }
    s.max_abs_z = std::max(s.max_abs_z, std::abs(v.z));
    if (!v.passed) {
      ++s.failed;
      if (s.failures.size() < 20) s.failures.push_back(v);
    }
    all.push_back(v);
  }
  std::sort(all.begin(), all.end(), [](const PoolVerdict& a, const PoolVerdict& b) {
    return std::abs(a.z) > std::abs(b.z) || (std::abs(a.z) == std::abs(b.z) && a.label < b.label);
  });
  for (std::size_t i = 0; i < all.size() && i < 5; ++i) s.worst.push_back(all[i]);
  return s;
}

struct McComparison {
  std::uint64_t seed = 0, samples = 0;
  double tolerance = 4.0;
  PoolSummary marginals, conditionals, multiplicity;
  // Pooled mean n_e over L3 classes <= 3 x_e + tolerance se.
  PoolSummary multiplicity_bound;
  double max_edge_z = 0;  // largest per-edge marginal z-score, informational
  std::uint64_t events = 0, events_skipped = 0;
  std::vector<std::string> notes;

  bool passed() const {
    return marginals.passed() && conditionals.passed() && multiplicity.passed() && multiplicity_bound.passed();
  }

  Json to_json() const {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "mc_comparison";
    j["seed"] = seed;
    j["samples"] = samples;
    j["tolerance_se"] = tolerance;
    j["passed"] = passed();
    j["events"] = events;
    j["events_skipped"] = events_skipped;
    j["max_edge_marginal_z"] = max_edge_z;
    j["marginals"] = marginals.to_json();
    j["conditionals"] = conditionals.to_json();
    j["multiplicity"] = multiplicity.to_json();
    j["multiplicity_bound"] = multiplicity_bound.to_json();
    j["notes"] = notes;
    return j;
  }
};

struct McOptions {
  double tolerance = 4.0;
  bool conditionals = true;
};

// Compares n seeded samples with the exact engine. Estimates are pooled over
// all (event, edge) pairs sharing the same exact value; each pool is one
// ratio estimator whose per-sample terms keep their correlation.
inline McComparison compare_with_exact(ShadowEngine& eng, std::uint64_t seed, std::uint64_t n,
                                       const McOptions& opt = {}) {
  const LayeredInstance& g = eng.instance();
  const std::size_t ne = g.num_edges();
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  McComparison out;
  out.seed = seed;
  out.samples = n;
  out.tolerance = opt.tolerance;

  auto pool_of = [](std::map<mpq_class, std::uint32_t>& index, std::vector<RatioPool>& pools, const mpq_class& v,
                    const std::string& prefix) {
    auto it = index.find(v);
    if (it != index.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(pools.size());
    RatioPool p;
    p.label = prefix + v.get_str();
    p.exact = Scalar(v);
    pools.push_back(p);
    index.emplace(v, id);
    return id;
  };

  // Marginal and multiplicity pools by exact value.
  std::map<mpq_class, std::uint32_t> mindex, nindex, bindex;
  std::vector<RatioPool> mpools, npools, bpools;
  std::vector<std::uint32_t> mclass(ne), nclass(ne), bclass(ne, kNone);
  const bool d3 = is_depth_three(g);
  for (EdgeId e = 0; e < ne; ++e) {
    const auto& m = eng.marginal_info(e);
    mclass[e] = pool_of(mindex, mpools, m.s, "s=");
    ++mpools[mclass[e]].members;
    nclass[e] = pool_of(nindex, npools, m.mean, "mean_n=");
    ++npools[nclass[e]].members;
    if (d3 && g.edge_layer(e) == 3) {
      bclass[e] = pool_of(bindex, bpools, mpq_class(3 * eng.x_of(e)), "l3:3x=");
      ++bpools[bclass[e]].members;
    }
  }

  // Conditional pools: class of P[e in A | e1 in A] and P[e in A | e1 not in A].
  std::map<mpq_class, std::uint32_t> pindex, qindex;
  std::vector<RatioPool> ppools, qpools;
  std::vector<std::uint32_t> cpos, cneg;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> row_pos(ne), row_neg(ne), col_neg(ne);
  std::vector<long double> base_neg;
  std::vector<char> pos_ok(ne, 0), neg_ok(ne, 0);
  if (opt.conditionals) {
    cpos.assign(ne * ne, kNone);
    cneg.assign(ne * ne, kNone);
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<std::uint32_t, std::uint32_t>> memo;
    std::vector<std::map<std::uint32_t, std::uint32_t>> colmap(ne);
    for (EdgeId e1 = 0; e1 < ne; ++e1) {
      const auto& m1 = eng.marginal_info(e1);
      pos_ok[e1] = m1.s > 0;
      neg_ok[e1] = m1.absent > 0;
      out.events += pos_ok[e1] + neg_ok[e1];
      out.events_skipped += 2 - pos_ok[e1] - neg_ok[e1];
      std::map<std::uint32_t, std::uint32_t> rp, rn;
      const std::uint32_t sig1 = eng.signature(e1);
      for (EdgeId e = 0; e < ne; ++e) {
        std::uint32_t jid = eng.joint_id(e, e1);
        auto key = std::make_pair(jid, sig1);
        auto it = memo.find(key);
        if (it == memo.end()) {
          const auto& jt = eng.joint_info(jid);
          std::uint32_t a = kNone, b = kNone;
          if (pos_ok[e1]) a = pool_of(pindex, ppools, mpq_class(jt.both / m1.s), "pos:p=");
          if (neg_ok[e1])
            b = pool_of(qindex, qpools, mpq_class((eng.marginal_q(e) - jt.both) / m1.absent), "neg:p=");
          it = memo.emplace(key, std::make_pair(a, b)).first;
        }
        auto [a, b] = it->second;
        cpos[e1 * ne + e] = a;
        cneg[e1 * ne + e] = b;
        if (a != kNone) {
          ++rp[a];
          ++ppools[a].members;
        }
        if (b != kNone) {
          ++rn[b];
          ++colmap[e][b];
          ++qpools[b].members;
        }
      }
      row_pos[e1].assign(rp.begin(), rp.end());
      row_neg[e1].assign(rn.begin(), rn.end());
    }
    for (EdgeId e = 0; e < ne; ++e) col_neg[e].assign(colmap[e].begin(), colmap[e].end());
    base_neg.assign(qpools.size(), 0);
    for (EdgeId e1 = 0; e1 < ne; ++e1)
      for (auto [c, k] : row_neg[e1]) base_neg[c] += k;
    if (out.events_skipped)
      out.notes.push_back("skipped " + std::to_string(out.events_skipped) + " zero-probability events");
  }

  ShadowSampler smp(eng.model(), seed, 1);
  std::vector<EdgeId> active;
  std::vector<std::uint32_t> count(ne, 0);
  std::vector<long double> mnum(mpools.size()), nnum(npools.size()), bnum(bpools.size());
  std::vector<long double> pnum(ppools.size()), pden(ppools.size()), qnum(qpools.size()), qden(qpools.size());
  std::vector<std::uint32_t> touched;
  std::vector<char> is_touched(ppools.size(), 0);
  // Per-edge hit counts for the informational z-scores.
  std::vector<std::uint64_t> hits(ne, 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    smp.draw_active(i, active, count);
    std::fill(mnum.begin(), mnum.end(), 0);
    std::fill(nnum.begin(), nnum.end(), 0);
    std::fill(bnum.begin(), bnum.end(), 0);
    for (EdgeId e : active) {
      ++hits[e];
      mnum[mclass[e]] += 1;
      nnum[nclass[e]] += count[e];
      if (bclass[e] != kNone) bnum[bclass[e]] += count[e];
    }
    for (std::size_t c = 0; c < mpools.size(); ++c) mpools[c].add(mnum[c], mpools[c].members);
    for (std::size_t c = 0; c < npools.size(); ++c) npools[c].add(nnum[c], npools[c].members);
    for (std::size_t c = 0; c < bpools.size(); ++c) bpools[c].add(bnum[c], bpools[c].members);

    if (opt.conditionals) {
      for (std::uint32_t c : touched) {
        pnum[c] = pden[c] = 0;
        is_touched[c] = 0;
      }
      touched.clear();
      std::fill(qnum.begin(), qnum.end(), 0);
      for (std::size_t c = 0; c < qpools.size(); ++c) qden[c] = base_neg[c];
      for (EdgeId e : active)
        for (auto [c, k] : col_neg[e]) qnum[c] += k;
      for (EdgeId e1 : active) {
        if (pos_ok[e1])
          for (auto [c, k] : row_pos[e1]) {
            if (!is_touched[c]) {
              is_touched[c] = 1;
              touched.push_back(c);
            }
            pden[c] += k;
          }
        if (neg_ok[e1])
          for (auto [c, k] : row_neg[e1]) qden[c] -= k;
        const std::uint32_t* rp = &cpos[e1 * ne];
        const std::uint32_t* rn = &cneg[e1 * ne];
        for (EdgeId e : active) {
          if (rp[e] != kNone) pnum[rp[e]] += 1;
          if (rn[e] != kNone) qnum[rn[e]] -= 1;
        }
      }
      for (std::uint32_t c : touched) ppools[c].add(pnum[c], pden[c]);
      // Pools never touched this sample contribute (0, 0), which changes no sum.
      for (std::size_t c = 0; c < qpools.size(); ++c) qpools[c].add(qnum[c], qden[c]);
    }
    for (EdgeId e : active) count[e] = 0;
  }

  out.marginals = judge_pools("marginals", mpools, opt.tolerance);
  out.multiplicity = judge_pools("multiplicity", npools, opt.tolerance);
  // One-sided: the pooled mean may not exceed 3 x_e by more than the tolerance.
  {
    PoolSummary s;
    s.name = "l3_multiplicity_bound";
    for (const auto& p : bpools) {
      if (p.den <= 0) {
        ++s.skipped;
        continue;
      }
      ++s.pools;
      PoolVerdict v;
      v.label = p.label;
      v.exact = p.exact;
      v.members = p.members;
      v.observations = p.den;
      v.estimate = p.estimate();
      v.se = p.se(0.0);
      double bound = p.exact.approx();
      v.z = v.se > 0 ? (v.estimate - bound) / v.se : (v.estimate > bound ? 1e300 : 0.0);
      v.passed = v.z <= opt.tolerance;
      s.max_abs_z = std::max(s.max_abs_z, v.z);
      if (!v.passed) {
        ++s.failed;
        s.failures.push_back(v);
      }
      s.worst.push_back(v);
    }
    out.multiplicity_bound = s;
  }
  if (opt.conditionals) {
    std::vector<RatioPool> all = ppools;
    all.insert(all.end(), qpools.begin(), qpools.end());
    out.conditionals = judge_pools("conditionals", all, opt.tolerance);
    if (out.conditionals.skipped)
      out.notes.push_back(std::to_string(out.conditionals.skipped) + " conditional pools had no observations");
  } else {
    out.conditionals.name = "conditionals";
    out.notes.push_back("conditional comparison disabled");
  }
  for (EdgeId e = 0; e < ne; ++e) {
    double s = eng.marginal_q(e).get_d();
    double se = std::sqrt(std::max(s * (1 - s), 0.0) / double(n));
    if (se > 0) out.max_edge_z = std::max(out.max_edge_z, std::abs(double(hits[e]) / double(n) - s) / se);
  }
  return out;
}

}  // namespace mmda::shadow
