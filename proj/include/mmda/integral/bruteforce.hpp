#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "mmda/integral/solution.hpp"

namespace mmda::integral {

struct BruteforceOptions {
  std::uint64_t node_budget = 20'000'000;
  numerics::PrecisionPolicy policy = numerics::PrecisionPolicy::from_env();
};

enum class CandidateStatus { kFeasible, kInfeasible, kExhausted, kSkipped };

inline const char* to_string(CandidateStatus s) {
  switch (s) {
    case CandidateStatus::kFeasible: return "feasible";
    case CandidateStatus::kInfeasible: return "infeasible";
    case CandidateStatus::kExhausted: return "budget_exhausted";
    case CandidateStatus::kSkipped: return "skipped";
  }
  return "?";
}

struct CandidateRun {
  Scalar alpha;
  std::vector<std::uint64_t> degrees;  // required out-degree per layer
  CandidateStatus status;
  std::uint64_t nodes;
};

struct BruteforceResult {
  IntegralSolution solution;
  SolutionQuality quality;
  // True when every candidate above the returned quality was refuted.
  bool complete = true;
  std::uint64_t nodes = 0;
  Scalar upper_bound;
  std::vector<CandidateRun> trace;

  Json to_json() const {
    Json j = solution_json(solution, quality);
    j["complete"] = complete;
    j["nodes"] = nodes;
    j["degree_upper_bound"] = scalar_json(upper_bound);
    Json t = Json::array();
    for (const auto& c : trace)
      t.push_back({{"alpha", scalar_json(c.alpha)}, {"degrees", c.degrees}, {"status", to_string(c.status)},
                   {"nodes", c.nodes}});
    j["candidates"] = t;
    return j;
  }
};

namespace detail {

class Bitset {
 public:
  explicit Bitset(std::size_t n = 0) : w_((n + 63) / 64, 0) {}
  void set(std::size_t i) { w_[i >> 6] |= 1ULL << (i & 63); }
  bool test(std::size_t i) const { return w_[i >> 6] >> (i & 63) & 1; }
  Bitset& operator|=(const Bitset& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
    return *this;
  }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : w_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }
  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < w_.size(); ++i)
      for (std::uint64_t w = w_[i]; w; w &= w - 1) f(i * 64 + static_cast<std::size_t>(__builtin_ctzll(w)));
  }

 private:
  std::vector<std::uint64_t> w_;
};

// Left items with integer demands, right items of capacity one.
class BMatching {
 public:
  BMatching(std::size_t right) : owner_(right, -1) {}
  int add_left(std::uint64_t demand, std::vector<std::uint32_t> adj) {
    left_.push_back({demand, std::move(adj)});
    return static_cast<int>(left_.size()) - 1;
  }
  // Saturates every demand or reports failure.
  bool solve() {
    std::vector<char> seen(owner_.size());
    for (std::size_t l = 0; l < left_.size(); ++l) {
      if (left_[l].adj.size() < left_[l].demand) return false;
      for (std::uint64_t c = 0; c < left_[l].demand; ++c) {
        std::fill(seen.begin(), seen.end(), 0);
        if (!augment(static_cast<int>(l), seen)) return false;
      }
    }
    return true;
  }
  const std::vector<int>& owner() const { return owner_; }

 private:
  struct Left {
    std::uint64_t demand;
    std::vector<std::uint32_t> adj;
  };
  bool augment(int l, std::vector<char>& seen) {
    for (std::uint32_t r : left_[l].adj) {
      if (seen[r]) continue;
      seen[r] = 1;
      if (owner_[r] < 0 || augment(owner_[r], seen)) {
        owner_[r] = l;
        return true;
      }
    }
    return false;
  }
  std::vector<Left> left_;
  std::vector<int> owner_;
};

struct BudgetExhausted {};

// Decides whether an arborescence exists in which every covered vertex of
// layer i has exactly need[i] children, all leaves being sinks.
class DegreeSearch {
 public:
  DegreeSearch(const LayeredInstance& g, std::vector<std::uint64_t> need, std::uint64_t budget)
      : g_(g), need_(std::move(need)), budget_(budget), depth_(g.depth()) {
    const VertexId s0 = g.layer_begin(depth_);
    nsinks_ = g.layer_size(depth_);
    reach_.assign(g.num_vertices(), Bitset(nsinks_));
    for (VertexId v = g.num_vertices(); v-- > 0;) {
      if (g.is_sink(v)) reach_[v].set(v - s0);
      else
        for (EdgeId e : g.out_edges(v)) reach_[v] |= reach_[g.head(e)];
    }
    reach_count_.resize(g.num_vertices());
    for (VertexId v = 0; v < g.num_vertices(); ++v) reach_count_[v] = reach_[v].count();
    // Sinks under a covered layer-i vertex.
    sinks_below_.assign(depth_ + 1, 1);
    for (int i = depth_ - 1; i >= 0; --i) {
      unsigned __int128 p = static_cast<unsigned __int128>(sinks_below_[i + 1]) * need_[i];
      sinks_below_[i] = p > nsinks_ ? nsinks_ + 1 : static_cast<std::uint64_t>(p);
    }
    used_.assign(g.num_vertices(), 0);
  }

  // Throws BudgetExhausted.
  bool run() {
    chosen_.clear();
    if (sinks_below_[0] > nsinks_) return false;
    return layer(0, {g_.source()});
  }
  const std::vector<EdgeId>& chosen() const { return chosen_; }
  std::uint64_t nodes() const { return nodes_; }

 private:
  void tick() {
    if (++nodes_ > budget_) throw BudgetExhausted{};
  }

  bool layer(int i, const std::vector<VertexId>& open) {
    if (i == depth_ - 1) return last(open);
    std::vector<VertexId> next;
    return assign(i, open, 0, next);
  }

  std::vector<VertexId> free_children(VertexId u) const {
    std::vector<VertexId> c;
    for (EdgeId e : g_.out_edges(u))
      if (!used_[g_.head(e)] && reach_count_[g_.head(e)] >= sinks_below_[g_.layer_of(u) + 1]) c.push_back(g_.head(e));
    std::stable_sort(c.begin(), c.end(), [&](VertexId a, VertexId b) { return reach_count_[a] > reach_count_[b]; });
    return c;
  }

  bool assign(int i, const std::vector<VertexId>& open, std::size_t idx, std::vector<VertexId>& next) {
    if (idx == open.size()) return layer(i + 1, next);
    VertexId u = open[idx];
    std::vector<VertexId> c = free_children(u);
    const std::size_t d = need_[i];
    if (c.size() < d) return false;
    std::vector<std::size_t> pick(d);
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
      tick();
      for (std::size_t p : pick) {
        used_[c[p]] = 1;
        next.push_back(c[p]);
        chosen_.push_back(*g_.find_edge(u, c[p]));
      }
      if (prune_ok(i, open, idx + 1, next) && assign(i, open, idx + 1, next)) return true;
      for (std::size_t p : pick) {
        used_[c[p]] = 0;
        next.pop_back();
        chosen_.pop_back();
      }
      // Next combination in lexicographic order.
      std::size_t k = d;
      while (k > 0 && pick[k - 1] == c.size() - d + k - 1) --k;
      if (k == 0) return false;
      ++pick[k - 1];
      for (std::size_t j = k; j < d; ++j) pick[j] = pick[j - 1] + 1;
    }
  }

  // Necessary conditions: the open vertices still need free children, and
  // all pending subtrees need disjoint sinks.
  bool prune_ok(int i, const std::vector<VertexId>& open, std::size_t from, const std::vector<VertexId>& next) {
    if (from < open.size()) {
      BMatching kids(g_.num_vertices());
      for (std::size_t a = from; a < open.size(); ++a) {
        std::vector<std::uint32_t> adj;
        for (VertexId w : free_children(open[a])) adj.push_back(w);
        kids.add_left(need_[i], std::move(adj));
      }
      if (!kids.solve()) return false;
    }
    std::uint64_t total = (open.size() - from) * sinks_below_[i] + next.size() * sinks_below_[i + 1];
    if (total > nsinks_) return false;
    BMatching sinks(nsinks_);
    auto add = [&](VertexId v, std::uint64_t demand) {
      std::vector<std::uint32_t> adj;
      reach_[v].for_each([&](std::size_t t) { adj.push_back(static_cast<std::uint32_t>(t)); });
      sinks.add_left(demand, std::move(adj));
    };
    for (std::size_t a = from; a < open.size(); ++a) add(open[a], sinks_below_[i]);
    for (VertexId v : next) add(v, sinks_below_[i + 1]);
    return sinks.solve();
  }

  bool last(const std::vector<VertexId>& open) {
    tick();
    const VertexId s0 = g_.layer_begin(depth_);
    BMatching m(nsinks_);
    for (VertexId u : open) {
      std::vector<std::uint32_t> adj;
      for (EdgeId e : g_.out_edges(u)) adj.push_back(g_.head(e) - s0);
      m.add_left(need_[depth_ - 1], std::move(adj));
    }
    if (!m.solve()) return false;
    for (std::size_t t = 0; t < nsinks_; ++t)
      if (m.owner()[t] >= 0) chosen_.push_back(*g_.find_edge(open[m.owner()[t]], s0 + static_cast<VertexId>(t)));
    return true;
  }

  const LayeredInstance& g_;
  std::vector<std::uint64_t> need_;
  std::uint64_t budget_, nodes_ = 0;
  int depth_;
  std::size_t nsinks_;
  std::vector<Bitset> reach_;
  std::vector<std::size_t> reach_count_;
  std::vector<std::uint64_t> sinks_below_;
  std::vector<char> used_;
  std::vector<EdgeId> chosen_;
};

}  // namespace detail

// Exact optimum of the max-min degree ratio: candidates d / k_i are tried in
// decreasing order and the first feasible one wins.
inline BruteforceResult bruteforce_best(const LayeredInstance& g, const BruteforceOptions& opt = {}) {
  const int depth = g.depth();
  if (depth < 1) throw SolutionError("instance has no edges to choose");
  const auto& pol = opt.policy;
  std::vector<std::size_t> maxout(depth, 0);
  for (VertexId v = 0; v < g.layer_begin(depth); ++v)
    maxout[g.layer_of(v)] = std::max(maxout[g.layer_of(v)], g.out_degree(v));

  BruteforceResult res;
  std::optional<Scalar> ub;
  std::vector<Scalar> cands;
  for (int i = 0; i < depth; ++i) {
    const Scalar& k = g.layer_requirement(i);
    if (k.is_zero()) continue;
    Scalar top = Scalar(static_cast<long>(maxout[i])) / k;
    if (!ub || numerics::certified_less(top, *ub, pol)) ub = top;
    for (std::size_t d = 1; d <= maxout[i]; ++d) cands.push_back(Scalar(static_cast<long>(d)) / k);
  }
  res.upper_bound = ub.value_or(Scalar(0));
  std::sort(cands.begin(), cands.end(),
            [&](const Scalar& a, const Scalar& b) { return numerics::certified_less(b, a, pol); });
  cands.erase(std::unique(cands.begin(), cands.end(),
                          [](const Scalar& a, const Scalar& b) { return numerics::same_value(a, b); }),
              cands.end());

  std::optional<IntegralSolution> best;
  for (const Scalar& alpha : cands) {
    if (ub && numerics::certified_less(*ub, alpha, pol)) continue;
    std::vector<std::uint64_t> need(depth, 1);
    for (int i = 0; i < depth; ++i) {
      mpz_class c = numerics::ceil_certified(alpha * g.layer_requirement(i), pol);
      need[i] = std::max<std::uint64_t>(1, c.get_ui());
    }
    detail::DegreeSearch s(g, need, opt.node_budget > res.nodes ? opt.node_budget - res.nodes : 0);
    CandidateRun run{alpha, need, CandidateStatus::kInfeasible, 0};
    try {
      if (s.run()) run.status = CandidateStatus::kFeasible;
    } catch (const detail::BudgetExhausted&) {
      run.status = CandidateStatus::kExhausted;
      res.complete = false;
    }
    run.nodes = s.nodes();
    res.nodes += s.nodes();
    res.trace.push_back(run);
    if (run.status == CandidateStatus::kFeasible) {
      best = IntegralSolution(g, s.chosen());
      break;
    }
    if (res.nodes >= opt.node_budget) break;
  }
  if (!best) {
    // Nothing found inside the budget; the single path is always available.
    best = g.out_degree(g.source()) ? single_path(g) : IntegralSolution(g, {});
  }
  res.solution = *best;
  res.quality = quality(res.solution, pol);
  return res;
}

}  // namespace mmda::integral
