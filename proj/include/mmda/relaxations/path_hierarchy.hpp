#pragma once

#include <functional>
#include <map>
#include <unordered_map>
#include <string>
#include <tuple>
#include <vector>

#include "mmda/instances/graph_queries.hpp"
#include "mmda/relaxations/assignment_check.hpp"
#include "mmda/relaxations/path_counting.hpp"

namespace mmda::relaxations {

using instances::kDummyEdge;
using instances::Path;

// y(p) = x_{e_1} * prod_{j=i}^{i+|p|-2} gamma_j for p whose first edge enters
// L_i. The dummy edge enters L_0 with x = 1. Lengths count the dummy edge.
class PathSolution {
 public:
  PathSolution(const LayeredInstance& g, int rounds) : g_(&g), t_(rounds) {
    if (rounds < 0 || rounds > g.depth()) throw numerics::DomainError("rounds must lie in [0, ell]");
    x_ = assignment_layer_values(g);
    x_[0] = Scalar(1);
    for (int i = 0; i < g.num_layers(); ++i) gamma_.push_back(g.layer_profile(i).gamma);
  }

  const LayeredInstance& instance() const { return *g_; }
  int rounds() const { return t_; }
  int max_length() const { return t_ + 1; }

  // y for a path whose first edge enters L_i and which has len edges.
  Scalar value(int i, int len) const {
    auto key = std::make_pair(i, len);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    if (len < 1 || i + len - 1 > g_->depth()) throw numerics::DomainError("no such path class");
    Scalar y = x_.at(i);
    for (int j = i; j <= i + len - 2; ++j) y = (y * gamma_[j]).simplified();
    cache_.emplace(key, y);
    return y;
  }

  Scalar value(const Path& p) const {
    if (!instances::is_valid_path(*g_, p)) throw instances::InstanceError("not a path");
    int i = p.front() == kDummyEdge ? 0 : g_->edge_layer(p.front());
    return value(i, static_cast<int>(p.size()));
  }

 private:
  const LayeredInstance* g_;
  int t_;
  std::vector<Scalar> x_;
  std::vector<Scalar> gamma_;
  mutable std::map<std::pair<int, int>, Scalar> cache_;
};

inline PathSolution path_solution(const LayeredInstance& g, int rounds) { return PathSolution(g, rounds); }

struct PathHierarchyReport {
  ViolationReport lifted_covering{"(1) lifted covering"};
  ViolationReport lifted_packing{"(2) lifted packing"};
  ViolationReport unlifted{"(3)-(4) unlifted assignment"};
  ViolationReport consistency{"(5) consistency"};
  ViolationReport root{"(6) root"};
  ViolationReport bounds{"(7) bounds"};
  std::uint64_t paths_enumerated = 0;
  std::string route;

  bool passed() const {
    return lifted_covering.passed() && lifted_packing.passed() && unlifted.passed() && consistency.passed() &&
           root.passed() && bounds.passed();
  }
  std::vector<const ViolationReport*> parts() const {
    return {&lifted_covering, &lifted_packing, &unlifted, &consistency, &root, &bounds};
  }
};

namespace detail {

inline EdgeSolution single_edge_values(const PathSolution& ps) {
  const LayeredInstance& g = ps.instance();
  auto table = std::make_shared<ValueTable>();
  EdgeSolution x(g, table, true);
  for (int i = 1; i <= g.depth(); ++i) {
    ClassId c = table->intern(ps.value(i, 1));
    for (EdgeId e = g.edge_layer_begin(i); e < g.edge_layer_end(i); ++e) x.set_class(e, c);
  }
  return x;
}

inline void check_common(const PathSolution& ps, PathHierarchyReport& rep, const PrecisionPolicy& pol) {
  const LayeredInstance& g = ps.instance();
  rep.root.check("y(e0)=1", ConstraintSense::kEqual, ps.value(0, 1), Scalar(1), pol);
  for (int i = 0; i <= g.depth(); ++i)
    for (int len = 1; len <= ps.max_length() && i + len - 1 <= g.depth(); ++len) {
      std::string id = "class:i=" + std::to_string(i) + ",len=" + std::to_string(len);
      rep.bounds.check(id + ",lo", ConstraintSense::kAtLeast, ps.value(i, len), Scalar(0), pol);
      rep.bounds.check(id + ",hi", ConstraintSense::kAtMost, ps.value(i, len), Scalar(1), pol);
    }
  AssignmentCheckOptions opt;
  opt.policy = pol;
  rep.unlifted.merge(verify_assignment(g, single_edge_values(ps), opt));
}

}  // namespace detail

// Class route: y depends only on (first layer, length) and degrees are uniform
// per layer, so each constraint family reduces to one check per class with
// the largest path count taken from the closed form.
inline PathHierarchyReport verify_path_hierarchy(const PathSolution& ps,
                                                 const PrecisionPolicy& pol = PrecisionPolicy::from_env()) {
  const LayeredInstance& g = ps.instance();
  PathHierarchyReport rep;
  rep.route = "class";
  const int ell = g.depth(), L = ps.max_length();
  detail::check_common(ps, rep, pol);
  for (int i = 0; i <= ell; ++i)
    for (int len = 1; len <= L && i + len - 1 <= ell; ++len) {
      const int a = i + len - 1;  // layer of the path's last vertex
      std::string id = "i=" + std::to_string(i) + ",len=" + std::to_string(len);
      Scalar y = ps.value(i, len);
      if (len < L) {
        LinearSum lhs;
        if (a < ell) {
          const auto& dp = g.layer_profile(a).delta_plus;
          if (!dp) throw instances::InstanceError("out-degrees are not uniform");
          lhs.add(ps.value(i, len + 1), *dp);
        }
        rep.lifted_covering.check(id, ConstraintSense::kEqual, lhs, LinearSum(g.layer_requirement(a) * y), pol);
      }
      for (int d = 0; len + d <= L && a + d <= ell; ++d) {
        mpz_class n = d == 0 ? mpz_class(1) : max_paths_between_layers(g, a, a + d);
        rep.lifted_packing.check(id + ",d=" + std::to_string(d), ConstraintSense::kAtMost,
                                 Scalar(n) * ps.value(i, len + d), y, pol);
      }
      // Every contiguous subpath of a class-(i, len) path; a subpath keeps
      // the dummy edge only when it starts at the front.
      for (int off = 0; off < len; ++off)
        for (int sub = 1; off + sub <= len; ++sub) {
          if (off == 0 && sub == len) continue;
          int si = i + off;
          rep.consistency.check(id + ",sub=" + std::to_string(off) + ":" + std::to_string(sub),
                                ConstraintSense::kAtMost, y, ps.value(si, sub), pol);
        }
    }
  return rep;
}

// Explicit route: walks every path of length at most t+1 and checks every
// constraint on the actual graph. Throws SizeCapExceeded above max_paths.
inline PathHierarchyReport verify_path_hierarchy_explicit(const PathSolution& ps, std::uint64_t max_paths = 10'000'000,
                                                          const PrecisionPolicy& pol = PrecisionPolicy::from_env()) {
  const LayeredInstance& g = ps.instance();
  PathHierarchyReport rep;
  rep.route = "explicit";
  const int L = ps.max_length();
  detail::check_common(ps, rep, pol);

  // Records are memoized on (family, class data); the ids of violations name
  // the concrete path.
  std::map<std::vector<long>, ConstraintRecord> memo;
  auto path_id = [](const Path& p) {
    std::string s;
    for (EdgeId e : p) s += (s.empty() ? "" : "-") + (e == kDummyEdge ? std::string("e0") : std::to_string(e));
    return s;
  };
  auto memo_check = [&](ViolationReport& r, std::vector<long> key, const Path& q, const auto& where,
                        ConstraintSense sense, const auto& make_lhs, const auto& make_rhs) {
    auto it = memo.find(key);
    if (it == memo.end()) {
      ViolationReport tmp;
      std::string id;
      for (long k : key) id += (id.empty() ? "" : ",") + std::to_string(k);
      it = memo.emplace(key, tmp.check("class:" + id, sense, make_lhs(), make_rhs(), pol)).first;
    }
    ConstraintRecord c = it->second;
    if (!c.satisfied) c.id = path_id(q) + where();
    r.add(std::move(c));
  };

  std::unordered_map<VertexId, std::uint64_t> cur, nxt;
  auto visit = [&](const Path& q) {
    if (++rep.paths_enumerated > max_paths)
      throw instances::SizeCapExceeded("more than " + std::to_string(max_paths) + " paths");
    const long i = q.front() == kDummyEdge ? 0 : g.edge_layer(q.front());
    const long len = static_cast<long>(q.size());
    const Scalar y = ps.value(q);
    const VertexId end = instances::path_end(g, q);
    const int a = g.layer_of(end);
    if (len < L) {
      long deg = static_cast<long>(g.out_degree(end));
      memo_check(rep.lifted_covering, {1, i, len, deg}, q, [] { return std::string(); }, ConstraintSense::kEqual,
                 [&] {
                   LinearSum lhs;
                   for (EdgeId e : g.out_edges(end)) {
                     Path c = q;
                     c.push_back(e);
                     lhs.add(ps.value(c));
                   }
                   return lhs;
                 },
                 [&] { return LinearSum(g.requirement(end) * y); });
    }
    // Paths from end to each vertex within the remaining length.
    cur.clear();
    cur[end] = 1;
    for (long d = 0; len + d <= L; ++d) {
      for (const auto& [v, n] : cur) {
        Scalar yq = ps.value(static_cast<int>(i), static_cast<int>(len + d));
        memo_check(rep.lifted_packing, {2, i, len, d, static_cast<long>(n)}, q, [v = v] { return "@v=" + std::to_string(v); },
                   ConstraintSense::kAtMost,
                   [&] {
                     LinearSum lhs;
                     lhs.add(yq, mpz_class(static_cast<unsigned long>(n)));
                     return lhs;
                   },
                   [&] { return LinearSum(y); });
      }
      if (len + d == L || a + d >= g.depth()) break;
      nxt.clear();
      for (const auto& [v, n] : cur)
        for (EdgeId e : g.out_edges(v)) nxt[g.head(e)] += n;
      std::swap(cur, nxt);
    }
    for (long off = 0; off < len; ++off)
      for (long sub = 1; off + sub <= len; ++sub) {
        if (off == 0 && sub == len) continue;
        Path s(q.begin() + off, q.begin() + off + sub);
        long si = off == 0 ? i : g.edge_layer(s.front());
        memo_check(rep.consistency, {5, i, len, si, sub}, q, [&] { return "<=" + path_id(s); }, ConstraintSense::kAtMost,
                   [&] { return LinearSum(y); }, [&] { return LinearSum(ps.value(s)); });
      }
  };
  std::function<void(Path&)> extend = [&](Path& q) {
    visit(q);
    if (static_cast<int>(q.size()) >= L) return;
    for (EdgeId e : g.out_edges(instances::path_end(g, q))) {
      q.push_back(e);
      extend(q);
      q.pop_back();
    }
  };
  Path p{kDummyEdge};
  extend(p);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    p = {e};
    extend(p);
  }
  return rep;
}

}  // namespace mmda::relaxations
