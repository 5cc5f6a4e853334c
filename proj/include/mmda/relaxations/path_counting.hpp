#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mmda/instances/layered_instance.hpp"
#include "mmda/numerics/combinatorics.hpp"
#include "mmda/relaxations/edge_solution.hpp"
#include "mmda/relaxations/violation_report.hpp"

namespace mmda::relaxations {

// Number of directed paths from v to every vertex of layers layer(v)..last,
// indexed by vertex id minus layer_begin(layer(v)). Exact big integers.
inline std::vector<mpz_class> path_counts_from(const LayeredInstance& g, VertexId v, int last_layer) {
  int i = g.layer_of(v);
  last_layer = std::min(last_layer, g.depth());
  VertexId base = g.layer_begin(i);
  std::vector<mpz_class> cnt(g.layer_end(std::max(i, last_layer)) - base);
  cnt[v - base] = 1;
  for (int l = i; l < last_layer; ++l)
    for (VertexId x = g.layer_begin(l); x < g.layer_end(l); ++x) {
      const mpz_class& c = cnt[x - base];
      if (c == 0) continue;
      for (EdgeId e : g.out_edges(x)) cnt[g.head(e) - base] += c;
    }
  return cnt;
}

// Same in machine words; returns false when a count overflows 64 bits.
inline bool path_counts_from_u64(const LayeredInstance& g, VertexId v, int last_layer, std::vector<std::uint64_t>& cnt) {
  int i = g.layer_of(v);
  last_layer = std::min(last_layer, g.depth());
  VertexId base = g.layer_begin(i);
  cnt.assign(g.layer_end(std::max(i, last_layer)) - base, 0);
  cnt[v - base] = 1;
  for (int l = i; l < last_layer; ++l)
    for (VertexId x = g.layer_begin(l); x < g.layer_end(l); ++x) {
      std::uint64_t c = cnt[x - base];
      if (c == 0) continue;
      for (EdgeId e : g.out_edges(x))
        if (__builtin_add_overflow(cnt[g.head(e) - base], c, &cnt[g.head(e) - base])) return false;
    }
  return true;
}

inline mpz_class count_paths(const LayeredInstance& g, VertexId v, VertexId u) {
  int i = g.layer_of(v), j = g.layer_of(u);
  if (j < i) return 0;
  return path_counts_from(g, v, j)[u - g.layer_begin(i)];
}

namespace detail {
inline mpz_class bucket_orderings(int buckets, int step) {
  mpz_class r = numerics::factorial(static_cast<unsigned long>(buckets * step));
  mpz_class d = numerics::factorial(static_cast<unsigned long>(step));
  for (int b = 0; b < buckets; ++b) r /= d;
  return r;
}
}  // namespace detail

// Paths from v in L_i to u in L_j with |S_u cup S_v| = union_size, by the
// closed forms: orderings of the added (or removed) elements into buckets,
// times the number of middle-layer sets containing both labels when the pair
// straddles the middle layer.
inline mpz_class closed_form_paths(const LayeredInstance& g, int i, int j, int union_size) {
  if (!g.params()) throw instances::InstanceError("closed form needs an MMDA instance");
  const auto& p = *g.params();
  if (i > j) return 0;
  const int mid = 2 * p.phases(), s = p.step(), r = p.rho_m();
  if (j <= mid) return union_size == p.label_size(j) ? detail::bucket_orderings(j - i, s) : mpz_class(0);
  if (i >= mid) return union_size == p.label_size(i) ? detail::bucket_orderings(j - i, s) : mpz_class(0);
  if (union_size > 2 * r || union_size < std::max(p.label_size(i), p.label_size(j))) return 0;
  return numerics::binomial(p.m - union_size, 2 * r - union_size) * detail::bucket_orderings(j - mid, s) *
         detail::bucket_orderings(mid - i, s);
}

// Largest count over (v, u) in L_i x L_j: the union is as small as possible.
inline mpz_class max_paths_between_layers(const LayeredInstance& g, int i, int j) {
  const auto& p = *g.params();
  return closed_form_paths(g, i, j, std::max(p.label_size(i), p.label_size(j)));
}

// Compares DP counts with the closed form for every u reachable in layers
// layer(v)..last from each given v. Mismatches are recorded.
inline ViolationReport check_path_counts(const LayeredInstance& g, const std::vector<VertexId>& sources,
                                         int max_distance, bool keep_all = false) {
  ViolationReport rep("path_counts", keep_all);
  std::map<std::tuple<int, int, int>, mpz_class> memo;
  std::vector<std::uint64_t> c64;
  std::uint64_t agreed = 0;
  for (VertexId v : sources) {
    int i = g.layer_of(v);
    int last = std::min(g.depth(), i + max_distance);
    bool small = path_counts_from_u64(g, v, last, c64);
    std::vector<mpz_class> big;
    if (!small) big = path_counts_from(g, v, last);
    VertexId base = g.layer_begin(i);
    instances::Label sv = g.label(v);
    for (int j = i; j <= last; ++j)
      for (VertexId u = g.layer_begin(j); u < g.layer_end(j); ++u) {
        int uni = std::popcount(sv | g.label(u));
        auto key = std::make_tuple(i, j, uni);
        auto it = memo.find(key);
        if (it == memo.end()) it = memo.emplace(key, closed_form_paths(g, i, j, uni)).first;
        mpz_class dp = small ? mpz_class(static_cast<unsigned long>(c64[u - base])) : big[u - base];
        if (dp == it->second && !keep_all) {
          ++agreed;
          continue;
        }
        rep.check("paths:v=" + std::to_string(v) + ",u=" + std::to_string(u), ConstraintSense::kEqual, Scalar(dp),
                  Scalar(it->second));
      }
  }
  rep.add_trivial(agreed);
  return rep;
}

struct HelperLemmaReport {
  ViolationReport checks{"helper_lemma"};
  // Largest d such that every layer pair at distance at most d certifies.
  int certified_distance = -1;
  mpq_class xi_star;  // certified_distance / ell
  struct Row {
    int i, j;
    mpz_class max_paths;
    Scalar inverse_gamma_product;
    Ordering ordering;
  };
  std::vector<Row> rows;
};

// For every layer pair with j - i <= xi * ell, the largest path count against
// 1 / prod_{k=i}^{j-1} gamma_k.
inline HelperLemmaReport check_helper_lemma(const LayeredInstance& g, const mpq_class& xi,
                                            const PrecisionPolicy& policy = PrecisionPolicy::from_env()) {
  if (xi <= 0 || xi > 1) throw numerics::DomainError("xi must lie in (0, 1]");
  HelperLemmaReport out;
  const int ell = g.depth();
  mpq_class bound = xi * ell;
  int dmax = static_cast<int>(mpz_class(bound.get_num() / bound.get_den()).get_si());
  std::vector<bool> ok(dmax + 1, true);
  for (int d = 0; d <= dmax; ++d)
    for (int i = 0; i + d <= ell; ++i) {
      int j = i + d;
      Scalar prod(1);
      for (int k = i; k < j; ++k) prod = (prod * g.layer_profile(k).gamma).simplified();
      mpz_class n = max_paths_between_layers(g, i, j);
      const ConstraintRecord& r = out.checks.check("helper:i=" + std::to_string(i) + ",j=" + std::to_string(j),
                                                   ConstraintSense::kAtMost, Scalar(n) * prod, Scalar(1), policy);
      out.rows.push_back({i, j, n, (Scalar(1) / prod).simplified(), r.ordering});
      if (!r.satisfied) ok[d] = false;
    }
  int d = 0;
  while (d <= dmax && ok[d]) ++d;
  out.certified_distance = d - 1;
  out.xi_star = mpq_class(std::max(0, d - 1), ell);
  out.xi_star.canonicalize();
  return out;
}

}  // namespace mmda::relaxations
