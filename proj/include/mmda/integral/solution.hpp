#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "mmda/instances/graph_queries.hpp"
#include "mmda/instances/layered_instance.hpp"
#include "mmda/util/json_support.hpp"

namespace mmda::integral {

using instances::EdgeId;
using instances::LayeredInstance;
using instances::Path;
using instances::VertexId;
using numerics::Scalar;

class SolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An edge set T with in-degree at most one everywhere and every edge on a
// source-rooted path.
class IntegralSolution {
 public:
  IntegralSolution() = default;
  IntegralSolution(const LayeredInstance& g, std::vector<EdgeId> edges) : g_(&g), edges_(std::move(edges)) {
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    in_.assign(g.num_vertices(), 0);
    out_.assign(g.num_vertices(), 0);
    for (EdgeId e : edges_) {
      if (e >= g.num_edges()) throw SolutionError("edge id out of range");
      ++out_[g.tail(e)];
      ++in_[g.head(e)];
    }
    for (VertexId v = 0; v < g.num_vertices(); ++v)
      if (in_[v] > 1) throw SolutionError("vertex " + std::to_string(v) + " has in-degree " + std::to_string(in_[v]));
    if (in_[g.source()] != 0) throw SolutionError("the source has an in-edge");
    for (EdgeId e : edges_) {
      VertexId u = g.tail(e);
      if (u != g.source() && in_[u] != 1)
        throw SolutionError("edge " + std::to_string(e) + " is not reachable from the source");
    }
  }

  const LayeredInstance& instance() const { return *g_; }
  const std::vector<EdgeId>& edges() const { return edges_; }
  std::uint32_t in_degree(VertexId v) const { return in_[v]; }
  std::uint32_t out_degree(VertexId v) const { return out_[v]; }
  bool covers(VertexId v) const { return v == g_->source() || in_[v] == 1; }

  // P_T: every source-rooted path in T, shortest first.
  std::vector<Path> paths() const {
    const LayeredInstance& g = *g_;
    std::vector<std::vector<EdgeId>> kids(g.num_vertices());
    for (EdgeId e : edges_) kids[g.tail(e)].push_back(e);
    std::vector<Path> out, frontier;
    for (EdgeId e : kids[g.source()]) frontier.push_back({e});
    while (!frontier.empty()) {
      std::vector<Path> next;
      for (auto& p : frontier) {
        for (EdgeId e : kids[g.head(p.back())]) {
          Path q = p;
          q.push_back(e);
          next.push_back(std::move(q));
        }
        out.push_back(std::move(p));
      }
      frontier = std::move(next);
    }
    return out;
  }

 private:
  const LayeredInstance* g_ = nullptr;
  std::vector<EdgeId> edges_;
  std::vector<std::uint32_t> in_, out_;
};

struct SolutionQuality {
  Scalar alpha;
  // Covered vertex attaining the minimum.
  std::optional<VertexId> binding;
};

// alpha = min over the source and covered non-sinks of |delta_T^+(v)| / k_v.
inline SolutionQuality quality(const IntegralSolution& t, const numerics::PrecisionPolicy& pol = {}) {
  const LayeredInstance& g = t.instance();
  SolutionQuality q{Scalar(0), std::nullopt};
  bool first = true;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (!t.covers(v) || g.is_sink(v)) continue;
    const Scalar& k = g.requirement(v);
    if (k.is_zero()) continue;
    Scalar r = Scalar(static_cast<long>(t.out_degree(v))) / k;
    if (first || numerics::certified_less(r, q.alpha, pol)) {
      q.alpha = r;
      q.binding = v;
      first = false;
    }
  }
  return q;
}

// Follows the first out-edge from the source until a sink.
inline IntegralSolution single_path(const LayeredInstance& g) {
  std::vector<EdgeId> es;
  VertexId v = g.source();
  while (!g.is_sink(v) && g.out_degree(v) > 0) {
    EdgeId e = g.out_edges(v)[0];
    es.push_back(e);
    v = g.head(e);
  }
  return IntegralSolution(g, std::move(es));
}

inline Json solution_json(const IntegralSolution& t, const SolutionQuality& q) {
  const LayeredInstance& g = t.instance();
  Json j;
  Json es = Json::array();
  for (EdgeId e : t.edges()) es.push_back({g.tail(e), g.head(e)});
  j["edges"] = es;
  j["num_edges"] = t.edges().size();
  j["quality"] = scalar_json(q.alpha);
  j["binding_vertex"] = q.binding ? Json(*q.binding) : Json(nullptr);
  return j;
}

}  // namespace mmda::integral
