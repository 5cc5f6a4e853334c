#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmda/instances/layered_instance.hpp"
#include "mmda/util/json_support.hpp"
#include "mmda/util/rng.hpp"

namespace mmda::rounding {

using instances::EdgeId;
using instances::LayeredInstance;
using instances::VertexId;
using numerics::Scalar;

struct ForestOptions {
  std::uint64_t max_paths = 5'000'000;
  numerics::PrecisionPolicy policy = numerics::PrecisionPolicy::from_env();
};

// Selection probability out of a vertex: gamma of its layer when the layer
// has uniform out-degree, k_v / |delta+(v)| otherwise.
inline Scalar extension_probability(const LayeredInstance& g, VertexId v) {
  const auto& lp = g.layer_profile(g.layer_of(v));
  if (lp.delta_plus && *lp.delta_plus != 0) return lp.gamma;
  if (g.out_degree(v) == 0) return Scalar(0);
  return g.requirement(v) / Scalar(static_cast<unsigned long>(g.out_degree(v)));
}

// P' as a forest of path nodes. Node i is the path of node parent[i]
// extended by edge[i]; roots have parent -1 and start at the source.
class SampledPathForest {
 public:
  struct Node {
    std::int64_t parent;
    EdgeId edge;
    VertexId end;
    std::uint32_t length;
  };

  SampledPathForest(const LayeredInstance& g, std::uint64_t seed) : g_(&g), seed_(seed) {}

  const LayeredInstance& instance() const { return *g_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool truncated() const { return truncated_; }

  // Children of node i; i = -1 is the empty path at the source.
  const std::vector<std::uint32_t>& children(std::int64_t i) const { return i < 0 ? roots_ : kids_[i]; }

  std::vector<EdgeId> path(std::uint32_t i) const {
    std::vector<EdgeId> p;
    for (std::int64_t c = i; c >= 0; c = nodes_[c].parent) p.push_back(nodes_[c].edge);
    return {p.rbegin(), p.rend()};
  }

  // Each node's parent is a node or the source, so P' is prefix-closed.
  bool prefix_closed() const {
    const LayeredInstance& g = *g_;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      VertexId from = n.parent < 0 ? g.source() : nodes_[n.parent].end;
      if (n.parent >= static_cast<std::int64_t>(i) || g.tail(n.edge) != from || g.head(n.edge) != n.end) return false;
      std::uint32_t plen = n.parent < 0 ? 0 : nodes_[n.parent].length;
      if (n.length != plen + 1) return false;
    }
    return true;
  }

  Json to_json(bool with_paths = false) const {
    Json j;
    j["seed"] = seed_;
    j["paths"] = nodes_.size();
    j["truncated"] = truncated_;
    std::vector<std::uint64_t> per_len;
    for (const auto& n : nodes_) {
      if (per_len.size() < n.length) per_len.resize(n.length, 0);
      ++per_len[n.length - 1];
    }
    j["paths_per_length"] = per_len;
    if (with_paths) {
      Json ps = Json::array();
      for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
        Json vs = Json::array();
        vs.push_back(g_->source());
        for (EdgeId e : path(i)) vs.push_back(g_->head(e));
        ps.push_back(vs);
      }
      j["path_list"] = ps;
    }
    return j;
  }

 private:
  friend SampledPathForest sample_forest(const LayeredInstance&, std::uint64_t, const ForestOptions&);
  const LayeredInstance* g_;
  std::uint64_t seed_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> roots_;
  std::vector<std::vector<std::uint32_t>> kids_;
  bool truncated_ = false;
};

// Layer by layer: each out-edge of the source with probability gamma_0, then
// every out-edge of each selected path's endpoint independently.
inline SampledPathForest sample_forest(const LayeredInstance& g, std::uint64_t seed, const ForestOptions& opt = {}) {
  SampledPathForest f(g, seed);
  std::vector<std::optional<util::Bernoulli>> by_layer(g.num_layers());
  auto coin = [&](VertexId v) {
    const auto& lp = g.layer_profile(g.layer_of(v));
    if (lp.delta_plus && *lp.delta_plus != 0) {
      auto& b = by_layer[g.layer_of(v)];
      if (!b) b = util::Bernoulli::of(lp.gamma, opt.policy);
      return *b;
    }
    return util::Bernoulli::of(extension_probability(g, v), opt.policy);
  };
  auto extend = [&](std::int64_t parent, VertexId v, std::uint32_t len) {
    util::Bernoulli b = coin(v);
    for (EdgeId e : g.out_edges(v)) {
      if (f.nodes_.size() >= opt.max_paths) {
        f.truncated_ = true;
        return;
      }
      std::uint64_t u = util::counter_draw(seed, static_cast<std::uint64_t>(parent + 1), 0, e, 0);
      if (!b.draw(u)) continue;
      auto id = static_cast<std::uint32_t>(f.nodes_.size());
      f.nodes_.push_back({parent, e, g.head(e), len + 1});
      f.kids_.emplace_back();
      (parent < 0 ? f.roots_ : f.kids_[parent]).push_back(id);
    }
  };
  if (!g.is_sink(g.source())) extend(-1, g.source(), 0);
  // Nodes are appended in breadth-first order, so one pass visits all.
  for (std::size_t i = 0; i < f.nodes_.size() && !f.truncated_; ++i) {
    const auto n = f.nodes_[i];
    if (!g.is_sink(n.end)) extend(static_cast<std::int64_t>(i), n.end, n.length);
  }
  return f;
}

}  // namespace mmda::rounding
