#pragma once

#include <cstdint>
#include <vector>

#include "mmda/instances/layered_instance.hpp"

namespace mmda::instances {

// Depth 3: the source feeds k^2 vertices, each owning a private block of k
// middle vertices and k sinks joined completely. Every requirement is k.
inline LayeredInstance build_config_lp_gap(int k) {
  if (k < 2) throw InstanceError("k must be at least 2");
  std::uint32_t uk = static_cast<std::uint32_t>(k), l1 = uk * uk, l2 = l1 * uk;
  std::vector<LayeredInstance::Edge> edges;
  const VertexId b1 = 1, b2 = b1 + l1, b3 = b2 + l2;
  for (std::uint32_t a = 0; a < l1; ++a) {
    edges.push_back({0, b1 + a});
    for (std::uint32_t j = 0; j < uk; ++j) {
      VertexId w = b2 + a * uk + j;
      edges.push_back({b1 + a, w});
      for (std::uint32_t t = 0; t < uk; ++t) edges.push_back({w, b3 + a * uk + t});
    }
  }
  Scalar kk(k);
  LayeredInstance g = LayeredInstance::from_edges(Family::kConfigLpGap, {1, l1, l2, l2}, std::move(edges),
                                                  {kk, kk, kk, Scalar(0)});
  g.family_k_ = k;
  return g;
}

// Depth 2: the source feeds k^2 vertices; each has one private sink and
// shares k public sinks with all the others. Sinks are ordered private first.
inline LayeredInstance build_subtree_counterexample(int k) {
  if (k < 2) throw InstanceError("k must be at least 2");
  std::uint32_t uk = static_cast<std::uint32_t>(k), l1 = uk * uk;
  std::vector<LayeredInstance::Edge> edges;
  const VertexId b1 = 1, b2 = b1 + l1, pub = b2 + l1;
  for (std::uint32_t a = 0; a < l1; ++a) {
    edges.push_back({0, b1 + a});
    edges.push_back({b1 + a, b2 + a});
    for (std::uint32_t t = 0; t < uk; ++t) edges.push_back({b1 + a, pub + t});
  }
  Scalar kk(k);
  LayeredInstance g = LayeredInstance::from_edges(Family::kSubtreeCounterexample, {1, l1, l1 + uk},
                                                  std::move(edges), {kk, kk, Scalar(0)});
  g.family_k_ = k;
  return g;
}

inline bool is_public_sink(const LayeredInstance& g, VertexId v) {
  if (g.family() != Family::kSubtreeCounterexample) return false;
  std::uint32_t k2 = static_cast<std::uint32_t>(g.family_k() * g.family_k());
  return g.layer_of(v) == 2 && v >= g.layer_begin(2) + k2;
}

// Players and resources of the max-min allocation form of the config-LP gap
// instance. Every non-sink vertex is a player; every non-source vertex is a
// resource (a sink, or the private resource of its player).
struct SantaView {
  struct Valuation {
    std::uint32_t resource;
    Scalar value;
  };
  std::vector<VertexId> player_vertex;
  std::vector<VertexId> resource_vertex;
  // Index of the player's private resource, or -1 for the source player.
  std::vector<std::int64_t> private_resource;
  std::vector<std::vector<Valuation>> valuations;
};

inline SantaView santa_view(const LayeredInstance& g) {
  if (g.family() != Family::kConfigLpGap) throw InstanceError("santa view needs a config-LP gap instance");
  const int k = g.family_k();
  SantaView sv;
  std::vector<std::int64_t> resource_of(g.num_vertices(), -1);
  for (VertexId v = 1; v < g.num_vertices(); ++v) {
    resource_of[v] = static_cast<std::int64_t>(sv.resource_vertex.size());
    sv.resource_vertex.push_back(v);
  }
  const Scalar small = Scalar::ratio(1, k);
  for (VertexId v = 0; v < g.layer_begin(g.depth()); ++v) {
    sv.player_vertex.push_back(v);
    sv.private_resource.push_back(v == 0 ? -1 : resource_of[v]);
    std::vector<SantaView::Valuation> vals;
    if (v != 0) vals.push_back({static_cast<std::uint32_t>(resource_of[v]), Scalar(1)});
    for (EdgeId e : g.out_edges(v)) vals.push_back({static_cast<std::uint32_t>(resource_of[g.head(e)]), small});
    sv.valuations.push_back(std::move(vals));
  }
  return sv;
}

}  // namespace mmda::instances
