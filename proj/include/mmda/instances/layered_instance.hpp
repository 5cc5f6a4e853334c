#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mmda/instances/subsets.hpp"
#include "mmda/numerics/scalar.hpp"

namespace mmda::instances {

using numerics::Scalar;
using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

// Virtual edge entering the source; a path may start with it.
inline constexpr EdgeId kDummyEdge = 0xFFFFFFFFu;

class InstanceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SizeCapExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

enum class Family { kMmda, kConfigLpGap, kSubtreeCounterexample, kCustom };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::kMmda: return "mmda";
    case Family::kConfigLpGap: return "config_lp_gap";
    case Family::kSubtreeCounterexample: return "subtree_counterexample";
    case Family::kCustom: return "custom";
  }
  return "?";
}

struct InstanceParams {
  int m = 0;
  mpq_class rho;
  mpq_class epsilon;
  int ell = 0;

  int rho_m() const { return static_cast<int>(mpq_class(rho * m).get_num().get_si()); }
  int step() const { return static_cast<int>(mpq_class(epsilon * rho * m).get_num().get_si()); }
  int phases() const { return static_cast<int>(mpq_class(1 / epsilon).get_num().get_si()); }

  // Label size of layer i.
  int label_size(int i) const {
    int p = phases();
    return i <= 2 * p ? i * step() : 4 * rho_m() - i * step();
  }

  static InstanceParams make(int m, const mpq_class& rho, int ell) {
    InstanceParams p{m, rho, mpq_class(3, ell), ell};
    p.epsilon.canonicalize();
    p.validate();
    return p;
  }

  void validate() const {
    if (m <= 0) throw InstanceError("m must be positive");
    if (rho <= 0 || rho > mpq_class(1, 4)) throw InstanceError("rho must lie in (0, 1/4]");
    if (ell <= 0 || epsilon * ell != 3) throw InstanceError("epsilon must equal 3/ell");
    auto integral = [](const mpq_class& q) { return q.get_den() == 1; };
    if (!integral(rho * m)) throw InstanceError("rho*m is not an integer");
    if (!integral(1 / epsilon)) throw InstanceError("1/epsilon is not an integer");
    if (!integral(epsilon * rho * m)) throw InstanceError("epsilon*rho*m is not an integer");
  }
};

// Per-layer data. Degrees are absent when they differ inside the layer.
struct LayerProfile {
  int index = 0;
  int label_size = -1;
  std::uint64_t size = 0;
  Scalar k;
  Scalar gamma;
  std::optional<mpz_class> delta_plus;
  std::optional<mpz_class> delta_minus;
};

struct BuildLimits {
  int max_m = 24;
  std::uint64_t max_edges = 20'000'000;
};

// Layered DAG with CSR adjacency. Vertices of layer i occupy the id range
// [layer_begin(i), layer_end(i)). Edges are sorted by head, then tail, so an
// edge's id range is contiguous per layer of its head.
class LayeredInstance {
 public:
  struct Edge {
    VertexId tail;
    VertexId head;
  };

  LayeredInstance() = default;

  // Builds from layer sizes and an edge list; edges must go L_{i-1} -> L_i.
  static LayeredInstance from_edges(Family family, std::vector<std::uint32_t> layer_sizes,
                                    std::vector<Edge> edges, std::vector<Scalar> layer_k) {
    LayeredInstance g;
    g.family_ = family;
    g.layer_offset_.assign(1, 0);
    for (auto s : layer_sizes) g.layer_offset_.push_back(g.layer_offset_.back() + s);
    if (layer_k.size() != layer_sizes.size()) throw InstanceError("one requirement per layer expected");
    g.layer_k_ = std::move(layer_k);
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return a.head != b.head ? a.head < b.head : a.tail < b.tail;
    });
    for (std::size_t i = 1; i < edges.size(); ++i)
      if (edges[i].head == edges[i - 1].head && edges[i].tail == edges[i - 1].tail)
        throw InstanceError("duplicate edge");
    for (const auto& e : edges) {
      if (e.head >= g.num_vertices() || e.tail >= g.num_vertices()) throw InstanceError("edge endpoint out of range");
      if (g.layer_of(e.head) != g.layer_of(e.tail) + 1) throw InstanceError("edge does not join consecutive layers");
    }
    g.edges_ = std::move(edges);
    g.finish();
    return g;
  }

  Family family() const { return family_; }
  const std::optional<InstanceParams>& params() const { return params_; }
  int family_k() const { return family_k_; }

  std::size_t num_vertices() const { return layer_offset_.back(); }
  std::size_t num_edges() const { return edges_.size(); }
  // Number of layers, ell + 1.
  int num_layers() const { return static_cast<int>(layer_offset_.size()) - 1; }
  int depth() const { return num_layers() - 1; }

  VertexId source() const { return 0; }
  VertexId layer_begin(int i) const { return layer_offset_.at(i); }
  VertexId layer_end(int i) const { return layer_offset_.at(i + 1); }
  std::uint32_t layer_size(int i) const { return layer_end(i) - layer_begin(i); }
  int layer_of(VertexId v) const {
    check_vertex(v);
    auto it = std::upper_bound(layer_offset_.begin(), layer_offset_.end(), v);
    return static_cast<int>(it - layer_offset_.begin()) - 1;
  }
  bool is_sink(VertexId v) const { return layer_of(v) == depth(); }

  bool has_labels() const { return !labels_.empty(); }
  Label label(VertexId v) const {
    check_vertex(v);
    if (labels_.empty()) throw InstanceError("instance has no labels");
    return labels_[v];
  }
  // Vertex with the given label in layer i (colex rank lookup).
  VertexId vertex_with_label(int i, Label s) const {
    return layer_begin(i) + static_cast<VertexId>(colex_rank(s));
  }

  const Edge& edge(EdgeId e) const {
    check_edge(e);
    return edges_[e];
  }
  VertexId tail(EdgeId e) const { return edge(e).tail; }
  VertexId head(EdgeId e) const { return edge(e).head; }
  int edge_layer(EdgeId e) const { return layer_of(head(e)); }
  // Edges whose head lies in L_i.
  EdgeId edge_layer_begin(int i) const { return in_offset_[layer_begin(i)]; }
  EdgeId edge_layer_end(int i) const { return in_offset_[layer_end(i)]; }

  // In-edges are the contiguous id range [in_begin(v), in_end(v)).
  EdgeId in_begin(VertexId v) const { check_vertex(v); return in_offset_[v]; }
  EdgeId in_end(VertexId v) const { check_vertex(v); return in_offset_[v + 1]; }
  std::size_t in_degree(VertexId v) const { return in_end(v) - in_begin(v); }
  std::span<const EdgeId> out_edges(VertexId v) const {
    check_vertex(v);
    return {out_edges_.data() + out_offset_[v], out_edges_.data() + out_offset_[v + 1]};
  }
  std::size_t out_degree(VertexId v) const { return out_offset_[v + 1] - out_offset_[v]; }

  std::optional<EdgeId> find_edge(VertexId u, VertexId v) const {
    auto b = edges_.begin() + in_begin(v), e = edges_.begin() + in_end(v);
    auto it = std::lower_bound(b, e, u, [](const Edge& x, VertexId t) { return x.tail < t; });
    if (it != e && it->tail == u) return static_cast<EdgeId>(it - edges_.begin());
    return std::nullopt;
  }

  const std::vector<LayerProfile>& profile() const { return profile_; }
  const LayerProfile& layer_profile(int i) const { return profile_.at(i); }
  // Required out-degree k_v; zero at sinks.
  const Scalar& requirement(VertexId v) const { return layer_k_[layer_of(v)]; }
  const Scalar& layer_requirement(int i) const { return layer_k_.at(i); }

  // Copy with every requirement replaced by its floor.
  LayeredInstance with_integral_requirements() const {
    LayeredInstance g = *this;
    for (std::size_t i = 0; i < g.layer_k_.size(); ++i) {
      g.layer_k_[i] = Scalar(numerics::floor_certified(layer_k_[i]));
      g.profile_[i].k = g.layer_k_[i];
    }
    g.integral_requirements_ = true;
    return g;
  }
  bool integral_requirements() const { return integral_requirements_; }

  void check_vertex(VertexId v) const {
    if (v >= num_vertices()) throw InstanceError("unknown vertex id " + std::to_string(v));
  }
  void check_edge(EdgeId e) const {
    if (e >= edges_.size()) throw InstanceError("unknown edge id " + std::to_string(e));
  }

 private:
  friend LayeredInstance build_mmda(const InstanceParams&, const BuildLimits&);
  friend LayeredInstance build_config_lp_gap(int);
  friend LayeredInstance build_subtree_counterexample(int);

  void finish() {
    std::size_t n = num_vertices();
    in_offset_.assign(n + 1, 0);
    out_offset_.assign(n + 1, 0);
    for (const auto& e : edges_) {
      ++in_offset_[e.head + 1];
      ++out_offset_[e.tail + 1];
    }
    for (std::size_t v = 0; v < n; ++v) {
      in_offset_[v + 1] += in_offset_[v];
      out_offset_[v + 1] += out_offset_[v];
    }
    out_edges_.assign(edges_.size(), 0);
    std::vector<EdgeId> cursor(out_offset_.begin(), out_offset_.end() - 1);
    // Edge ids increase with head, so each out-list is sorted by head.
    for (EdgeId e = 0; e < edges_.size(); ++e) out_edges_[cursor[edges_[e].tail]++] = e;
    if (profile_.empty()) derive_profile();
  }

  void derive_profile() {
    profile_.clear();
    for (int i = 0; i < num_layers(); ++i) {
      LayerProfile lp;
      lp.index = i;
      lp.size = layer_size(i);
      lp.k = layer_k_[i];
      auto uniform = [&](auto degree) -> std::optional<mpz_class> {
        if (layer_size(i) == 0) return std::nullopt;
        std::size_t d = degree(layer_begin(i));
        for (VertexId v = layer_begin(i); v < layer_end(i); ++v)
          if (degree(v) != d) return std::nullopt;
        return mpz_class(static_cast<unsigned long>(d));
      };
      lp.delta_plus = uniform([&](VertexId v) { return out_degree(v); });
      lp.delta_minus = uniform([&](VertexId v) { return in_degree(v); });
      if (i == depth()) lp.delta_plus = mpz_class(0);
      if (lp.delta_plus && *lp.delta_plus != 0) lp.gamma = lp.k / Scalar(*lp.delta_plus);
      profile_.push_back(lp);
    }
  }

  Family family_ = Family::kCustom;
  std::optional<InstanceParams> params_;
  int family_k_ = 0;
  bool integral_requirements_ = false;
  std::vector<std::uint32_t> layer_offset_;
  std::vector<Label> labels_;
  std::vector<Edge> edges_;
  std::vector<EdgeId> in_offset_;
  std::vector<EdgeId> out_offset_;
  std::vector<EdgeId> out_edges_;
  std::vector<LayerProfile> profile_;
  std::vector<Scalar> layer_k_;
};

}  // namespace mmda::instances
