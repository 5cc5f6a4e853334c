#pragma once

#include <algorithm>
#include <vector>

#include "mmda/instances/layered_instance.hpp"

namespace mmda::instances {

using Path = std::vector<EdgeId>;

// A(v): vertices with a directed path to v, sorted by id.
inline std::vector<VertexId> ancestors(const LayeredInstance& g, VertexId v) {
  std::vector<char> seen(g.num_vertices(), 0);
  std::vector<VertexId> stack{v}, out;
  while (!stack.empty()) {
    VertexId x = stack.back();
    stack.pop_back();
    for (EdgeId e = g.in_begin(x); e < g.in_end(x); ++e) {
      VertexId u = g.tail(e);
      if (!seen[u]) {
        seen[u] = 1;
        out.push_back(u);
        stack.push_back(u);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// D(v): vertices reachable from v by a nonempty path, sorted by id.
inline std::vector<VertexId> descendants(const LayeredInstance& g, VertexId v) {
  std::vector<char> seen(g.num_vertices(), 0);
  std::vector<VertexId> stack{v}, out;
  while (!stack.empty()) {
    VertexId x = stack.back();
    stack.pop_back();
    for (EdgeId e : g.out_edges(x)) {
      VertexId w = g.head(e);
      if (!seen[w]) {
        seen[w] = 1;
        out.push_back(w);
        stack.push_back(w);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// A(e): edges lying on some path that continues with e.
inline std::vector<EdgeId> ancestor_edges(const LayeredInstance& g, EdgeId e) {
  std::vector<VertexId> vs = ancestors(g, g.tail(e));
  vs.push_back(g.tail(e));
  std::vector<EdgeId> out;
  for (VertexId v : vs)
    for (EdgeId f = g.in_begin(v); f < g.in_end(v); ++f) out.push_back(f);
  std::sort(out.begin(), out.end());
  return out;
}

// D(e): edges lying on some path that starts with e.
inline std::vector<EdgeId> descendant_edges(const LayeredInstance& g, EdgeId e) {
  std::vector<VertexId> vs = descendants(g, g.head(e));
  vs.push_back(g.head(e));
  std::vector<EdgeId> out;
  for (VertexId v : vs)
    for (EdgeId f : g.out_edges(v)) out.push_back(f);
  std::sort(out.begin(), out.end());
  return out;
}

inline VertexId path_end(const LayeredInstance& g, const Path& p) {
  if (p.empty()) throw InstanceError("empty path");
  return p.back() == kDummyEdge ? g.source() : g.head(p.back());
}

inline VertexId path_start(const LayeredInstance& g, const Path& p) {
  if (p.empty()) throw InstanceError("empty path");
  return p.front() == kDummyEdge ? g.source() : g.tail(p.front());
}

inline bool is_valid_path(const LayeredInstance& g, const Path& p) {
  if (p.empty()) return false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == kDummyEdge) {
      if (i != 0) return false;
      continue;
    }
    if (p[i] >= g.num_edges()) return false;
    if (i > 0) {
      VertexId prev = p[i - 1] == kDummyEdge ? g.source() : g.head(p[i - 1]);
      if (g.tail(p[i]) != prev) return false;
    }
  }
  return true;
}

// C(p): one-edge extensions of p.
inline std::vector<Path> child_paths(const LayeredInstance& g, const Path& p) {
  std::vector<Path> out;
  for (EdgeId e : g.out_edges(path_end(g, p))) {
    Path q = p;
    q.push_back(e);
    out.push_back(std::move(q));
  }
  return out;
}

// D(p) restricted to total length at most max_len; includes p itself.
inline std::vector<Path> descendant_paths(const LayeredInstance& g, const Path& p, std::size_t max_len) {
  std::vector<Path> out;
  if (p.size() > max_len) return out;
  std::vector<Path> frontier{p};
  while (!frontier.empty()) {
    Path q = std::move(frontier.back());
    frontier.pop_back();
    if (q.size() < max_len)
      for (auto& c : child_paths(g, q)) frontier.push_back(std::move(c));
    out.push_back(std::move(q));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// I(v) restricted to paths of length at most max_len, including those that
// start with the dummy edge.
inline std::vector<Path> paths_ending_at(const LayeredInstance& g, VertexId v, std::size_t max_len) {
  std::vector<Path> out;
  std::vector<Path> frontier;
  for (EdgeId e = g.in_begin(v); e < g.in_end(v); ++e) frontier.push_back({e});
  if (v == g.source()) frontier.push_back({kDummyEdge});
  while (!frontier.empty()) {
    Path q = std::move(frontier.back());
    frontier.pop_back();
    out.push_back(q);
    if (q.size() >= max_len || q.front() == kDummyEdge) continue;
    VertexId s = g.tail(q.front());
    for (EdgeId e = g.in_begin(s); e < g.in_end(s); ++e) {
      Path r{e};
      r.insert(r.end(), q.begin(), q.end());
      frontier.push_back(std::move(r));
    }
    if (s == g.source()) {
      Path r{kDummyEdge};
      r.insert(r.end(), q.begin(), q.end());
      frontier.push_back(std::move(r));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mmda::instances
