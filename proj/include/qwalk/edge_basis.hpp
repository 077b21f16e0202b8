#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qwalk/graph.hpp"
#include "qwalk/types.hpp"

namespace qwalk {

/// Oriented edge (from -> to) between basis vertex ids.
struct OrientedEdge {
  int from = -1;
  int to = -1;
  friend bool operator==(const OrientedEdge&, const OrientedEdge&) = default;
};

/// Where a basis vertex came from.
enum class VertexRole { Interior, LeftTail, RightTail };

/// Indexed oriented-edge basis of a graph whose tails are truncated to a
/// finite number of segments.  The outermost vertex of each truncated tail
/// acts as a perfect reflector, so the walk below is exact as long as no
/// amplitude has reached it (see light_cone_steps in walk.hpp).
///
/// Ordering, fixed and reproducible:
///   1. the 2N interior oriented edges, lexicographic by (from, to) label;
///   2. left-tail edges by decreasing distance, inward orientation first;
///   3. right-tail edges by increasing distance, outward orientation first.
class EdgeBasis {
 public:
  EdgeBasis(const TailedGraph& g, int tail_length) : tail_length_(tail_length) {
    if (tail_length < 1) throw ValidationError("tail_length must be >= 1");
    g.validate();
    int nv = static_cast<int>(g.vertices.size());
    labels_.reserve(static_cast<std::size_t>(nv + 2 * tail_length));
    for (const auto& v : g.vertices) labels_.push_back(v.label);
    roles_.assign(static_cast<std::size_t>(nv), VertexRole::Interior);
    distances_.assign(static_cast<std::size_t>(nv), 0);
    left_tail_.resize(static_cast<std::size_t>(tail_length));
    right_tail_.resize(static_cast<std::size_t>(tail_length));
    for (int d = 1; d <= tail_length; ++d) {
      left_tail_[static_cast<std::size_t>(d - 1)] = static_cast<int>(labels_.size());
      labels_.push_back("@in" + std::to_string(d));
      roles_.push_back(VertexRole::LeftTail);
      distances_.push_back(d);
    }
    for (int d = 1; d <= tail_length; ++d) {
      right_tail_[static_cast<std::size_t>(d - 1)] = static_cast<int>(labels_.size());
      labels_.push_back("@out" + std::to_string(d));
      roles_.push_back(VertexRole::RightTail);
      distances_.push_back(d);
    }
    entry_ = g.vertex_index(g.entry);
    exit_ = g.vertex_index(g.exit_label);

    std::vector<OrientedEdge> interior;
    interior.reserve(2 * g.edges.size());
    for (const auto& e : g.edges) {
      int ia = g.vertex_index(e.a);
      int ib = g.vertex_index(e.b);
      interior.push_back({ia, ib});
      interior.push_back({ib, ia});
    }
    std::sort(interior.begin(), interior.end(), [&](const OrientedEdge& x, const OrientedEdge& y) {
      return std::pair(labels_[static_cast<std::size_t>(x.from)],
                       labels_[static_cast<std::size_t>(x.to)]) <
             std::pair(labels_[static_cast<std::size_t>(y.from)],
                       labels_[static_cast<std::size_t>(y.to)]);
    });
    edges_ = std::move(interior);
    interior_count_ = static_cast<int>(edges_.size());

    for (int d = tail_length; d >= 1; --d) {
      int outer = left_tail_[static_cast<std::size_t>(d - 1)];
      int inner = (d == 1) ? entry_ : left_tail_[static_cast<std::size_t>(d - 2)];
      edges_.push_back({outer, inner});
      edges_.push_back({inner, outer});
    }
    for (int d = 1; d <= tail_length; ++d) {
      int outer = right_tail_[static_cast<std::size_t>(d - 1)];
      int inner = (d == 1) ? exit_ : right_tail_[static_cast<std::size_t>(d - 2)];
      edges_.push_back({inner, outer});
      edges_.push_back({outer, inner});
    }

    index_.reserve(edges_.size());
    for (std::size_t i = 0; i < edges_.size(); ++i) index_[key(edges_[i])] = static_cast<int>(i);
    reversed_.resize(edges_.size());
    out_edges_.assign(labels_.size(), {});
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      reversed_[i] = index_.at(key({edges_[i].to, edges_[i].from}));
      out_edges_[static_cast<std::size_t>(edges_[i].from)].push_back(static_cast<int>(i));
    }
  }

  int size() const { return static_cast<int>(edges_.size()); }
  int interior_edge_count() const { return interior_count_; }
  int vertex_count() const { return static_cast<int>(labels_.size()); }
  int tail_length() const { return tail_length_; }
  int entry_id() const { return entry_; }
  int exit_id() const { return exit_; }

  const OrientedEdge& edge(int i) const { return edges_[static_cast<std::size_t>(i)]; }
  const std::string& label(int vertex) const { return labels_[static_cast<std::size_t>(vertex)]; }
  VertexRole role(int vertex) const { return roles_[static_cast<std::size_t>(vertex)]; }
  /// Tail distance from the attachment vertex (0 for interior vertices).
  int tail_distance(int vertex) const { return distances_[static_cast<std::size_t>(vertex)]; }

  int vertex_id(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == label) return static_cast<int>(i);
    return -1;
  }

  int index_of(int from, int to) const {
    auto it = index_.find(key({from, to}));
    return it == index_.end() ? -1 : it->second;
  }
  int index_of(const OrientedEdge& e) const { return index_of(e.from, e.to); }
  int index_of(const std::string& from, const std::string& to) const {
    int f = vertex_id(from);
    int t = vertex_id(to);
    return (f < 0 || t < 0) ? -1 : index_of(f, t);
  }

  /// Basis index of the reversed edge; always valid.
  int reversed(int edge_index) const { return reversed_[static_cast<std::size_t>(edge_index)]; }

  /// Basis indices of all edges leaving the vertex.
  const std::vector<int>& out_edges(int vertex) const {
    return out_edges_[static_cast<std::size_t>(vertex)];
  }

  /// Vertex ids at tail distance 1..tail_length (index 0 is adjacent to the
  /// entry / exit vertex).
  const std::vector<int>& left_tail() const { return left_tail_; }
  const std::vector<int>& right_tail() const { return right_tail_; }

  bool is_reflecting_end(int vertex) const {
    return role(vertex) != VertexRole::Interior && tail_distance(vertex) == tail_length_;
  }

  friend bool operator==(const EdgeBasis& a, const EdgeBasis& b) {
    return a.labels_ == b.labels_ && a.edges_ == b.edges_ && a.entry_ == b.entry_ &&
           a.exit_ == b.exit_;
  }

 private:
  static long long key(const OrientedEdge& e) {
    return (static_cast<long long>(e.from) << 32) | static_cast<unsigned int>(e.to);
  }

  int tail_length_;
  int interior_count_ = 0;
  int entry_ = -1;
  int exit_ = -1;
  std::vector<std::string> labels_;
  std::vector<VertexRole> roles_;
  std::vector<int> distances_;
  std::vector<int> left_tail_;
  std::vector<int> right_tail_;
  std::vector<OrientedEdge> edges_;
  std::unordered_map<long long, int> index_;
  std::vector<int> reversed_;
  std::vector<std::vector<int>> out_edges_;
};

inline std::shared_ptr<const EdgeBasis> truncate(const TailedGraph& g, int tail_length) {
  return std::make_shared<EdgeBasis>(g, tail_length);
}

}  // namespace qwalk
