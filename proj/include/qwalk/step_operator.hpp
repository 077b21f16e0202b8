#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/edge_basis.hpp"
#include "qwalk/graph.hpp"
#include "qwalk/types.hpp"

namespace qwalk {

/// State of the walk: amplitudes over the oriented edges of a basis.
struct WalkState {
  std::shared_ptr<const EdgeBasis> basis;
  Vector amplitudes;

  static WalkState zero(std::shared_ptr<const EdgeBasis> basis) {
    WalkState s;
    s.amplitudes = Vector::Zero(basis->size());
    s.basis = std::move(basis);
    return s;
  }

  /// Unit amplitude on one oriented edge, addressed by vertex labels.
  static WalkState basis_state(std::shared_ptr<const EdgeBasis> basis, const std::string& from,
                               const std::string& to) {
    WalkState s = zero(std::move(basis));
    int i = s.basis->index_of(from, to);
    if (i < 0)
      throw ValidationError("no oriented edge " + from + " -> " + to + " in this basis");
    s.amplitudes[i] = 1.0;
    return s;
  }

  double norm() const { return amplitudes.norm(); }
  cplx amplitude(const std::string& from, const std::string& to) const {
    int i = basis->index_of(from, to);
    if (i < 0)
      throw ValidationError("no oriented edge " + from + " -> " + to + " in this basis");
    return amplitudes[i];
  }
};

/// One step of the walk.  Block-diagonal over vertices: the block at vertex
/// B maps the amplitudes on edges ending at B to the edges starting at B,
/// with edge-endpoint phases folded in on both sides.
class StepOperator {
 public:
  struct VertexBlock {
    int vertex;
    std::vector<int> neighbors;  // vertex ids in the fixed scattering order
    std::vector<int> in_edges;   // index of (neighbors[j] -> vertex)
    std::vector<int> out_edges;  // index of (vertex -> neighbors[j])
    Matrix block;                // out_edges[i] <- in_edges[j]
  };

  StepOperator(std::shared_ptr<const EdgeBasis> basis, SparseMatrix matrix,
               std::vector<VertexBlock> blocks)
      : basis_(std::move(basis)), matrix_(std::move(matrix)), blocks_(std::move(blocks)) {}

  const EdgeBasis& basis() const { return *basis_; }
  std::shared_ptr<const EdgeBasis> basis_ptr() const { return basis_; }
  const SparseMatrix& matrix() const { return matrix_; }
  const std::vector<VertexBlock>& blocks() const { return blocks_; }
  const VertexBlock& block(int vertex) const { return blocks_[static_cast<std::size_t>(vertex)]; }

 private:
  std::shared_ptr<const EdgeBasis> basis_;
  SparseMatrix matrix_;
  std::vector<VertexBlock> blocks_;
};

/// Builds the step operator of a graph on a truncated basis.  Interior
/// vertices scatter with their declared unitary, tail vertices pass
/// amplitudes through unchanged, and the outermost tail vertices reflect.
///
/// The neighbour order of each block is fixed by sorting labels, with a
/// vertex's tail neighbours keyed as "tail_in" / "tail_out" instead of
/// their synthetic labels.  Two-port vertices therefore present their
/// transmission row to the first neighbour in this order.
inline StepOperator assemble(const TailedGraph& g, std::shared_ptr<const EdgeBasis> basis_ptr) {
  const EdgeBasis& basis = *basis_ptr;
  if (basis.vertex_id(g.entry) != basis.entry_id() ||
      basis.vertex_id(g.exit_label) != basis.exit_id())
    throw ValidationError("basis was not built from this graph");

  std::map<std::pair<std::string, std::string>, const EdgeSpec*> edge_specs;
  for (const auto& e : g.edges) edge_specs[std::minmax(e.a, e.b)] = &e;

  auto sort_key = [&](int v) -> std::string {
    switch (basis.role(v)) {
      case VertexRole::LeftTail:
        return "tail_in";
      case VertexRole::RightTail:
        return "tail_out";
      case VertexRole::Interior:
        return basis.label(v);
    }
    return basis.label(v);
  };

  std::vector<Eigen::Triplet<cplx>> triplets;
  std::vector<StepOperator::VertexBlock> blocks;
  blocks.reserve(static_cast<std::size_t>(basis.vertex_count()));
  for (int v = 0; v < basis.vertex_count(); ++v) {
    StepOperator::VertexBlock blk;
    blk.vertex = v;
    for (int e : basis.out_edges(v)) blk.neighbors.push_back(basis.edge(e).to);
    std::sort(blk.neighbors.begin(), blk.neighbors.end(), [&](int x, int y) {
      return std::pair(sort_key(x), basis.label(x)) < std::pair(sort_key(y), basis.label(y));
    });
    int deg = static_cast<int>(blk.neighbors.size());

    VertexSpec spec;
    if (basis.role(v) == VertexRole::Interior)
      spec = g.vertices[static_cast<std::size_t>(v)].spec;
    else if (basis.is_reflecting_end(v))
      spec = VertexSpec::grover(1);
    else
      spec = VertexSpec::free_vertex();
    if (spec.dimension() != deg)
      throw ValidationError("vertex '" + basis.label(v) + "' has degree " + std::to_string(deg) +
                            " but its unitary acts on " + std::to_string(spec.dimension()) +
                            " edges");

    Matrix local = spec.local_unitary();
    Vector phase(deg);
    for (int j = 0; j < deg; ++j) {
      double phi = 0.0;
      if (basis.role(v) == VertexRole::Interior &&
          basis.role(blk.neighbors[static_cast<std::size_t>(j)]) == VertexRole::Interior) {
        auto it = edge_specs.find(
            std::minmax(basis.label(v), basis.label(blk.neighbors[static_cast<std::size_t>(j)])));
        if (it != edge_specs.end()) phi = it->second->phase_at(basis.label(v));
      }
      phase[j] = std::polar(1.0, phi);
    }
    blk.block = phase.asDiagonal() * local * phase.asDiagonal();

    double defect =
        (blk.block.adjoint() * blk.block - Matrix::Identity(deg, deg)).cwiseAbs().maxCoeff();
    if (defect > 1e-12)
      throw ValidationError("local block at vertex '" + basis.label(v) +
                            "' fails the unitarity check");

    for (int j = 0; j < deg; ++j) {
      int n = blk.neighbors[static_cast<std::size_t>(j)];
      blk.in_edges.push_back(basis.index_of(n, v));
      blk.out_edges.push_back(basis.index_of(v, n));
    }
    for (int i = 0; i < deg; ++i)
      for (int j = 0; j < deg; ++j)
        triplets.emplace_back(blk.out_edges[static_cast<std::size_t>(i)],
                              blk.in_edges[static_cast<std::size_t>(j)], blk.block(i, j));
    blocks.push_back(std::move(blk));
  }

  SparseMatrix m(basis.size(), basis.size());
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return StepOperator(std::move(basis_ptr), std::move(m), std::move(blocks));
}

inline WalkState apply(const StepOperator& u, const WalkState& psi) {
  if (!psi.basis || !(*psi.basis == u.basis()))
    throw ValidationError("state and operator use different bases");
  WalkState out;
  out.basis = psi.basis;
  out.amplitudes = u.matrix() * psi.amplitudes;
  return out;
}

/// max |(U* U - I)_ij|, computed sparsely.
inline double unitarity_defect(const SparseMatrix& m) {
  SparseMatrix gram = SparseMatrix(m.adjoint()) * m;
  double defect = 0.0;
  for (int k = 0; k < gram.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(gram, k); it; ++it) {
      cplx expect = (it.row() == it.col()) ? cplx(1.0) : cplx(0.0);
      defect = std::max(defect, std::abs(it.value() - expect));
    }
  // A structurally missing diagonal entry would mean a zero column.
  for (int k = 0; k < gram.outerSize(); ++k) {
    bool has_diag = false;
    for (SparseMatrix::InnerIterator it(gram, k); it; ++it)
      if (it.row() == it.col()) has_diag = true;
    if (!has_diag) defect = std::max(defect, 1.0);
  }
  return defect;
}

inline double unitarity_defect(const StepOperator& u) { return unitarity_defect(u.matrix()); }

/// Probability sitting on edges that end inside the vertex set.  One step
/// scatters exactly this weight onto the edges that start inside the set,
/// so for any set S: weight_ending_in(psi, S) == weight_starting_in(U psi, S).
inline double weight_ending_in(const WalkState& psi, const std::vector<int>& vertex_set) {
  std::vector<char> in_set(static_cast<std::size_t>(psi.basis->vertex_count()), 0);
  for (int v : vertex_set) in_set[static_cast<std::size_t>(v)] = 1;
  double w = 0.0;
  for (int i = 0; i < psi.basis->size(); ++i)
    if (in_set[static_cast<std::size_t>(psi.basis->edge(i).to)])
      w += std::norm(psi.amplitudes[i]);
  return w;
}

/// Probability sitting on edges that start inside the vertex set.
inline double weight_starting_in(const WalkState& psi, const std::vector<int>& vertex_set) {
  std::vector<char> in_set(static_cast<std::size_t>(psi.basis->vertex_count()), 0);
  for (int v : vertex_set) in_set[static_cast<std::size_t>(v)] = 1;
  double w = 0.0;
  for (int i = 0; i < psi.basis->size(); ++i)
    if (in_set[static_cast<std::size_t>(psi.basis->edge(i).from)])
      w += std::norm(psi.amplitudes[i]);
  return w;
}

}  // namespace qwalk
