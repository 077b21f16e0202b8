#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/scattering.hpp"
#include "qwalk/step_operator.hpp"
#include "qwalk/types.hpp"

namespace qwalk {

/// Antiunitary edge reversal: amplitudes move to the reversed edges and are
/// conjugated.  Applying it twice is the identity.
inline WalkState time_reverse(const WalkState& psi) {
  WalkState out = WalkState::zero(psi.basis);
  for (int i = 0; i < psi.basis->size(); ++i)
    out.amplitudes[psi.basis->reversed(i)] = std::conj(psi.amplitudes[i]);
  return out;
}

/// Result of the blockwise invariance check.  The walk commutes with edge
/// reversal (conjugating U into its inverse) exactly when every vertex block
/// is symmetric; the worst asymmetry and where it occurs are reported.
struct TimeReversalReport {
  bool invariant = true;
  double worst_violation = 0.0;
  std::string vertex;       // where the worst asymmetry sits
  std::string neighbor_a;   // offending entry pair within the block
  std::string neighbor_b;
};

inline TimeReversalReport check_invariance(const StepOperator& u) {
  TimeReversalReport rep;
  const EdgeBasis& basis = u.basis();
  for (const auto& blk : u.blocks()) {
    for (Eigen::Index i = 0; i < blk.block.rows(); ++i)
      for (Eigen::Index j = i + 1; j < blk.block.cols(); ++j) {
        double v = std::abs(blk.block(i, j) - blk.block(j, i));
        if (v > rep.worst_violation) {
          rep.worst_violation = v;
          rep.vertex = basis.label(blk.vertex);
          rep.neighbor_a = basis.label(blk.neighbors[static_cast<std::size_t>(i)]);
          rep.neighbor_b = basis.label(blk.neighbors[static_cast<std::size_t>(j)]);
        }
      }
  }
  rep.invariant = rep.worst_violation <= 1e-12;
  return rep;
}

/// Left/right transmission comparison on the unit circle, together with the
/// two relations that force the equality for a reversal-invariant walk:
///   |r_l|^2 + conj(t_l) t_r = 1
///   conj(r_l) t_l + conj(t_l) r_r = 0
struct TransmissionSymmetry {
  int samples = 0;
  double max_t_diff = 0.0;
  double max_return_defect = 0.0;  // first relation
  double max_cross_defect = 0.0;   // second relation
};

inline TransmissionSymmetry verify_transmission_symmetry(const TailedGraph& g, int samples = 64) {
  if (samples < 1) throw ValidationError("transmission symmetry needs samples >= 1");
  TimeReversalReport rep = check_invariance(assemble(g, truncate(g, 1)));
  if (!rep.invariant)
    throw ValidationError("walk is not reversal invariant (block at vertex '" + rep.vertex +
                          "' is asymmetric by " + std::to_string(rep.worst_violation) + ")");
  ScatteringProblem left = build_problem(g, Direction::Left);
  ScatteringProblem right = build_problem(g, Direction::Right);
  TransmissionSymmetry sym;
  sym.samples = samples;
  for (int k = 0; k < samples; ++k) {
    cplx z = std::polar(1.0, 2.0 * M_PI * static_cast<double>(k) / samples);
    Amplitudes al = amplitudes_at(left, z);
    Amplitudes ar = amplitudes_at(right, z);
    sym.max_t_diff = std::max(sym.max_t_diff, std::abs(al.t - ar.t));
    sym.max_return_defect =
        std::max(sym.max_return_defect,
                 std::abs(std::norm(al.r) + std::conj(al.t) * ar.t - cplx(1.0)));
    sym.max_cross_defect =
        std::max(sym.max_cross_defect,
                 std::abs(std::conj(al.r) * al.t + std::conj(al.t) * ar.r));
  }
  return sym;
}

/// How one bound state behaves under edge reversal.  Reversal preserves each
/// bound eigenspace, so a state from a one-dimensional eigenspace maps to
/// itself up to a phase (overlap 1); overlap < 1 means the state mixes with
/// a degenerate partner.
struct BoundStateSymmetry {
  double overlap;   // |<v, reverse(v)>|
  bool invariant;   // overlap within 1e-8 of 1
};

inline BoundStateSymmetry classify_bound_state(const EdgeBasis& basis, const BoundState& b) {
  int n2 = static_cast<int>(b.vector.size());
  Vector rev(n2);
  for (int i = 0; i < n2; ++i) {
    int j = basis.reversed(i);
    if (j >= n2)
      throw ValidationError("bound state vector does not match the interior edge block");
    rev[j] = std::conj(b.vector[i]);
  }
  double overlap = std::abs(b.vector.dot(rev)) / b.vector.squaredNorm();
  return {overlap, std::abs(overlap - 1.0) < 1e-8};
}

}  // namespace qwalk
