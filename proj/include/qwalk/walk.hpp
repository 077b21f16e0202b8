#pragma once

#include <deque>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/step_operator.hpp"
#include "qwalk/types.hpp"

namespace qwalk {

/// Number of steps the state can take before any amplitude can reach an edge
/// pointing at a reflecting tail end.  Up to (and including) that many steps
/// the truncated walk agrees with the infinite-tail walk exactly.
inline int light_cone_steps(const StepOperator& u, const WalkState& psi) {
  const EdgeBasis& basis = u.basis();
  std::vector<int> dist(static_cast<std::size_t>(basis.size()), -1);
  std::deque<int> queue;
  for (int i = 0; i < basis.size(); ++i)
    if (psi.amplitudes[i] != cplx(0.0)) {
      dist[static_cast<std::size_t>(i)] = 0;
      queue.push_back(i);
    }
  int horizon = std::numeric_limits<int>::max();
  while (!queue.empty()) {
    int e = queue.front();
    queue.pop_front();
    int d = dist[static_cast<std::size_t>(e)];
    if (basis.is_reflecting_end(basis.edge(e).to)) {
      horizon = d;
      break;  // BFS order: first hit is the minimum
    }
    for (int next : basis.out_edges(basis.edge(e).to))
      if (dist[static_cast<std::size_t>(next)] < 0) {
        dist[static_cast<std::size_t>(next)] = d + 1;
        queue.push_back(next);
      }
  }
  return horizon;
}

namespace detail {
inline void require_window(const StepOperator& u, const WalkState& psi, int steps) {
  int horizon = light_cone_steps(u, psi);
  if (steps > horizon)
    throw ValidationError("truncation window too small: " + std::to_string(steps) +
                          " steps requested but amplitude can reach the reflecting tail end "
                          "after " +
                          std::to_string(horizon));
}
}  // namespace detail

/// Applies the step operator n times.  Refuses runs that would let the walk
/// feel the truncated tail ends.
inline WalkState evolve(const StepOperator& u, WalkState psi, int steps) {
  if (steps < 0) throw ValidationError("step count must be >= 0");
  detail::require_window(u, psi, steps);
  for (int n = 0; n < steps; ++n) psi = apply(u, psi);
  return psi;
}

/// One record of a monitored walk.  q_arrive is the probability that the
/// walk is detected on a monitored edge exactly at step n; p_survive is the
/// probability that it has escaped detection through step n.
struct MonitorRecord {
  int step;
  double p_survive;
  double q_arrive;
  WalkState state;  // conditioned on no detection, renormalized (zero once extinct)
};

/// Undirected edge named by its endpoints, used to select monitored edges.
struct EdgeRef {
  std::string a;
  std::string b;
};

/// Runs the walk with a projective detector on the monitored edges (both
/// orientations): each step applies U, records the detected weight, removes
/// it, and continues with the surviving component.
inline std::vector<MonitorRecord> monitored_walk(const StepOperator& u, const WalkState& psi0,
                                                 const std::vector<EdgeRef>& monitored,
                                                 int n_max) {
  if (n_max < 1) throw ValidationError("monitored walk needs n_max >= 1");
  if (monitored.empty()) throw ValidationError("monitored walk needs at least one edge");
  const EdgeBasis& basis = u.basis();
  std::vector<int> detector;
  for (const auto& e : monitored) {
    int fwd = basis.index_of(e.a, e.b);
    if (fwd < 0)
      throw ValidationError("monitored edge {" + e.a + ", " + e.b + "} is not in the basis");
    detector.push_back(fwd);
    detector.push_back(basis.reversed(fwd));
  }
  detail::require_window(u, psi0, n_max);

  std::vector<MonitorRecord> records;
  records.reserve(static_cast<std::size_t>(n_max));
  WalkState survivor = psi0;
  bool extinct = false;
  for (int n = 1; n <= n_max; ++n) {
    if (extinct) {
      MonitorRecord rec = records.back();
      rec.step = n;
      rec.q_arrive = 0.0;
      records.push_back(std::move(rec));
      continue;
    }
    WalkState next = apply(u, survivor);
    double q = 0.0;
    for (int i : detector) {
      q += std::norm(next.amplitudes[i]);
      next.amplitudes[i] = 0.0;
    }
    double p = next.amplitudes.squaredNorm();
    survivor = std::move(next);
    MonitorRecord rec{n, p, q, survivor};
    if (p >= 1e-300)
      rec.state.amplitudes /= std::sqrt(p);
    else
      extinct = true;
    records.push_back(std::move(rec));
  }
  return records;
}

/// First-arrival probabilities q(n) = |<to_edge| U^n |psi0>|^2 for an edge on
/// the outgoing tail, n = 1..n_max.  Valid because an edge pointing outward
/// on a tail is reached at most once: monitoring it does not disturb the
/// walk, so the plain matrix element already is the first-arrival amplitude.
inline std::vector<double> first_arrival_direct(const StepOperator& u, const WalkState& psi0,
                                                const EdgeRef& exit_edge, int n_max) {
  if (n_max < 1) throw ValidationError("first arrival needs n_max >= 1");
  const EdgeBasis& basis = u.basis();
  int idx = basis.index_of(exit_edge.a, exit_edge.b);
  if (idx < 0)
    throw ValidationError("exit edge {" + exit_edge.a + ", " + exit_edge.b +
                          "} is not in the basis");
  const OrientedEdge& e = basis.edge(idx);
  bool outward = basis.role(e.to) == VertexRole::RightTail &&
                 basis.tail_distance(e.to) == basis.tail_distance(e.from) + 1 &&
                 (basis.role(e.from) == VertexRole::RightTail || e.from == basis.exit_id());
  if (!outward)
    throw ValidationError("first-arrival edge must point outward along the outgoing tail");
  detail::require_window(u, psi0, n_max);

  std::vector<double> q;
  q.reserve(static_cast<std::size_t>(n_max));
  WalkState psi = psi0;
  for (int n = 1; n <= n_max; ++n) {
    psi = apply(u, psi);
    q.push_back(std::norm(psi.amplitudes[idx]));
  }
  return q;
}

/// Probability on one undirected edge (both orientations combined).
struct EdgeProbability {
  std::string a;
  std::string b;
  double probability;
};

/// Per-edge probability distribution, in basis order of the first
/// orientation of each edge.  Sums to the squared norm of the state.
inline std::vector<EdgeProbability> distribution(const WalkState& psi) {
  const EdgeBasis& basis = *psi.basis;
  std::vector<EdgeProbability> dist;
  for (int i = 0; i < basis.size(); ++i) {
    if (basis.reversed(i) < i) continue;  // second orientation, already counted
    double p = std::norm(psi.amplitudes[i]) + std::norm(psi.amplitudes[basis.reversed(i)]);
    dist.push_back({basis.label(basis.edge(i).from), basis.label(basis.edge(i).to), p});
  }
  return dist;
}

}  // namespace qwalk
