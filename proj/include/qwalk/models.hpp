#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/edge_basis.hpp"
#include "qwalk/graph.hpp"
#include "qwalk/scattering.hpp"
#include "qwalk/types.hpp"

namespace qwalk {

/// Two-path interferometer: entry vertex 0 splits onto arms 1A and 1B which
/// rejoin at the exit vertex 2.  The 1B arm multiplies passing amplitudes by
/// exp(i phi); phi = 0 gives the plain equal-arm interferometer.
inline TailedGraph diamond_graph(double phi) {
  TailedGraph g;
  g.vertices.push_back({"0", VertexSpec::grover(3)});
  g.vertices.push_back({"1A", VertexSpec::free_vertex()});
  g.vertices.push_back({"1B", VertexSpec::phased(phi, VertexSpec::free_vertex())});
  g.vertices.push_back({"2", VertexSpec::grover(3)});
  g.edges.push_back({"0", "1A"});
  g.edges.push_back({"0", "1B"});
  g.edges.push_back({"1A", "2"});
  g.edges.push_back({"1B", "2"});
  g.entry = "0";
  g.exit_label = "2";
  return g;
}

namespace detail {

/// Evaluates n(z)/d(z) where both polynomials may share a simple zero
/// (a removable point); falls back to the derivative quotient there.
struct RationalValue {
  cplx numerator;
  cplx denominator;
  cplx d_numerator;
  cplx d_denominator;
};

inline cplx evaluate_rational(const RationalValue& v, double scale) {
  if (std::abs(v.denominator) > 1e-9 * scale) return v.numerator / v.denominator;
  if (std::abs(v.numerator) > 1e-5 * scale)
    throw NumericsError("transmission has a pole at the requested point");
  if (std::abs(v.d_denominator) <= 1e-9 * scale)
    throw NumericsError("transmission is degenerate at the requested point");
  return v.d_numerator / v.d_denominator;
}

}  // namespace detail

/// Closed-form transmission amplitude of the diamond, valid on the closed
/// unit disk.  At phi = 0 it reduces to 8 z^3 / (9 - z^4); the shared zeros
/// of numerator and denominator at z^4 = 1 are removable and handled by the
/// derivative fallback.
inline cplx diamond_transmission(cplx z, double phi) {
  cplx e = std::polar(1.0, -phi);
  cplx one_e = 1.0 + e;
  if (std::abs(one_e) < 1e-15) return 0.0;  // opposite-phase arms cancel exactly
  cplx z2 = z * z;
  cplx z3 = z2 * z;
  cplx z4 = z2 * z2;
  detail::RationalValue v;
  v.numerator = 4.0 * z3 * one_e * (z4 - e);
  v.denominator = z4 * one_e * one_e - (3.0 * e - z4) * (3.0 * e - z4);
  v.d_numerator = 4.0 * one_e * (7.0 * z3 * z3 - 3.0 * e * z2);
  v.d_denominator = 4.0 * z3 * one_e * one_e + 8.0 * z3 * (3.0 * e - z4);
  double scale = 1.0 + std::norm(3.0 * e - z4);
  return detail::evaluate_rational(v, scale);
}

/// Closed-form reflection amplitude of the diamond on the closed unit disk.
/// Shares its denominator (and removable points) with the transmission.
inline cplx diamond_reflection(cplx z, double phi) {
  cplx e = std::polar(1.0, -phi);
  cplx one_e = 1.0 + e;
  cplx z2 = z * z;
  cplx z3 = z2 * z;
  cplx z4 = z2 * z2;
  detail::RationalValue v;
  cplx a = 3.0 * e - z4;
  cplx b = e - 3.0 * z4;
  v.numerator = z * (z4 * one_e * one_e + a * b);
  v.denominator = z4 * one_e * one_e - a * a;
  v.d_numerator = (z4 * one_e * one_e + a * b) +
                  z * (4.0 * z3 * one_e * one_e - 4.0 * z3 * b - 12.0 * z3 * a);
  v.d_denominator = 4.0 * z3 * one_e * one_e + 8.0 * z3 * a;
  double scale = 1.0 + std::norm(a);
  return detail::evaluate_rational(v, scale);
}

/// Label of the i-th vertex of a line graph, zero padded so that the
/// lexicographic order of labels equals the spatial order.
inline std::string line_label(int index, int n_vertices) {
  std::string digits = std::to_string(n_vertices - 1);
  std::string s = std::to_string(index);
  return "v" + std::string(digits.size() - s.size(), '0') + s;
}

/// Position of a line vertex relative to the middle vertex.
inline int line_position(const std::string& label, int n_vertices) {
  return std::stoi(label.substr(1)) - (n_vertices - 1) / 2;
}

/// Line of n identical two-port vertices with tails on both ends.  Every
/// vertex presents its transmission row to its left neighbour (labels are
/// zero padded, so the scattering order is the spatial order, and the
/// incoming tail sorts before any vertex label).
inline TailedGraph line_graph(cplx t, cplx r, int n_vertices) {
  if (n_vertices < 1) throw ValidationError("line needs at least one vertex");
  TailedGraph g;
  for (int i = 0; i < n_vertices; ++i)
    g.vertices.push_back({line_label(i, n_vertices), VertexSpec::two_port(t, r)});
  for (int i = 0; i + 1 < n_vertices; ++i)
    g.edges.push_back({line_label(i, n_vertices), line_label(i + 1, n_vertices)});
  g.entry = line_label(0, n_vertices);
  g.exit_label = line_label(n_vertices - 1, n_vertices);
  return g;
}

/// The four interior states spanning the bound space of the phi = 0 diamond:
/// antisymmetric combinations of the two arms, one per leg orientation.
/// The step operator cycles them, so the spanned space is invariant.
inline std::vector<Vector> diamond_bound_basis(const EdgeBasis& basis) {
  int n2 = basis.interior_edge_count();
  double s = 1.0 / std::sqrt(2.0);
  auto pair_state = [&](const std::string& a1, const std::string& b1, const std::string& a2,
                        const std::string& b2) {
    Vector v = Vector::Zero(n2);
    v[basis.index_of(a1, b1)] = s;
    v[basis.index_of(a2, b2)] = -s;
    return v;
  };
  return {pair_state("0", "1A", "0", "1B"), pair_state("1A", "2", "1B", "2"),
          pair_state("1B", "0", "1A", "0"), pair_state("2", "1B", "2", "1A")};
}

/// Random connected graph of equal-transmission vertices with random edge
/// phases; entry and exit are random (possibly equal).  Drawing from the
/// same generator state always yields the same graph.
inline TailedGraph random_grover_graph(std::mt19937_64& rng, int max_vertices = 10) {
  if (max_vertices < 1) throw ValidationError("corpus graphs need at least one vertex");
  int nv = std::uniform_int_distribution<int>(1, max_vertices)(rng);
  TailedGraph g;
  auto label = [&](int i) {
    std::string s = std::to_string(i);
    return "g" + std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
  };
  for (int i = 1; i < nv; ++i) {
    int parent = std::uniform_int_distribution<int>(0, i - 1)(rng);
    g.edges.push_back({label(parent), label(i)});
  }
  std::vector<std::pair<int, int>> spare;
  for (int i = 0; i < nv; ++i)
    for (int j = i + 1; j < nv; ++j) spare.emplace_back(i, j);
  std::erase_if(spare, [&](const std::pair<int, int>& e) {
    for (const auto& t : g.edges)
      if (t.a == label(e.first) && t.b == label(e.second)) return true;
    return false;
  });
  std::shuffle(spare.begin(), spare.end(), rng);
  int extra = std::uniform_int_distribution<int>(0, std::min<int>(nv, static_cast<int>(spare.size())))(rng);
  for (int k = 0; k < extra; ++k)
    g.edges.push_back({label(spare[static_cast<std::size_t>(k)].first),
                       label(spare[static_cast<std::size_t>(k)].second)});

  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::bernoulli_distribution coin(0.5);
  for (auto& e : g.edges) {
    if (coin(rng)) e.phase_a = angle(rng);
    if (coin(rng)) e.phase_b = angle(rng);
  }

  g.entry = label(std::uniform_int_distribution<int>(0, nv - 1)(rng));
  g.exit_label = label(std::uniform_int_distribution<int>(0, nv - 1)(rng));
  for (int i = 0; i < nv; ++i) g.vertices.push_back({label(i), VertexSpec{}});
  for (auto& v : g.vertices) v.spec = VertexSpec::grover(g.degree_with_tails(v.label));
  return g;
}

/// Modulus of the slowest-decaying interior mode after deflation.  1 minus
/// this is the per-step leakage rate of the stickiest resonance; it controls
/// how many circle samples the coefficient extraction needs.
inline double interior_decay_radius(const TailedGraph& g) {
  ScatteringProblem p = build_problem(g);
  if (p.deflated_dimension() == 0) return 0.0;
  Eigen::ComplexEigenSolver<Matrix> es(p.deflated, false);
  if (es.info() != Eigen::Success)
    throw NumericsError("eigensolver failed on the deflated interior block");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Deterministic corpus of random graphs for scattering regression tests.
/// Graphs whose slowest interior mode decays too slowly are rejected: with
/// radius <= max_radius the fixed sampling budget of taylor_coefficients
/// resolves every coefficient below its 1e-12 threshold, so the corpus
/// exercises generic graphs without tripping the (separately tested)
/// near-resonance failure path.
inline std::vector<TailedGraph> random_corpus(std::uint64_t seed, int count,
                                              double max_radius = 0.985) {
  std::mt19937_64 rng(seed);
  std::vector<TailedGraph> corpus;
  int attempts = 0;
  while (static_cast<int>(corpus.size()) < count) {
    if (++attempts > 200 * count + 200)
      throw NumericsError("corpus sampling rejected too many graphs");
    TailedGraph g = random_grover_graph(rng, 12);
    if (interior_decay_radius(g) <= max_radius) corpus.push_back(std::move(g));
  }
  return corpus;
}

}  // namespace qwalk
