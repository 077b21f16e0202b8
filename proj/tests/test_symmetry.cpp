#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qwalk/models.hpp"
#include "qwalk/symmetry.hpp"

using namespace qwalk;

namespace {

WalkState random_state(std::shared_ptr<const EdgeBasis> basis, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  WalkState psi = WalkState::zero(std::move(basis));
  for (int i = 0; i < psi.basis->size(); ++i) psi.amplitudes[i] = cplx(gauss(rng), gauss(rng));
  psi.amplitudes /= psi.norm();
  return psi;
}

TailedGraph lopsided_graph() {
  // A two-port with complex transmission scatters differently forward and
  // backward: its block is not symmetric.
  TailedGraph g;
  g.vertices.push_back({"a", VertexSpec::free_vertex()});
  g.vertices.push_back({"b", VertexSpec::two_port(std::polar(std::sqrt(0.5), M_PI / 2.0),
                                                  std::sqrt(0.5))});
  g.edges.push_back({"a", "b"});
  g.entry = "a";
  g.exit_label = "b";
  return g;
}

}  // namespace

TEST_CASE("edge reversal is antiunitary and involutive", "[symmetry]") {
  auto basis = truncate(diamond_graph(0.4), 2);
  WalkState psi = random_state(basis, 3);
  WalkState twice = time_reverse(time_reverse(psi));
  CHECK((twice.amplitudes - psi.amplitudes).norm() == 0.0);
  CHECK(std::abs(time_reverse(psi).norm() - psi.norm()) < 1e-15);

  WalkState scaled = psi;
  scaled.amplitudes *= cplx(0.0, 1.0);
  CHECK((time_reverse(scaled).amplitudes + cplx(0.0, 1.0) * time_reverse(psi).amplitudes)
            .norm() < 1e-15);

  WalkState e = WalkState::basis_state(basis, "0", "1A");
  CHECK(time_reverse(e).amplitude("1A", "0") == cplx(1.0));
}

TEST_CASE("reversing, stepping, reversing undoes a step", "[symmetry]") {
  TailedGraph g = diamond_graph(0.8);
  g.edges[0].phase_a = 1.9;  // edge phases fold symmetrically
  StepOperator u = assemble(g, truncate(g, 3));
  REQUIRE(check_invariance(u).invariant);
  WalkState psi = random_state(u.basis_ptr(), 17);
  WalkState back = time_reverse(apply(u, time_reverse(apply(u, psi))));
  CHECK((back.amplitudes - psi.amplitudes).norm() < 1e-13);
}

TEST_CASE("blockwise invariance verdicts", "[symmetry]") {
  SECTION("equal-transmission graphs with random phases are invariant") {
    std::mt19937_64 rng(29);
    for (int i = 0; i < 10; ++i) {
      TailedGraph g = random_grover_graph(rng);
      TimeReversalReport rep = check_invariance(assemble(g, truncate(g, 1)));
      CHECK(rep.invariant);
      CHECK(rep.worst_violation < 1e-14);
    }
  }
  SECTION("real two-port line is invariant") {
    TailedGraph g = line_graph(std::sqrt(0.5), std::sqrt(0.5), 5);
    CHECK(check_invariance(assemble(g, truncate(g, 1))).invariant);
  }
  SECTION("complex transmission breaks the symmetry with a named witness") {
    TailedGraph g = lopsided_graph();
    TimeReversalReport rep = check_invariance(assemble(g, truncate(g, 1)));
    CHECK_FALSE(rep.invariant);
    CHECK(std::abs(rep.worst_violation - std::sqrt(2.0)) < 1e-12);  // |t - conj(t)|, t = i/sqrt(2)
    CHECK(rep.vertex == "b");
    CHECK(((rep.neighbor_a == "a") != (rep.neighbor_b == "a")));
  }
}

TEST_CASE("transmission symmetry holds whenever the blocks are symmetric", "[symmetry]") {
  TailedGraph g = diamond_graph(2.2);
  TransmissionSymmetry sym = verify_transmission_symmetry(g, 48);
  CHECK(sym.samples == 48);
  CHECK(sym.max_t_diff < 1e-12);
  CHECK(sym.max_return_defect < 1e-12);
  CHECK(sym.max_cross_defect < 1e-12);

  CHECK_THROWS_AS(verify_transmission_symmetry(lopsided_graph()), ValidationError);
  CHECK_THROWS_AS(verify_transmission_symmetry(g, 0), ValidationError);
}

TEST_CASE("bound states map onto their own eigenspace under reversal", "[symmetry]") {
  ScatteringProblem p = build_problem(diamond_graph(0.0));
  REQUIRE(p.bound.size() == 4);
  for (const auto& b : p.bound) {
    BoundStateSymmetry sym = classify_bound_state(*p.basis, b);
    CHECK(sym.invariant);  // all four eigenspaces here are one dimensional
    CHECK(std::abs(sym.overlap - 1.0) < 1e-10);
  }
  BoundState bad{cplx(1.0), Vector::Ones(11).eval()};
  CHECK_THROWS_AS(classify_bound_state(*truncate(diamond_graph(0.0), 1), bad), ValidationError);
}
