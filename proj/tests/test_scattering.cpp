#include <catch2/catch_amalgamated.hpp>

#include <Eigen/SVD>
#include <cmath>
#include <complex>

#include "qwalk/models.hpp"
#include "qwalk/scattering.hpp"
#include "qwalk/walk.hpp"
#include "helpers.hpp"

using namespace qwalk;

TEST_CASE("interior block is the top-left corner of the walk and a contraction",
          "[scattering]") {
  TailedGraph g = diamond_graph(0.8);
  ScatteringProblem p = build_problem(g);
  StepOperator u = assemble(g, p.basis);

  REQUIRE(p.interior_edge_count() == 8);
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i)
      CHECK(std::abs(p.interior(i, j) - u.matrix().coeff(i, j)) == 0.0);

  Eigen::JacobiSVD<Matrix> svd(p.interior);
  CHECK(svd.singularValues().maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("injection column and direct terms match the walk matrix", "[scattering]") {
  TailedGraph g = diamond_graph(0.0);
  ScatteringProblem p = build_problem(g);
  const EdgeBasis& basis = *p.basis;

  CHECK(std::abs(p.injection[basis.index_of("0", "1A")] - cplx(2.0 / 3.0)) < 1e-15);
  CHECK(std::abs(p.injection[basis.index_of("0", "1B")] - cplx(2.0 / 3.0)) < 1e-15);
  CHECK(std::abs(p.direct_reflection - cplx(-1.0 / 3.0)) < 1e-15);
  CHECK(p.direct_transmission == cplx(0.0));

  ScatteringProblem pr = build_problem(g, Direction::Right);
  CHECK(std::abs(pr.injection[basis.index_of("2", "1A")] - cplx(2.0 / 3.0)) < 1e-15);
  CHECK(pr.direction == Direction::Right);
}

TEST_CASE("interferometer bound states", "[scattering]") {
  TailedGraph g = diamond_graph(0.0);
  ScatteringProblem p = build_problem(g);

  REQUIRE(p.bound.size() == 4);
  REQUIRE(p.deflated_dimension() == 4);

  SECTION("eigenvalues are the fourth roots of unity") {
    std::vector<cplx> expect = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
    for (const auto& want : expect) {
      int hits = 0;
      for (const auto& b : p.bound)
        if (std::abs(b.eigenvalue - want) < 1e-10) ++hits;
      CHECK(hits == 1);
    }
  }

  SECTION("orthonormal and fixed by the full walk") {
    StepOperator u = assemble(g, p.basis);
    for (std::size_t i = 0; i < p.bound.size(); ++i) {
      CHECK(std::abs(p.bound[i].vector.norm() - 1.0) < 1e-12);
      for (std::size_t j = i + 1; j < p.bound.size(); ++j)
        CHECK(std::abs(p.bound[i].vector.dot(p.bound[j].vector)) < 1e-12);
      WalkState s = embed_interior(p.basis, p.bound[i].vector);
      WalkState next = apply(u, s);
      CHECK((next.amplitudes - p.bound[i].eigenvalue * s.amplitudes).norm() < 1e-12);
    }
  }

  SECTION("span agrees with the antisymmetric arm combinations") {
    Matrix b(8, 4);
    for (int c = 0; c < 4; ++c) b.col(c) = p.bound[static_cast<std::size_t>(c)].vector;
    for (const Vector& v : diamond_bound_basis(*p.basis))
      CHECK((v - b * (b.adjoint() * v)).norm() < 1e-10);
  }

  SECTION("the walk cycles the antisymmetric combinations") {
    StepOperator u = assemble(g, p.basis);
    auto m = diamond_bound_basis(*p.basis);
    auto step = [&](const Vector& v) { return apply(u, embed_interior(p.basis, v)).amplitudes; };
    CHECK((step(m[0]) - embed_interior(p.basis, m[1]).amplitudes).norm() < 1e-15);
    CHECK((step(m[1]) - embed_interior(p.basis, m[3]).amplitudes).norm() < 1e-15);
    CHECK((step(m[3]) - embed_interior(p.basis, m[2]).amplitudes).norm() < 1e-15);
    CHECK((step(m[2]) - embed_interior(p.basis, m[0]).amplitudes).norm() < 1e-15);
  }
}

TEST_CASE("injected amplitude is orthogonal to every bound state", "[scattering]") {
  for (Direction dir : {Direction::Left, Direction::Right}) {
    ScatteringProblem p = build_problem(diamond_graph(0.0), dir);
    for (const auto& b : p.bound) CHECK(std::abs(b.vector.dot(p.injection)) < 1e-13);
  }
}

TEST_CASE("deflation removes exactly the bound directions", "[scattering]") {
  ScatteringProblem p = build_problem(diamond_graph(0.0));
  CHECK(test::unitary_defect(Matrix(p.deflation_basis.adjoint() * p.deflation_basis)) < 1e-12);
  for (const auto& b : p.bound)
    CHECK((p.deflation_basis.adjoint() * b.vector).cwiseAbs().maxCoeff() < 1e-12);
  // The deflated block has no unit-modulus spectrum left.
  Eigen::ComplexEigenSolver<Matrix> es(p.deflated, false);
  REQUIRE(es.info() == Eigen::Success);
  CHECK(es.eigenvalues().cwiseAbs().maxCoeff() < 1.0 - 1e-6);
}

TEST_CASE("interior modes either stay forever or leak", "[scattering]") {
  TailedGraph g = diamond_graph(0.0);
  ScatteringProblem p = build_problem(g);
  StepOperator u = assemble(g, p.basis);
  Eigen::ComplexEigenSolver<Matrix> es(p.interior);
  REQUIRE(es.info() == Eigen::Success);
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    cplx lambda = es.eigenvalues()[i];
    Vector v = es.eigenvectors().col(i);
    WalkState full = apply(u, embed_interior(p.basis, v));
    double leak = full.amplitudes.tail(full.amplitudes.size() - 8).squaredNorm();
    // Unitarity splits the step into interior part |lambda|^2 and leakage.
    CHECK(std::abs(leak - (1.0 - std::norm(lambda))) < 1e-12);
    if (std::abs(lambda) > 1.0 - 1e-8)
      CHECK(leak < 1e-12);       // on the circle: truly bound
    else
      CHECK(leak > 1e-8);        // inside: visible loss every step
  }
}

TEST_CASE("amplitudes vanish identically at z = 0", "[scattering]") {
  ScatteringProblem p = build_problem(diamond_graph(1.1));
  Amplitudes a = amplitudes_at(p, 0.0);
  CHECK(a.t == cplx(0.0));
  CHECK(a.r == cplx(0.0));
  CHECK(a.condition >= 1.0);
}

TEST_CASE("amplitudes conserve flux on the circle and shrink inside", "[scattering]") {
  ScatteringProblem p = build_problem(diamond_graph(1.1));
  for (int k = 0; k < 32; ++k) {
    Amplitudes a = amplitudes_at(p, test::circle_point(k, 32));
    CHECK(std::abs(std::norm(a.t) + std::norm(a.r) - 1.0) < 1e-13);
  }
  Amplitudes inside = amplitudes_at(p, cplx(0.3, 0.2));
  CHECK(std::norm(inside.t) + std::norm(inside.r) < 1.0);
  CHECK_THROWS_AS(amplitudes_at(p, cplx(1.1, 0.0)), ValidationError);
}

TEST_CASE("derivative of the amplitudes matches finite differences", "[scattering]") {
  ScatteringProblem p = build_problem(diamond_graph(0.4));
  cplx z = std::polar(0.9, 1.2);
  cplx h(1e-6, 0.0);
  AmplitudesDerivative a = amplitudes_and_derivative(p, z);
  Amplitudes ap = amplitudes_at(p, z + h);
  Amplitudes am = amplitudes_at(p, z - h);
  CHECK(std::abs(a.dt - (ap.t - am.t) / (2.0 * h)) < 1e-7);
  CHECK(std::abs(a.dr - (ap.r - am.r) / (2.0 * h)) < 1e-7);
  CHECK(std::abs(a.value.t - amplitudes_at(p, z).t) == 0.0);
}

TEST_CASE("transposed input reproduces the reversed transmission", "[scattering]") {
  TailedGraph g = diamond_graph(0.7);
  ScatteringProblem left = build_problem(g, Direction::Left);
  ScatteringProblem right = build_problem(g, Direction::Right);
  for (int k = 1; k < 7; ++k) {
    cplx z = test::circle_point(k, 7);
    CHECK(std::abs(reflected_transmission(left, std::conj(z)) -
                   std::conj(amplitudes_at(left, z).t)) < 1e-13);
    // Reversal-invariant walk: both injection directions transmit equally.
    CHECK(std::abs(amplitudes_at(left, z).t - amplitudes_at(right, z).t) < 1e-12);
  }
}

TEST_CASE("series coefficients of the interferometer", "[scattering]") {
  ScatteringProblem p = build_problem(diamond_graph(0.0));
  AmplitudeSeries series = taylor_coefficients(p, 12);

  CHECK(series.coefficients[0] == cplx(0.0));
  CHECK(std::abs(series.coefficients[3] - cplx(8.0 / 9.0)) < 1e-13);
  CHECK(std::abs(series.coefficients[7] - cplx(8.0 / 81.0)) < 1e-13);
  CHECK(std::abs(series.coefficients[11] - cplx(8.0 / 729.0)) < 1e-13);
  for (int n : {1, 2, 4, 5, 6, 8, 9, 10, 12})
    CHECK(std::abs(series.coefficients[static_cast<std::size_t>(n)]) < 1e-13);

  CHECK(series.n_max == 12);
  CHECK(series.sample_count == 512);
  CHECK(series.residual <= 1e-12);
  CHECK(static_cast<int>(series.t_samples.size()) == series.sample_count);
  CHECK_THROWS_AS(taylor_coefficients(p, 0), ValidationError);
}

TEST_CASE("a resonance hugging the circle is reported, not truncated", "[scattering]") {
  ScatteringProblem p = build_problem(diamond_graph(5e-3));
  CHECK_THROWS_AS(taylor_coefficients(p, 20), NumericsError);
  try {
    taylor_coefficients(p, 20);
  } catch (const NumericsError& e) {
    CHECK(std::string(e.what()).find("spectral radius") != std::string::npos);
  }
}

TEST_CASE("hitting statistics of the interferometer", "[scattering]") {
  ScatteringProblem p = build_problem(diamond_graph(0.0));
  HittingStats st = hitting_statistics(taylor_coefficients(p, 50));

  CHECK(std::abs(st.q[3] - 64.0 / 81.0) < 1e-13);
  CHECK(std::abs(st.q[7] - 64.0 / 6561.0) < 1e-13);
  CHECK(std::abs(st.p_out - 0.8) < 1e-10);
  REQUIRE(st.h.has_value());
  CHECK(std::abs(*st.h - 3.05) < 1e-10);
  CHECK(st.tail_bound < 1e-18);
  CHECK(st.tail_bound > 0.0);
  CHECK(std::abs(st.p_out_integral - 0.8) < 1e-11);
  CHECK(std::abs(st.p_out + st.tail_bound - st.p_out_integral) < 1e-10);
  REQUIRE(st.h_integral.has_value());
  CHECK(std::abs(*st.h_integral - 3.05) < 1e-9);
}

TEST_CASE("opposite-phase arms block transmission entirely", "[scattering]") {
  ScatteringProblem p = build_problem(diamond_graph(M_PI));
  for (int k = 0; k < 64; ++k) {
    Amplitudes a = amplitudes_at(p, test::circle_point(k, 64));
    CHECK(std::abs(a.t) < 1e-13);
    CHECK(std::abs(std::abs(a.r) - 1.0) < 1e-13);
  }
  HittingStats st = hitting_statistics(taylor_coefficients(p, 30));
  CHECK(st.p_out == 0.0);
  CHECK_FALSE(st.h.has_value());
  CHECK_FALSE(st.h_integral.has_value());
}

TEST_CASE("scattering matrix is unitary and symmetric for a reversible walk",
          "[scattering]") {
  TailedGraph g = diamond_graph(0.9);
  ScatteringProblem left = build_problem(g, Direction::Left);
  ScatteringProblem right = build_problem(g, Direction::Right);
  for (double theta : {0.0, 0.3, 2.1, 4.4}) {
    Eigen::Matrix2cd s = s_matrix(left, right, theta);
    CHECK((s.adjoint() * s - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(s(0, 1) - s(1, 0)) < 1e-12);
    Eigen::Matrix2cd s2 = s_matrix(g, theta);
    CHECK((s - s2).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK_THROWS_AS(s_matrix(left, left, 0.0), ValidationError);
}

TEST_CASE("generalized eigenstate satisfies the walk equation on the window",
          "[scattering]") {
  TailedGraph g = diamond_graph(1.3);
  ScatteringProblem p = build_problem(g);
  int window = 6;
  auto basis = truncate(g, window);
  StepOperator u = assemble(g, basis);
  for (cplx z : {std::polar(1.0, 0.77), std::polar(0.9, 2.5)}) {
    WalkState s = scattering_eigenstate(g, p, z, window);
    Vector resid = z * (u.matrix() * s.amplitudes) - s.amplitudes;
    double worst = 0.0;
    for (int i = 0; i < basis->size(); ++i)
      if (!basis->is_reflecting_end(basis->edge(i).from))  // truncation artifacts only
        worst = std::max(worst, std::abs(resid[i]));
    CHECK(worst < 1e-12);
    CHECK(std::abs(s.amplitude("@in1", "0") - cplx(1.0)) == 0.0);  // unit incoming wave
  }
  CHECK_THROWS_AS(scattering_eigenstate(g, p, cplx(0.0), window), ValidationError);
}

TEST_CASE("single pass-through vertex transmits with one step of delay", "[scattering]") {
  TailedGraph g;
  g.vertices.push_back({"only", VertexSpec::grover(2)});
  g.entry = "only";
  g.exit_label = "only";
  ScatteringProblem p = build_problem(g);
  CHECK(p.interior_edge_count() == 0);
  CHECK(p.bound.empty());
  for (int k = 0; k < 8; ++k) {
    cplx z = test::circle_point(k, 8);
    Amplitudes a = amplitudes_at(p, z);
    CHECK(std::abs(a.t - z) < 1e-15);
    CHECK(std::abs(a.r) < 1e-15);
  }
  AmplitudeSeries series = taylor_coefficients(p, 5);
  CHECK(std::abs(series.coefficients[1] - cplx(1.0)) < 1e-14);
  HittingStats st = hitting_statistics(series);
  CHECK(std::abs(st.p_out - 1.0) < 1e-12);
  CHECK(std::abs(*st.h - 1.0) < 1e-12);
}

TEST_CASE("embedding rejects oversized vectors", "[scattering]") {
  ScatteringProblem p = build_problem(diamond_graph(0.0));
  CHECK_THROWS_AS(embed_interior(p.basis, Vector::Zero(100)), ValidationError);
}
