#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "qwalk/step_operator.hpp"
#include "qwalk/types.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

enum class Direction { Left, Right };

/// Eigenvector of the interior block with unit-modulus eigenvalue.  Such a
/// state is supported on the interior edges only and is invariant under the
/// full walk: amplitude caught in it never leaves through a tail.
struct BoundState {
  cplx eigenvalue;
  Vector vector;  // over the interior edge indices, unit norm
};

/// Everything needed to evaluate scattering amplitudes of one graph for one
/// injection direction.  The interior block G is the restriction of the step
/// operator to the span of the interior edges; w is the interior column fed
/// by the incoming tail edge.  The resolvent is evaluated on the deflated
/// subspace (orthogonal complement of the bound states), where I - z G1 is
/// invertible through |z| = 1.
struct ScatteringProblem {
  Direction direction = Direction::Left;
  std::shared_ptr<const EdgeBasis> basis;  // tail_length 1
  Matrix interior;                         // G, 2N x 2N
  Vector injection;                        // w = P_G U |incoming edge>
  cplx direct_reflection{0.0};             // same-side outgoing matrix element of U
  cplx direct_transmission{0.0};           // far-side outgoing matrix element of U
  Eigen::RowVectorXcd row_reflection;      // same-side outgoing row of U over interior columns
  Eigen::RowVectorXcd row_transmission;    // far-side outgoing row of U over interior columns
  std::vector<BoundState> bound;           // orthonormal within each eigenvalue cluster
  Matrix deflation_basis;                  // Q, 2N x d, orthonormal, range orthogonal to bound
  Matrix deflated;                         // G1 = Q* G Q, d x d

  int interior_edge_count() const { return static_cast<int>(interior.rows()); }
  int deflated_dimension() const { return static_cast<int>(deflated.rows()); }
};

namespace detail {

/// Groups eigenvalues on the unit circle into clusters of radius tol and
/// orthonormalizes the eigenvectors within each cluster.
inline std::vector<BoundState> extract_bound_states(const Matrix& g, double tol) {
  std::vector<BoundState> bound;
  if (g.rows() == 0) return bound;
  Eigen::ComplexEigenSolver<Matrix> es(g);
  if (es.info() != Eigen::Success)
    throw NumericsError("eigensolver failed on the interior block");

  std::vector<int> on_circle;
  for (int i = 0; i < g.rows(); ++i)
    if (std::abs(std::abs(es.eigenvalues()[i]) - 1.0) < tol) on_circle.push_back(i);
  if (on_circle.empty()) return bound;

  std::sort(on_circle.begin(), on_circle.end(), [&](int a, int b) {
    cplx la = es.eigenvalues()[a], lb = es.eigenvalues()[b];
    double aa = std::arg(la), ab = std::arg(lb);
    if (aa < 0) aa += 2 * M_PI;
    if (ab < 0) ab += 2 * M_PI;
    return aa < ab;
  });

  std::size_t i = 0;
  while (i < on_circle.size()) {
    std::size_t j = i + 1;
    while (j < on_circle.size() &&
           std::abs(es.eigenvalues()[on_circle[j]] - es.eigenvalues()[on_circle[j - 1]]) < tol)
      ++j;
    Matrix cluster(g.rows(), static_cast<Eigen::Index>(j - i));
    cplx mean = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      cluster.col(static_cast<Eigen::Index>(k - i)) = es.eigenvectors().col(on_circle[k]);
      mean += es.eigenvalues()[on_circle[k]];
    }
    mean /= static_cast<double>(j - i);
    Eigen::HouseholderQR<Matrix> qr(cluster);
    Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), cluster.cols());
    for (Eigen::Index c = 0; c < q.cols(); ++c) bound.push_back({mean, q.col(c)});
    i = j;
  }
  return bound;
}

inline Eigen::RowVectorXcd sparse_row_head(const SparseMatrix& m, int row, int cols) {
  Eigen::RowVectorXcd out = Eigen::RowVectorXcd::Zero(cols);
  for (int j = 0; j < cols; ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it)
      if (it.row() == row) out[j] = it.value();
  return out;
}

}  // namespace detail

/// Builds the scattering data of a graph for amplitude injected along the
/// incoming tail (Left) or, for the reverse problem, along the outgoing tail
/// (Right).  The tails beyond the first segment play no role: the first 2N
/// basis indices of a tail_length-1 truncation are exactly the interior
/// edges, and one extra segment per side exposes the in/out channels.
inline ScatteringProblem build_problem(const TailedGraph& g,
                                       Direction dir = Direction::Left) {
  ScatteringProblem p;
  p.direction = dir;
  p.basis = truncate(g, 1);
  StepOperator u = assemble(g, p.basis);
  const EdgeBasis& basis = *p.basis;
  int n2 = basis.interior_edge_count();

  int in_left = basis.index_of("@in1", g.entry);
  int out_left = basis.reversed(in_left);
  int in_right = basis.index_of("@out1", g.exit_label);
  int out_right = basis.reversed(in_right);
  int inject = (dir == Direction::Left) ? in_left : in_right;
  int same_out = (dir == Direction::Left) ? out_left : out_right;
  int far_out = (dir == Direction::Left) ? out_right : out_left;

  p.interior = Matrix::Zero(n2, n2);
  for (int j = 0; j < n2; ++j)
    for (SparseMatrix::InnerIterator it(u.matrix(), j); it; ++it)
      if (it.row() < n2) p.interior(it.row(), j) = it.value();

  p.injection = Vector::Zero(n2);
  for (SparseMatrix::InnerIterator it(u.matrix(), inject); it; ++it) {
    if (it.row() < n2) p.injection[it.row()] = it.value();
    if (it.row() == same_out) p.direct_reflection = it.value();
    if (it.row() == far_out) p.direct_transmission = it.value();
  }
  p.row_reflection = detail::sparse_row_head(u.matrix(), same_out, n2);
  p.row_transmission = detail::sparse_row_head(u.matrix(), far_out, n2);

  p.bound = detail::extract_bound_states(p.interior, 1e-8);
  int k = static_cast<int>(p.bound.size());
  if (k == 0) {
    p.deflation_basis = Matrix::Identity(n2, n2);
    p.deflated = p.interior;
  } else {
    Matrix b(n2, k);
    for (int c = 0; c < k; ++c) b.col(c) = p.bound[static_cast<std::size_t>(c)].vector;
    Eigen::HouseholderQR<Matrix> qr(b);
    Matrix q = qr.householderQ() * Matrix::Identity(n2, n2);
    p.deflation_basis = q.rightCols(n2 - k);
    p.deflated = p.deflation_basis.adjoint() * p.interior * p.deflation_basis;
  }
  return p;
}

inline const std::vector<BoundState>& find_bound_states(const ScatteringProblem& p) {
  return p.bound;
}

/// Zero-pads an interior-edge vector to a full walk state on the basis.
inline WalkState embed_interior(std::shared_ptr<const EdgeBasis> basis, const Vector& interior) {
  if (interior.size() > basis->size())
    throw ValidationError("interior vector larger than the basis");
  WalkState s = WalkState::zero(std::move(basis));
  s.amplitudes.head(interior.size()) = interior;
  return s;
}

/// Transmission and reflection amplitudes at one point of the closed unit
/// disk, with the interior response vector and the condition estimate of the
/// resolvent solve.
struct Amplitudes {
  cplx t;
  cplx r;
  Vector psi;        // interior response, orthogonal to the bound space
  double condition;  // estimated condition number of I - z G1
};

namespace detail {

struct ResolventSolve {
  Vector x;   // (I - z G1)^-1 z w1
  Vector dx;  // derivative of x in z
  double condition;
};

inline ResolventSolve solve_resolvent(const ScatteringProblem& p, cplx z) {
  ResolventSolve s;
  int d = p.deflated_dimension();
  if (d == 0) {
    s.x = Vector();
    s.dx = Vector();
    s.condition = 1.0;
    return s;
  }
  Vector w1 = p.deflation_basis.adjoint() * p.injection;
  Matrix m = Matrix::Identity(d, d) - z * p.deflated;
  Eigen::PartialPivLU<Matrix> lu(m);
  double rc = lu.rcond();
  if (!(rc > 1e-14))
    throw NumericsError("resolvent solve is ill-conditioned at z = (" +
                        std::to_string(z.real()) + ", " + std::to_string(z.imag()) +
                        "): reciprocal condition " + std::to_string(rc));
  s.x = lu.solve(z * w1);
  s.dx = lu.solve(w1 + p.deflated * s.x);
  s.condition = 1.0 / rc;
  if (!s.x.allFinite() || !s.dx.allFinite())
    throw NumericsError("resolvent solve produced non-finite values");
  return s;
}

}  // namespace detail

inline Amplitudes amplitudes_at(const ScatteringProblem& p, cplx z) {
  if (std::abs(z) > 1.0 + 1e-12)
    throw ValidationError("amplitudes are defined on the closed unit disk only");
  detail::ResolventSolve s = detail::solve_resolvent(p, z);
  Amplitudes a;
  a.psi = p.deflation_basis * s.x;
  a.t = z * (p.direct_transmission + (p.row_transmission * a.psi)(0));
  a.r = z * (p.direct_reflection + (p.row_reflection * a.psi)(0));
  a.condition = s.condition;
  return a;
}

/// Amplitudes together with their z-derivatives (used by the spectral route
/// to the mean hitting time).
struct AmplitudesDerivative {
  Amplitudes value;
  cplx dt;
  cplx dr;
};

inline AmplitudesDerivative amplitudes_and_derivative(const ScatteringProblem& p, cplx z) {
  if (std::abs(z) > 1.0 + 1e-12)
    throw ValidationError("amplitudes are defined on the closed unit disk only");
  detail::ResolventSolve s = detail::solve_resolvent(p, z);
  AmplitudesDerivative a;
  a.value.psi = p.deflation_basis * s.x;
  Vector dpsi = p.deflation_basis * s.dx;
  cplx yt_psi = (p.row_transmission * a.value.psi)(0);
  cplx yr_psi = (p.row_reflection * a.value.psi)(0);
  a.value.t = z * (p.direct_transmission + yt_psi);
  a.value.r = z * (p.direct_reflection + yr_psi);
  a.value.condition = s.condition;
  a.dt = (p.direct_transmission + yt_psi) + z * (p.row_transmission * dpsi)(0);
  a.dr = (p.direct_reflection + yr_psi) + z * (p.row_reflection * dpsi)(0);
  return a;
}

/// Transmission of the reversed-input problem, derived from the forward one:
/// t_R(z) = conj(t(conj z)).  On the unit circle t_R(1/z) = conj(t(z)).
inline cplx reflected_transmission(const ScatteringProblem& p, cplx z) {
  return std::conj(amplitudes_at(p, std::conj(z)).t);
}

/// Taylor data of t(z) at the origin: coefficients c_0..c_n_max plus the
/// unit-circle samples they were extracted from.  c_n is the amplitude for
/// the walk to first reach the far outgoing channel exactly at step n, so
/// c_0 = 0 always; the extraction works on t(z)/z, which makes that exact.
struct AmplitudeSeries {
  int n_max = 0;
  int sample_count = 0;     // final number of unit-circle samples
  double residual = 0.0;    // max coefficient change in the last doubling
  std::vector<cplx> coefficients;  // size n_max + 1
  std::vector<cplx> t_samples;     // t at exp(2 pi i k / sample_count)
  std::vector<cplx> r_samples;
  std::vector<cplx> dt_samples;
};

namespace detail {

inline std::vector<cplx> coefficients_from_samples(const std::vector<cplx>& t_samples,
                                                   int n_max) {
  int m = static_cast<int>(t_samples.size());
  std::vector<cplx> c(static_cast<std::size_t>(n_max) + 1, cplx(0.0));
  for (int n = 1; n <= n_max; ++n) {
    cplx sum = 0.0;
    for (int k = 0; k < m; ++k) {
      // g(z) = t(z)/z sampled at z_k, times z_k^-(n-1)
      double ang = -2.0 * M_PI * static_cast<double>(k) * static_cast<double>(n) / m;
      sum += t_samples[static_cast<std::size_t>(k)] * std::polar(1.0, ang);
    }
    c[static_cast<std::size_t>(n)] = sum / static_cast<double>(m);
  }
  return c;
}

}  // namespace detail

/// Extracts c_0..c_n_max by sampling t on the unit circle and reading off
/// Fourier coefficients.  The sample count starts at max(4 n_max, 256) and
/// doubles (reusing existing samples) until the coefficients move by less
/// than 1e-12, up to four doublings.  Non-convergence means t(z) has
/// structure on a scale the window cannot resolve (a resonance just outside
/// the unit circle); that is reported, never silently truncated.
inline AmplitudeSeries taylor_coefficients(const ScatteringProblem& p, int n_max) {
  if (n_max < 1) throw ValidationError("coefficient extraction needs n_max >= 1");
  AmplitudeSeries series;
  series.n_max = n_max;

  int m = std::max(4 * n_max, 256);
  std::vector<cplx> t_s(static_cast<std::size_t>(m));
  std::vector<cplx> r_s(static_cast<std::size_t>(m));
  std::vector<cplx> dt_s(static_cast<std::size_t>(m));
  auto sample = [&](int k, int count, std::vector<cplx>& t_v, std::vector<cplx>& r_v,
                    std::vector<cplx>& dt_v) {
    cplx z = std::polar(1.0, 2.0 * M_PI * static_cast<double>(k) / count);
    AmplitudesDerivative a = amplitudes_and_derivative(p, z);
    t_v[static_cast<std::size_t>(k)] = a.value.t;
    r_v[static_cast<std::size_t>(k)] = a.value.r;
    dt_v[static_cast<std::size_t>(k)] = a.dt;
  };
  for (int k = 0; k < m; ++k) sample(k, m, t_s, r_s, dt_s);
  std::vector<cplx> prev = detail::coefficients_from_samples(t_s, n_max);

  for (int doubling = 0; doubling < 4; ++doubling) {
    int m2 = 2 * m;
    std::vector<cplx> t2(static_cast<std::size_t>(m2));
    std::vector<cplx> r2(static_cast<std::size_t>(m2));
    std::vector<cplx> dt2(static_cast<std::size_t>(m2));
    for (int k = 0; k < m; ++k) {
      t2[static_cast<std::size_t>(2 * k)] = t_s[static_cast<std::size_t>(k)];
      r2[static_cast<std::size_t>(2 * k)] = r_s[static_cast<std::size_t>(k)];
      dt2[static_cast<std::size_t>(2 * k)] = dt_s[static_cast<std::size_t>(k)];
    }
    for (int k = 1; k < m2; k += 2) sample(k, m2, t2, r2, dt2);
    t_s = std::move(t2);
    r_s = std::move(r2);
    dt_s = std::move(dt2);
    m = m2;

    std::vector<cplx> cur = detail::coefficients_from_samples(t_s, n_max);
    double resid = 0.0;
    for (int n = 0; n <= n_max; ++n)
      resid = std::max(resid, std::abs(cur[static_cast<std::size_t>(n)] -
                                       prev[static_cast<std::size_t>(n)]));
    prev = std::move(cur);
    if (resid <= 1e-12) {
      series.sample_count = m;
      series.residual = resid;
      series.coefficients = std::move(prev);
      series.t_samples = std::move(t_s);
      series.r_samples = std::move(r_s);
      series.dt_samples = std::move(dt_s);
      return series;
    }
  }

  double radius = 0.0;
  if (p.deflated_dimension() > 0) {
    Eigen::ComplexEigenSolver<Matrix> es(p.deflated, false);
    if (es.info() == Eigen::Success) radius = es.eigenvalues().cwiseAbs().maxCoeff();
  }
  throw NumericsError(
      "first-arrival coefficients did not stabilize after 4 sample doublings "
      "(deflated spectral radius " +
      std::to_string(radius) + "); a resonance sits too close to the unit circle");
}

/// Summary statistics of the first-arrival series.
struct HittingStats {
  std::vector<double> q;            // q[n] = |c_n|^2, n = 0..n_max
  double p_out = 0.0;               // sum of q, clamped to 0 below 1e-12
  std::optional<double> h;          // mean arrival step, absent when p_out = 0
  double tail_bound = 0.0;          // geometric estimate of the mass beyond n_max
  double p_out_integral = 0.0;      // independent route: mean |t|^2 on the circle
  std::optional<double> h_integral; // independent route via the derivative samples
};

inline HittingStats hitting_statistics(const AmplitudeSeries& series) {
  HittingStats st;
  int n_max = series.n_max;
  st.q.resize(static_cast<std::size_t>(n_max) + 1, 0.0);
  double p = 0.0;
  double nq = 0.0;
  double q_max = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    double q = std::norm(series.coefficients[static_cast<std::size_t>(n)]);
    st.q[static_cast<std::size_t>(n)] = q;
    p += q;
    nq += static_cast<double>(n) * q;
    q_max = std::max(q_max, q);
  }

  // Geometric tail estimate from the last two resolved arrivals.
  double floor_q = q_max * 1e-24;
  int n1 = -1, n2 = -1;
  for (int n = 1; n <= n_max; ++n)
    if (st.q[static_cast<std::size_t>(n)] > floor_q) {
      n1 = n2;
      n2 = n;
    }
  if (n1 > 0 && n2 > n1) {
    double ratio = st.q[static_cast<std::size_t>(n2)] / st.q[static_cast<std::size_t>(n1)];
    st.tail_bound = (ratio < 1.0)
                        ? st.q[static_cast<std::size_t>(n2)] * ratio / (1.0 - ratio)
                        : std::numeric_limits<double>::infinity();
  }

  if (p < 1e-12) {
    st.p_out = 0.0;
    st.h = std::nullopt;
  } else {
    st.p_out = p;
    st.h = nq / p;
  }

  int m = series.sample_count;
  double p_int = 0.0;
  cplx h_int = 0.0;
  for (int k = 0; k < m; ++k) {
    cplx z = std::polar(1.0, 2.0 * M_PI * static_cast<double>(k) / m);
    p_int += std::norm(series.t_samples[static_cast<std::size_t>(k)]);
    h_int += std::conj(series.t_samples[static_cast<std::size_t>(k)]) * z *
             series.dt_samples[static_cast<std::size_t>(k)];
  }
  st.p_out_integral = p_int / m;
  if (st.p_out_integral >= 1e-12) st.h_integral = h_int.real() / m / st.p_out_integral;
  return st;
}

/// On-shell scattering matrix at z = exp(i theta):
///   [ r_left   t_right ]
///   [ t_left   r_right ]
/// Column 0 is the response to injection from the incoming tail, column 1
/// from the outgoing tail.  Unitary for every theta; symmetric exactly when
/// the walk is time-reversal invariant.
inline Eigen::Matrix2cd s_matrix(const ScatteringProblem& left, const ScatteringProblem& right,
                                 double theta) {
  if (left.direction != Direction::Left || right.direction != Direction::Right)
    throw ValidationError("s_matrix needs one Left and one Right problem");
  cplx z = std::polar(1.0, theta);
  Amplitudes al = amplitudes_at(left, z);
  Amplitudes ar = amplitudes_at(right, z);
  Eigen::Matrix2cd s;
  s << al.r, ar.t, al.t, ar.r;
  return s;
}

inline Eigen::Matrix2cd s_matrix(const TailedGraph& g, double theta) {
  return s_matrix(build_problem(g, Direction::Left), build_problem(g, Direction::Right), theta);
}

/// Full scattering eigenstate on a finite window: unit incoming wave on the
/// injection tail plus the reflected, interior and transmitted parts.  Away
/// from the outermost tail segments it satisfies z U psi = psi.
inline WalkState scattering_eigenstate(const TailedGraph& g, const ScatteringProblem& p, cplx z,
                                       int window) {
  if (std::abs(z) < 1e-12)
    throw ValidationError("scattering eigenstate needs z away from the origin");
  Amplitudes a = amplitudes_at(p, z);
  auto basis = truncate(g, window);
  WalkState s = WalkState::zero(basis);
  for (int i = 0; i < p.interior_edge_count(); ++i) s.amplitudes[i] = a.psi[i];

  bool left_in = p.direction == Direction::Left;
  const auto& in_tail = left_in ? basis->left_tail() : basis->right_tail();
  const auto& out_tail = left_in ? basis->right_tail() : basis->left_tail();
  int in_anchor = left_in ? basis->entry_id() : basis->exit_id();
  int out_anchor = left_in ? basis->exit_id() : basis->entry_id();
  for (int d = 1; d <= window; ++d) {
    int outer = in_tail[static_cast<std::size_t>(d - 1)];
    int inner = (d == 1) ? in_anchor : in_tail[static_cast<std::size_t>(d - 2)];
    s.amplitudes[basis->index_of(outer, inner)] = std::pow(z, static_cast<double>(1 - d));
    s.amplitudes[basis->index_of(inner, outer)] = a.r * std::pow(z, static_cast<double>(d - 1));
    int far_outer = out_tail[static_cast<std::size_t>(d - 1)];
    int far_inner = (d == 1) ? out_anchor : out_tail[static_cast<std::size_t>(d - 2)];
    s.amplitudes[basis->index_of(far_inner, far_outer)] =
        a.t * std::pow(z, static_cast<double>(d - 1));
  }
  return s;
}

}  // namespace qwalk
