#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/types.hpp"

namespace qwalk {

/// Scattering coefficients of the equal-transmission (Grover) vertex of the
/// given degree: r = 2/n - 1 on the diagonal, t = 2/n off the diagonal.
struct GroverCoefficients {
  cplx r;
  cplx t;
};

inline GroverCoefficients grover_coefficients(int degree) {
  if (degree < 1) throw ValidationError("grover vertex degree must be >= 1");
  double n = static_cast<double>(degree);
  return {cplx(2.0 / n - 1.0, 0.0), cplx(2.0 / n, 0.0)};
}

/// Local scattering behaviour of one vertex.  The vertex unitary maps the
/// incoming-edge amplitudes to outgoing-edge amplitudes in a fixed neighbour
/// order (established later, when the vertex is placed in a graph).
struct VertexSpec {
  enum class Kind { Grover, TwoPort, Free, Custom, Phased };

  Kind kind = Kind::Free;
  int degree = 0;    // Grover
  cplx t{1.0, 0.0};  // TwoPort
  cplx r{0.0, 0.0};  // TwoPort
  Matrix matrix;     // Custom, row = outgoing, col = incoming
  double phi = 0.0;  // Phased
  std::shared_ptr<const VertexSpec> inner;  // Phased

  static VertexSpec grover(int degree) {
    grover_coefficients(degree);  // degree check
    VertexSpec s;
    s.kind = Kind::Grover;
    s.degree = degree;
    return s;
  }

  static VertexSpec two_port(cplx t, cplx r) {
    VertexSpec s;
    s.kind = Kind::TwoPort;
    s.t = t;
    s.r = r;
    return s;
  }

  static VertexSpec free_vertex() { return VertexSpec{}; }

  static VertexSpec custom(Matrix m) {
    VertexSpec s;
    s.kind = Kind::Custom;
    s.matrix = std::move(m);
    return s;
  }

  static VertexSpec phased(double phi, VertexSpec inner_spec) {
    VertexSpec s;
    s.kind = Kind::Phased;
    s.phi = phi;
    s.inner = std::make_shared<VertexSpec>(std::move(inner_spec));
    return s;
  }

  int dimension() const {
    switch (kind) {
      case Kind::Grover:
        return degree;
      case Kind::TwoPort:
      case Kind::Free:
        return 2;
      case Kind::Custom:
        return static_cast<int>(matrix.rows());
      case Kind::Phased:
        return inner ? inner->dimension() : 0;
    }
    return 0;
  }

  /// Throws ValidationError if the spec cannot produce a unitary block.
  void validate() const {
    switch (kind) {
      case Kind::Grover:
        grover_coefficients(degree);
        break;
      case Kind::TwoPort: {
        double norm = std::norm(t) + std::norm(r);
        if (std::abs(norm - 1.0) > 1e-12)
          throw ValidationError("two_port coefficients violate |t|^2 + |r|^2 = 1");
        break;
      }
      case Kind::Free:
        break;
      case Kind::Custom: {
        if (matrix.rows() == 0 || matrix.rows() != matrix.cols())
          throw ValidationError("custom vertex matrix must be square and non-empty");
        double defect = (matrix.adjoint() * matrix - Matrix::Identity(matrix.rows(), matrix.cols()))
                            .cwiseAbs()
                            .maxCoeff();
        if (defect > 1e-12)
          throw ValidationError("custom vertex matrix is not unitary (defect " +
                                std::to_string(defect) + ")");
        break;
      }
      case Kind::Phased:
        if (!inner) throw ValidationError("phase vertex has no inner spec");
        inner->validate();
        break;
    }
  }

  /// The local unitary in a fixed neighbour order, before edge phases.
  /// TwoPort follows the transmission/reflection rule for a line vertex:
  /// the first neighbour plays the incoming-from-the-left role, so
  /// column 0 -> (r, t) and column 1 -> (conj(t), -conj(r)).
  Matrix local_unitary() const {
    switch (kind) {
      case Kind::Grover: {
        auto [r_g, t_g] = grover_coefficients(degree);
        Matrix m = Matrix::Constant(degree, degree, t_g);
        m.diagonal().setConstant(r_g);
        return m;
      }
      case Kind::TwoPort: {
        Matrix m(2, 2);
        m << r, std::conj(t), t, -std::conj(r);
        return m;
      }
      case Kind::Free: {
        Matrix m(2, 2);
        m << 0, 1, 1, 0;
        return m;
      }
      case Kind::Custom:
        return matrix;
      case Kind::Phased:
        return std::polar(1.0, phi) * inner->local_unitary();
    }
    return Matrix();
  }

  friend bool operator==(const VertexSpec& a, const VertexSpec& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Kind::Grover:
        return a.degree == b.degree;
      case Kind::TwoPort:
        return a.t == b.t && a.r == b.r;
      case Kind::Free:
        return true;
      case Kind::Custom:
        return a.matrix.rows() == b.matrix.rows() && a.matrix.cols() == b.matrix.cols() &&
               (a.matrix.array() == b.matrix.array()).all();
      case Kind::Phased:
        return a.phi == b.phi && a.inner && b.inner && *a.inner == *b.inner;
    }
    return false;
  }
};

/// Undirected edge {a, b} with an optional phase shifter at each endpoint.
/// A phase phi at endpoint v multiplies every amplitude scattered at v
/// through this edge by exp(i phi); amplitudes that enter and leave through
/// the same edge pick up exp(2 i phi).
struct EdgeSpec {
  std::string a;
  std::string b;
  double phase_a = 0.0;
  double phase_b = 0.0;

  double phase_at(const std::string& label) const {
    if (label == a) return phase_a;
    if (label == b) return phase_b;
    return 0.0;
  }

  friend bool operator==(const EdgeSpec&, const EdgeSpec&) = default;
};

/// Finite graph with one designated entry vertex and one designated exit
/// vertex; semi-infinite in/out tails are understood to be attached there.
/// entry and exit may name the same vertex, in which case it carries both
/// tails and its degree is raised by two.
struct TailedGraph {
  struct Vertex {
    std::string label;
    VertexSpec spec;
    friend bool operator==(const Vertex&, const Vertex&) = default;
  };

  std::vector<Vertex> vertices;
  std::vector<EdgeSpec> edges;
  std::string entry;
  std::string exit_label;

  friend bool operator==(const TailedGraph&, const TailedGraph&) = default;

  int vertex_index(const std::string& label) const {
    for (std::size_t i = 0; i < vertices.size(); ++i)
      if (vertices[i].label == label) return static_cast<int>(i);
    return -1;
  }

  /// Degree including the tail edge(s) at entry/exit.
  int degree_with_tails(const std::string& label) const {
    int d = 0;
    for (const auto& e : edges)
      if (e.a == label || e.b == label) ++d;
    if (label == entry) ++d;
    if (label == exit_label) ++d;
    return d;
  }

  /// Labels may not contain whitespace, '#' or ':', may not start with the
  /// reserved tail prefix '@', and may not shadow the tail sort keys.
  static bool label_ok(const std::string& label) {
    if (label.empty() || label[0] == '@') return false;
    if (label == "tail_in" || label == "tail_out") return false;
    for (char c : label)
      if (std::isspace(static_cast<unsigned char>(c)) || c == '#' || c == ':') return false;
    return true;
  }

  /// Full structural check.  Throws ValidationError on a hard defect and
  /// returns the list of non-fatal warnings (currently: vertices that are
  /// unreachable from the entry vertex).
  std::vector<std::string> validate() const {
    std::vector<std::string> warnings;
    if (vertices.empty()) throw ValidationError("graph has no vertices");

    std::set<std::string> seen;
    for (const auto& v : vertices) {
      if (!label_ok(v.label)) throw ValidationError("illegal vertex label '" + v.label + "'");
      if (!seen.insert(v.label).second)
        throw ValidationError("duplicate vertex label '" + v.label + "'");
    }
    if (vertex_index(entry) < 0)
      throw ValidationError("entry vertex '" + entry + "' is not declared");
    if (vertex_index(exit_label) < 0)
      throw ValidationError("exit vertex '" + exit_label + "' is not declared");

    std::set<std::pair<std::string, std::string>> edge_keys;
    for (const auto& e : edges) {
      if (e.a == e.b) throw ValidationError("self-loop at vertex '" + e.a + "'");
      if (vertex_index(e.a) < 0 || vertex_index(e.b) < 0)
        throw ValidationError("edge references undeclared vertex '" +
                              (vertex_index(e.a) < 0 ? e.a : e.b) + "'");
      auto key = std::minmax(e.a, e.b);
      if (!edge_keys.insert(key).second)
        throw ValidationError("duplicate edge {" + key.first + ", " + key.second + "}");
    }

    for (const auto& v : vertices) {
      v.spec.validate();
      int deg = degree_with_tails(v.label);
      if (deg == 0) throw ValidationError("vertex '" + v.label + "' has no edges");
      if (v.spec.dimension() != deg)
        throw ValidationError("vertex '" + v.label + "' has degree " + std::to_string(deg) +
                              " but its unitary acts on " + std::to_string(v.spec.dimension()) +
                              " edges");
    }

    // Reachability from the entry over interior edges.
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& e : edges) {
      adj[e.a].push_back(e.b);
      adj[e.b].push_back(e.a);
    }
    std::set<std::string> reached{entry};
    std::vector<std::string> queue{entry};
    while (!queue.empty()) {
      std::string v = queue.back();
      queue.pop_back();
      for (const auto& w : adj[v])
        if (reached.insert(w).second) queue.push_back(w);
    }
    for (const auto& v : vertices)
      if (!reached.count(v.label))
        warnings.push_back("vertex '" + v.label + "' is unreachable from the entry");
    return warnings;
  }
};

}  // namespace qwalk
