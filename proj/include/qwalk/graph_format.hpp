#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qwalk/graph.hpp"
#include "qwalk/types.hpp"

namespace qwalk {

// Line-oriented graph description:
//
//   # comment
//   vertex <label> grover <degree>
//   vertex <label> free
//   vertex <label> two_port <re_t> <im_t> <re_r> <im_r>
//   vertex <label> custom <re> <im> ...            (d*d row-major pairs)
//   vertex <label> phase <phi> <kind> ...          (wraps any other kind)
//   edge <a> <b> [phase@<label>=<phi>] ...
//   tail_in <label>
//   tail_out <label>
//
// Later sections parse and print this format; both directions round-trip
// (serialize then parse reproduces the graph exactly).

namespace detail {

inline double parse_number(const std::string& tok, int line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(line, "expected a number, got '" + tok + "'");
  }
  if (pos != tok.size()) throw ParseError(line, "trailing junk in number '" + tok + "'");
  if (!std::isfinite(v)) throw ParseError(line, "non-finite number '" + tok + "'");
  return v;
}

/// Parses a vertex kind from tokens[k..]; consumes everything to the end.
inline VertexSpec parse_kind(const std::vector<std::string>& tok, std::size_t k, int line) {
  if (k >= tok.size()) throw ParseError(line, "missing vertex kind");
  const std::string& kind = tok[k];
  std::size_t rest = tok.size() - k - 1;
  if (kind == "grover") {
    if (rest != 1) throw ParseError(line, "grover takes exactly one argument (degree)");
    double d = parse_number(tok[k + 1], line);
    if (d < 1 || d != std::floor(d)) throw ParseError(line, "grover degree must be a positive integer");
    return VertexSpec::grover(static_cast<int>(d));
  }
  if (kind == "free") {
    if (rest != 0) throw ParseError(line, "free takes no arguments");
    return VertexSpec::free_vertex();
  }
  if (kind == "two_port") {
    if (rest != 4) throw ParseError(line, "two_port takes re_t im_t re_r im_r");
    cplx t(parse_number(tok[k + 1], line), parse_number(tok[k + 2], line));
    cplx r(parse_number(tok[k + 3], line), parse_number(tok[k + 4], line));
    return VertexSpec::two_port(t, r);
  }
  if (kind == "custom") {
    if (rest == 0 || rest % 2 != 0)
      throw ParseError(line, "custom takes d*d re/im pairs");
    std::size_t n_entries = rest / 2;
    auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n_entries))));
    if (d * d != n_entries)
      throw ParseError(line, "custom entry count is not a perfect square");
    Matrix m(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        std::size_t base = k + 1 + 2 * (i * d + j);
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            cplx(parse_number(tok[base], line), parse_number(tok[base + 1], line));
      }
    return VertexSpec::custom(std::move(m));
  }
  if (kind == "phase") {
    if (rest < 2) throw ParseError(line, "phase takes an angle and an inner kind");
    double phi = parse_number(tok[k + 1], line);
    return VertexSpec::phased(phi, parse_kind(tok, k + 2, line));
  }
  throw ParseError(line, "unknown vertex kind '" + kind + "'");
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void print_kind(std::ostream& os, const VertexSpec& s) {
  switch (s.kind) {
    case VertexSpec::Kind::Grover:
      os << "grover " << s.degree;
      return;
    case VertexSpec::Kind::Free:
      os << "free";
      return;
    case VertexSpec::Kind::TwoPort:
      os << "two_port " << format_double(s.t.real()) << ' ' << format_double(s.t.imag()) << ' '
         << format_double(s.r.real()) << ' ' << format_double(s.r.imag());
      return;
    case VertexSpec::Kind::Custom:
      os << "custom";
      for (Eigen::Index i = 0; i < s.matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < s.matrix.cols(); ++j)
          os << ' ' << format_double(s.matrix(i, j).real()) << ' '
             << format_double(s.matrix(i, j).imag());
      return;
    case VertexSpec::Kind::Phased:
      os << "phase " << format_double(s.phi) << ' ';
      print_kind(os, *s.inner);
      return;
  }
}

}  // namespace detail

inline TailedGraph parse_graph(std::istream& in) {
  TailedGraph g;
  bool have_in = false;
  bool have_out = false;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    const std::string& head = tok[0];
    if (head == "vertex") {
      if (tok.size() < 3) throw ParseError(line_no, "vertex needs a label and a kind");
      if (!TailedGraph::label_ok(tok[1]))
        throw ParseError(line_no, "illegal vertex label '" + tok[1] + "'");
      if (g.vertex_index(tok[1]) >= 0)
        throw ParseError(line_no, "duplicate vertex '" + tok[1] + "'");
      VertexSpec spec = detail::parse_kind(tok, 2, line_no);
      try {
        spec.validate();
      } catch (const ValidationError& e) {
        throw ParseError(line_no, e.what());
      }
      g.vertices.push_back({tok[1], std::move(spec)});
    } else if (head == "edge") {
      if (tok.size() < 3) throw ParseError(line_no, "edge needs two endpoint labels");
      EdgeSpec e;
      e.a = tok[1];
      e.b = tok[2];
      for (std::size_t k = 3; k < tok.size(); ++k) {
        const std::string& opt = tok[k];
        if (opt.rfind("phase@", 0) != 0)
          throw ParseError(line_no, "unknown edge option '" + opt + "'");
        auto eq = opt.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "edge phase needs '=<angle>'");
        std::string at = opt.substr(6, eq - 6);
        double phi = detail::parse_number(opt.substr(eq + 1), line_no);
        if (at == e.a)
          e.phase_a = phi;
        else if (at == e.b)
          e.phase_b = phi;
        else
          throw ParseError(line_no, "phase endpoint '" + at + "' is not on this edge");
      }
      g.edges.push_back(std::move(e));
    } else if (head == "tail_in" || head == "tail_out") {
      if (tok.size() != 2) throw ParseError(line_no, head + " takes exactly one label");
      bool& flag = (head == "tail_in") ? have_in : have_out;
      if (flag) throw ParseError(line_no, "duplicate " + head + " declaration");
      flag = true;
      (head == "tail_in" ? g.entry : g.exit_label) = tok[1];
    } else {
      throw ParseError(line_no, "unknown directive '" + head + "'");
    }
  }
  if (!have_in) throw ParseError(line_no, "missing tail_in declaration");
  if (!have_out) throw ParseError(line_no, "missing tail_out declaration");
  g.validate();
  return g;
}

inline TailedGraph parse_graph(const std::string& text) {
  std::istringstream in(text);
  return parse_graph(in);
}

inline void serialize_graph(std::ostream& os, const TailedGraph& g) {
  for (const auto& v : g.vertices) {
    os << "vertex " << v.label << ' ';
    detail::print_kind(os, v.spec);
    os << '\n';
  }
  for (const auto& e : g.edges) {
    os << "edge " << e.a << ' ' << e.b;
    if (e.phase_a != 0.0) os << " phase@" << e.a << '=' << detail::format_double(e.phase_a);
    if (e.phase_b != 0.0) os << " phase@" << e.b << '=' << detail::format_double(e.phase_b);
    os << '\n';
  }
  os << "tail_in " << g.entry << '\n';
  os << "tail_out " << g.exit_label << '\n';
}

inline std::string serialize_graph(const TailedGraph& g) {
  std::ostringstream os;
  serialize_graph(os, g);
  return os.str();
}

}  // namespace qwalk
