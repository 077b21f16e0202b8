// Command line front end: walk simulation, scattering amplitudes, hitting
// statistics, bound states, and reversal checks for tailed graphs.
//
// Exit codes: 0 success, 1 computation or input error, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qwalk/qwalk.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace qwalk;

// Fixed 12-significant-digit formatting keeps identical invocations byte
// identical across runs and platforms.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double quantized(double v) { return std::stod(fmt(v)); }

json json_complex(cplx v) { return json{{"re", quantized(v.real())}, {"im", quantized(v.imag())}}; }

// Accepts plain numbers plus the forms pi, 2pi/3, -pi/4, 0.5pi.
double parse_angle(const std::string& text) {
  auto to_double = [&text](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw qwalk::ValidationError("bad angle '" + text + "'");
    }
    if (used != s.size()) throw qwalk::ValidationError("bad angle '" + text + "'");
    return v;
  };
  auto pos = text.find("pi");
  if (pos == std::string::npos) return to_double(text);
  std::string head = text.substr(0, pos);
  std::string tail = text.substr(pos + 2);
  double factor = 1.0;
  if (head == "-")
    factor = -1.0;
  else if (!head.empty())
    factor = to_double(head);
  if (!tail.empty()) {
    if (tail[0] != '/') throw qwalk::ValidationError("bad angle '" + text + "'");
    double den = to_double(tail.substr(1));
    if (den == 0.0) throw qwalk::ValidationError("bad angle '" + text + "'");
    factor /= den;
  }
  return factor * M_PI;
}

struct CommonOptions {
  std::string graph_path;
  std::string builtin;
  std::string out_path;
  std::string format = "csv";
  std::optional<double> phi_override;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool with_phi = true) {
  cmd->add_option("--graph", opt.graph_path, "graph description file");
  cmd->add_option("--builtin", opt.builtin,
                  "named graph: diamond:<phi> or line:<t>,<r>[,<vertices>]");
  cmd->add_option("--out", opt.out_path, "write results to this file instead of stdout");
  cmd->add_option("--format", opt.format, "output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  if (with_phi)
    cmd->add_option("--phi", [&opt](const std::vector<std::string>& v) {
      try {
        opt.phi_override = parse_angle(v[0]);
      } catch (const Error&) {
        return false;
      }
      return true;
    }, "override the phase of a builtin diamond (accepts pi expressions)");
}

TailedGraph load_graph(const CommonOptions& opt) {
  if (opt.graph_path.empty() == opt.builtin.empty())
    throw ValidationError("give exactly one of --graph and --builtin");
  if (!opt.graph_path.empty()) {
    if (opt.phi_override)
      throw ValidationError("--phi only applies to --builtin diamond");
    std::ifstream in(opt.graph_path);
    if (!in) throw ValidationError("cannot open graph file '" + opt.graph_path + "'");
    return parse_graph(in);
  }
  auto colon = opt.builtin.find(':');
  std::string name = opt.builtin.substr(0, colon);
  std::string args = colon == std::string::npos ? "" : opt.builtin.substr(colon + 1);
  if (name == "diamond") {
    double phi = args.empty() ? 0.0 : parse_angle(args);
    if (opt.phi_override) phi = *opt.phi_override;
    return diamond_graph(phi);
  }
  if (name == "line") {
    if (opt.phi_override) throw ValidationError("--phi only applies to --builtin diamond");
    std::vector<std::string> parts;
    std::istringstream as(args);
    for (std::string p; std::getline(as, p, ',');) parts.push_back(p);
    if (parts.size() < 2 || parts.size() > 3)
      throw ValidationError("line builtin takes line:<t>,<r>[,<vertices>]");
    double t = std::stod(parts[0]);
    double r = std::stod(parts[1]);
    int n = parts.size() == 3 ? std::stoi(parts[2]) : 11;
    return line_graph(t, r, n);
  }
  throw ValidationError("unknown builtin graph '" + name + "'");
}

std::pair<std::string, std::string> parse_edge_ref(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
    throw ValidationError("edge reference must look like FROM:TO, got '" + text + "'");
  return {text.substr(0, colon), text.substr(colon + 1)};
}

void emit(const CommonOptions& opt, const std::string& text) {
  if (opt.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opt.out_path);
  if (!out) throw ValidationError("cannot write to '" + opt.out_path + "'");
  out << text;
}

std::string edge_name(const std::string& a, const std::string& b) { return a + ":" + b; }

// ---------------------------------------------------------------- simulate

int run_simulate(const CommonOptions& opt, int steps, const std::string& start,
                 const std::string& monitor) {
  TailedGraph g = load_graph(opt);
  std::string start_from = "@in1", start_to = g.entry;
  if (!start.empty()) std::tie(start_from, start_to) = parse_edge_ref(start);

  int window = std::max(steps, 1) + 2;
  auto basis = truncate(g, window);
  StepOperator u = assemble(g, basis);
  WalkState psi0 = WalkState::basis_state(basis, start_from, start_to);

  std::ostringstream os;
  if (!monitor.empty()) {
    if (steps < 1) throw ValidationError("--monitor needs --steps >= 1");
    auto [ma, mb] = parse_edge_ref(monitor);
    auto records = monitored_walk(u, psi0, {{ma, mb}}, steps);
    if (opt.format == "csv") {
      os << "n,p_survive,q_arrive\n";
      for (const auto& rec : records)
        os << rec.step << ',' << fmt(rec.p_survive) << ',' << fmt(rec.q_arrive) << '\n';
    } else {
      json j{{"command", "simulate"},
             {"monitor", edge_name(ma, mb)},
             {"steps", steps},
             {"records", json::array()}};
      for (const auto& rec : records)
        j["records"].push_back(json{{"n", rec.step},
                                    {"p_survive", quantized(rec.p_survive)},
                                    {"q_arrive", quantized(rec.q_arrive)}});
      os << j.dump(2) << '\n';
    }
  } else {
    WalkState psi = evolve(u, psi0, steps);
    auto dist = distribution(psi);
    double total = 0.0;
    for (const auto& ep : dist) total += ep.probability;
    if (opt.format == "csv") {
      os << "edge,probability\n";
      for (const auto& ep : dist)
        if (ep.probability != 0.0) os << edge_name(ep.a, ep.b) << ',' << fmt(ep.probability) << '\n';
      os << "# total " << fmt(total) << '\n';
    } else {
      json j{{"command", "simulate"},
             {"steps", steps},
             {"start", edge_name(start_from, start_to)},
             {"edges", json::array()},
             {"total", quantized(total)}};
      for (const auto& ep : dist)
        if (ep.probability != 0.0)
          j["edges"].push_back(
              json{{"edge", edge_name(ep.a, ep.b)}, {"probability", quantized(ep.probability)}});
      os << j.dump(2) << '\n';
    }
  }
  emit(opt, os.str());
  return 0;
}

// ----------------------------------------------------------------- scatter

int run_scatter(const CommonOptions& opt, int samples) {
  TailedGraph g = load_graph(opt);
  ScatteringProblem p = build_problem(g, Direction::Left);
  std::ostringstream os;
  json points = json::array();
  if (opt.format == "csv") os << "theta,re_t,im_t,re_r,im_r,flux\n";
  for (int k = 0; k < samples; ++k) {
    double theta = 2.0 * M_PI * k / samples;
    Amplitudes a = amplitudes_at(p, std::polar(1.0, theta));
    double flux = std::norm(a.t) + std::norm(a.r);
    if (opt.format == "csv")
      os << fmt(theta) << ',' << fmt(a.t.real()) << ',' << fmt(a.t.imag()) << ','
         << fmt(a.r.real()) << ',' << fmt(a.r.imag()) << ',' << fmt(flux) << '\n';
    else
      points.push_back(json{{"theta", quantized(theta)},
                            {"t", json_complex(a.t)},
                            {"r", json_complex(a.r)},
                            {"flux", quantized(flux)}});
  }
  if (opt.format == "json") {
    json j{{"command", "scatter"}, {"samples", samples}, {"points", std::move(points)}};
    os << j.dump(2) << '\n';
  }
  emit(opt, os.str());
  return 0;
}

// ------------------------------------------------------------ hitting-time

int run_hitting_time(const CommonOptions& opt, int n_max) {
  TailedGraph g = load_graph(opt);
  ScatteringProblem p = build_problem(g, Direction::Left);
  AmplitudeSeries series = taylor_coefficients(p, n_max);
  HittingStats st = hitting_statistics(series);
  std::ostringstream os;
  if (opt.format == "csv") {
    os << "n,q\n";
    for (int n = 1; n <= n_max; ++n) os << n << ',' << fmt(st.q[static_cast<std::size_t>(n)]) << '\n';
    os << "# p_out " << fmt(st.p_out) << '\n';
    os << "# h " << (st.h ? fmt(*st.h) : std::string("undefined")) << '\n';
    os << "# tail_bound " << fmt(st.tail_bound) << '\n';
    os << "# p_out_integral " << fmt(st.p_out_integral) << '\n';
    os << "# h_integral " << (st.h_integral ? fmt(*st.h_integral) : std::string("undefined")) << '\n';
    os << "# samples " << series.sample_count << '\n';
  } else {
    json q = json::array();
    for (int n = 0; n <= n_max; ++n) q.push_back(quantized(st.q[static_cast<std::size_t>(n)]));
    json j{{"command", "hitting-time"},
           {"n_max", n_max},
           {"q", std::move(q)},
           {"p_out", quantized(st.p_out)},
           {"h", st.h ? json(quantized(*st.h)) : json(nullptr)},
           {"tail_bound", quantized(st.tail_bound)},
           {"p_out_integral", quantized(st.p_out_integral)},
           {"h_integral", st.h_integral ? json(quantized(*st.h_integral)) : json(nullptr)},
           {"samples", series.sample_count}};
    os << j.dump(2) << '\n';
  }
  emit(opt, os.str());
  return 0;
}

// ------------------------------------------------------------ bound-states

int run_bound_states(const CommonOptions& opt) {
  TailedGraph g = load_graph(opt);
  ScatteringProblem p = build_problem(g, Direction::Left);
  std::ostringstream os;
  if (opt.format == "csv") {
    os << "state,re_lambda,im_lambda,edge,re,im\n";
    for (std::size_t s = 0; s < p.bound.size(); ++s) {
      const BoundState& b = p.bound[s];
      for (int i = 0; i < b.vector.size(); ++i) {
        if (b.vector[i] == cplx(0.0)) continue;
        const OrientedEdge& e = p.basis->edge(i);
        os << s << ',' << fmt(b.eigenvalue.real()) << ',' << fmt(b.eigenvalue.imag()) << ','
           << edge_name(p.basis->label(e.from), p.basis->label(e.to)) << ','
           << fmt(b.vector[i].real()) << ',' << fmt(b.vector[i].imag()) << '\n';
      }
    }
    os << "# count " << p.bound.size() << '\n';
  } else {
    json states = json::array();
    for (const BoundState& b : p.bound) {
      BoundStateSymmetry sym = classify_bound_state(*p.basis, b);
      json components = json::array();
      for (int i = 0; i < b.vector.size(); ++i) {
        if (b.vector[i] == cplx(0.0)) continue;
        const OrientedEdge& e = p.basis->edge(i);
        components.push_back(json{{"edge", edge_name(p.basis->label(e.from), p.basis->label(e.to))},
                                  {"re", quantized(b.vector[i].real())},
                                  {"im", quantized(b.vector[i].imag())}});
      }
      states.push_back(json{{"eigenvalue", json_complex(b.eigenvalue)},
                            {"reversal_overlap", quantized(sym.overlap)},
                            {"reversal_invariant", sym.invariant},
                            {"components", std::move(components)}});
    }
    json j{{"command", "bound-states"},
           {"count", p.bound.size()},
           {"states", std::move(states)}};
    os << j.dump(2) << '\n';
  }
  emit(opt, os.str());
  return 0;
}

// --------------------------------------------------------------- tri-check

int run_tri_check(const CommonOptions& opt, int samples) {
  TailedGraph g = load_graph(opt);
  StepOperator u = assemble(g, truncate(g, 1));
  TimeReversalReport rep = check_invariance(u);
  std::ostringstream os;
  if (opt.format == "csv") {
    os << "# invariant " << (rep.invariant ? "yes" : "no") << '\n';
    os << "# worst_violation " << fmt(rep.worst_violation) << '\n';
    if (!rep.invariant)
      os << "# witness " << rep.vertex << " (" << rep.neighbor_a << ',' << rep.neighbor_b << ")\n";
    if (rep.invariant) {
      TransmissionSymmetry sym = verify_transmission_symmetry(g, samples);
      os << "# max_t_diff " << fmt(sym.max_t_diff) << '\n';
      os << "# max_return_defect " << fmt(sym.max_return_defect) << '\n';
      os << "# max_cross_defect " << fmt(sym.max_cross_defect) << '\n';
      os << "# samples " << sym.samples << '\n';
    }
  } else {
    json j{{"command", "tri-check"},
           {"invariant", rep.invariant},
           {"worst_violation", quantized(rep.worst_violation)}};
    if (!rep.invariant)
      j["witness"] = json{{"vertex", rep.vertex},
                          {"neighbor_a", rep.neighbor_a},
                          {"neighbor_b", rep.neighbor_b}};
    else {
      TransmissionSymmetry sym = verify_transmission_symmetry(g, samples);
      j["transmission"] = json{{"max_t_diff", quantized(sym.max_t_diff)},
                               {"max_return_defect", quantized(sym.max_return_defect)},
                               {"max_cross_defect", quantized(sym.max_cross_defect)},
                               {"samples", sym.samples}};
    }
    os << j.dump(2) << '\n';
  }
  emit(opt, os.str());
  return 0;
}

// --------------------------------------------------------------- self-test

struct SelfTest {
  std::ostringstream& os;
  int failures = 0;
  void check(const std::string& name, double value, double tol) {
    bool ok = value <= tol;
    os << (ok ? "ok   " : "FAIL ") << name << " (" << fmt(value) << " vs " << fmt(tol) << ")\n";
    if (!ok) ++failures;
  }
};

int run_self_test(const CommonOptions& opt, std::uint64_t seed) {
  std::ostringstream os;
  SelfTest t{os};

  TailedGraph g0 = diamond_graph(0.0);
  ScatteringProblem p0 = build_problem(g0);
  AmplitudeSeries s0 = taylor_coefficients(p0, 50);
  HittingStats st0 = hitting_statistics(s0);
  t.check("first-arrival q(3) = 64/81", std::abs(st0.q[3] - 64.0 / 81.0), 1e-12);
  t.check("first-arrival q(7) = 64/6561", std::abs(st0.q[7] - 64.0 / 6561.0), 1e-12);
  t.check("escape probability 4/5", std::abs(st0.p_out + st0.tail_bound - 0.8), 1e-10);
  t.check("mean arrival step 3.05", std::abs(st0.h.value_or(-1) - 3.05), 1e-10);
  t.check("arrival statistics integral route",
          std::abs(st0.h_integral.value_or(-1) - 3.05), 1e-9);
  t.check("bound-state count 4", std::abs(static_cast<double>(p0.bound.size()) - 4.0), 0.0);

  double worst = 0.0;
  for (double phi : {0.0, M_PI / 4, M_PI / 2, 2 * M_PI / 3, M_PI}) {
    ScatteringProblem p = build_problem(diamond_graph(phi));
    for (int k = 0; k < 128; ++k) {
      cplx z = std::polar(1.0, 2.0 * M_PI * k / 128.0);
      Amplitudes a = amplitudes_at(p, z);
      worst = std::max(worst, std::abs(a.t - diamond_transmission(z, phi)));
      worst = std::max(worst, std::abs(a.r - diamond_reflection(z, phi)));
    }
  }
  t.check("closed-form amplitudes, 5 phases x 128 points", worst, 1e-11);

  auto corpus = random_corpus(seed, 10);
  double worst_u = 0, worst_flux = 0, worst_s = 0, worst_tri = 0, worst_oracle = 0;
  for (const auto& g : corpus) {
    StepOperator u = assemble(g, truncate(g, 1));
    worst_u = std::max(worst_u, unitarity_defect(u));
    worst_tri = std::max(worst_tri, check_invariance(u).worst_violation);
    ScatteringProblem pl = build_problem(g, Direction::Left);
    ScatteringProblem pr = build_problem(g, Direction::Right);
    for (int k = 0; k < 32; ++k) {
      double theta = 2.0 * M_PI * k / 32.0;
      Amplitudes a = amplitudes_at(pl, std::polar(1.0, theta));
      worst_flux = std::max(worst_flux, std::abs(std::norm(a.t) + std::norm(a.r) - 1.0));
      Eigen::Matrix2cd s = s_matrix(pl, pr, theta);
      worst_s = std::max(
          worst_s, (s.adjoint() * s - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff());
    }
    AmplitudeSeries ser = taylor_coefficients(pl, 30);
    auto wb = truncate(g, 32);
    StepOperator uw = assemble(g, wb);
    auto q = first_arrival_direct(uw, WalkState::basis_state(wb, "@in1", g.entry),
                                  {g.exit_label, "@out1"}, 30);
    for (int n = 1; n <= 30; ++n)
      worst_oracle =
          std::max(worst_oracle, std::abs(q[static_cast<std::size_t>(n - 1)] -
                                          std::norm(ser.coefficients[static_cast<std::size_t>(n)])));
  }
  t.check("corpus step-operator unitarity", worst_u, 1e-12);
  t.check("corpus scattering flux", worst_flux, 1e-10);
  t.check("corpus S-matrix unitarity", worst_s, 1e-10);
  t.check("corpus reversal invariance", worst_tri, 1e-12);
  t.check("corpus series vs direct first arrival", worst_oracle, 1e-10);

  os << (t.failures == 0 ? "all checks passed\n"
                         : std::to_string(t.failures) + " check(s) failed\n");
  emit(opt, os.str());
  return t.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum walks on tailed graphs: simulation and scattering"};
  app.require_subcommand(1);

  CommonOptions sim_opt, sc_opt, ht_opt, bs_opt, tri_opt, st_opt;
  int steps = 0, samples = 256, n_max = 50, tri_samples = 64;
  std::string start, monitor;
  std::uint64_t seed = 20250819;

  CLI::App* sim = app.add_subcommand("simulate", "evolve a walk and report probabilities");
  add_common(sim, sim_opt);
  sim->add_option("--steps", steps, "number of steps")->check(CLI::NonNegativeNumber);
  sim->add_option("--start", start, "initial oriented edge FROM:TO (default @in1:<entry>)");
  sim->add_option("--monitor", monitor, "undirected edge A:B to monitor for first arrival");

  CLI::App* sc = app.add_subcommand("scatter", "transmission/reflection on the unit circle");
  add_common(sc, sc_opt);
  sc->add_option("--samples", samples, "number of theta samples")->check(CLI::PositiveNumber);

  CLI::App* ht = app.add_subcommand("hitting-time", "first-arrival series and statistics");
  add_common(ht, ht_opt);
  ht->add_option("--nmax", n_max, "largest arrival step")->check(CLI::PositiveNumber);

  CLI::App* bs = app.add_subcommand("bound-states", "interior states invisible to the tails");
  add_common(bs, bs_opt);

  CLI::App* tri = app.add_subcommand("tri-check", "time-reversal invariance report");
  add_common(tri, tri_opt);
  tri->add_option("--samples", tri_samples, "theta samples for the transmission table")
      ->check(CLI::PositiveNumber);

  CLI::App* st = app.add_subcommand("self-test", "run the built-in oracle battery");
  st->add_option("--out", st_opt.out_path, "write results to this file instead of stdout");
  st->add_option("--seed", seed, "seed of the random-graph battery");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_opt, steps, start, monitor);
    if (sc->parsed()) return run_scatter(sc_opt, samples);
    if (ht->parsed()) return run_hitting_time(ht_opt, n_max);
    if (bs->parsed()) return run_bound_states(bs_opt);
    if (tri->parsed()) return run_tri_check(tri_opt, tri_samples);
    if (st->parsed()) return run_self_test(st_opt, seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
