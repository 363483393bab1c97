#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "delvar/dubois_reymond.hpp"
#include "delvar/euler_lagrange.hpp"
#include "delvar/expr.hpp"
#include "delvar/io.hpp"
#include "delvar/noether.hpp"
#include "delvar/optimal_control.hpp"
#include "delvar/registry.hpp"
#include "delvar/solver.hpp"

namespace delvar::cli {

enum Exit { kPass = 0, kGatedFailure = 1, kInvalidInput = 2, kNonConvergence = 3 };

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool gated = true;
  bool pass = true;
  std::string note;
};

namespace detail {

struct Source {
  std::string example;
  std::string problem;
  std::string trajectory;
  std::vector<double> lambda;
  std::string out;
  bool json = false;
};

inline void add_source(CLI::App* cmd, Source& s, bool with_trajectory = true) {
  auto* ex = cmd->add_option("--example", s.example, "registry entry name");
  auto* pr = cmd->add_option("--problem", s.problem, "problem JSON file");
  ex->excludes(pr);
  if (with_trajectory) {
    cmd->add_option("--trajectory", s.trajectory, "trajectory JSON file");
    cmd->add_option("--lambda", s.lambda, "multipliers, comma separated")->delimiter(',');
  }
  cmd->add_option("--out", s.out, "output path (default standard output)");
  cmd->add_flag("--json", s.json, "machine-readable summary");
}

inline io::ProblemFile load(const Source& s) {
  if (!s.example.empty()) return find_entry(s.example).build();
  if (!s.problem.empty()) return io::load_problem(s.problem);
  throw Error(ErrorCode::InvalidInput, "give --example NAME or --problem FILE");
}

inline const IsoperimetricProblem& need_variational(const io::ProblemFile& f) {
  if (!f.variational) throw Error(ErrorCode::InvalidInput, "command needs a variational problem");
  return *f.variational;
}

inline Trajectory need_trajectory(const Source& s, const io::ProblemFile& f) {
  if (!s.trajectory.empty()) return io::load_trajectory(s.trajectory);
  if (f.trajectory) return *f.trajectory;
  throw Error(ErrorCode::InvalidInput, "no trajectory: pass --trajectory FILE");
}

inline Eigen::VectorXd lambda_of(const Source& s, const io::ProblemFile& f, int k) {
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(k);
  if (!s.lambda.empty()) {
    lam = Eigen::Map<const Eigen::VectorXd>(s.lambda.data(), static_cast<Eigen::Index>(s.lambda.size()));
  } else if (f.lambda) {
    lam = *f.lambda;
  }
  if (lam.size() != k) throw Error(ErrorCode::InvalidInput, "lambda needs " + std::to_string(k) + " entries");
  return lam;
}

/// Output sink: the file named by --out, else the given stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      os_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw Error(ErrorCode::InvalidInput, "cannot write '" + path + "'");
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }
  bool to_file() const { return file_ != nullptr; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline TransformationGroup make_group(const IsoperimetricProblem& p, const std::string& eta, const std::string& xi,
                                      const std::string& gauge) {
  TransformationGroup g;
  const expr::Binding gb = expr::Binding::group(p.n);
  g.eta = expr::compile(eta, gb);
  const auto parts = split(xi, ';');
  if (parts.size() == 1 && p.n > 1) {
    for (int c = 0; c < p.n; ++c) g.xi.push_back(expr::compile(parts[0], gb));
  } else {
    if (static_cast<int>(parts.size()) != p.n) throw Error(ErrorCode::InvalidInput, "--xi needs n expressions separated by ';'");
    for (const auto& s : parts) g.xi.push_back(expr::compile(s, gb));
  }
  g.gauge = expr::compile_integrand(gauge, expr::Binding::variational(p.m, p.n));
  return g;
}

inline std::string check_table(const std::vector<Check>& checks) {
  std::ostringstream os;
  os << "check,value,threshold,gated,status,note\n";
  for (const auto& c : checks)
    os << c.name << ',' << io::num(c.value) << ',' << io::num(c.threshold) << ',' << (c.gated ? "yes" : "no") << ','
       << (c.gated ? (c.pass ? "pass" : "FAIL") : "report") << ',' << c.note << '\n';
  return os.str();
}

inline Check gate(std::string name, double value, double threshold, std::string note = {}) {
  return Check{std::move(name), value, threshold, true, std::isfinite(value) && value <= threshold, std::move(note)};
}

inline Check report(std::string name, double value, std::string note = {}) {
  return Check{std::move(name), value, 0.0, false, true, std::move(note)};
}

inline double sup_history_error(const IsoperimetricProblem& p, const Trajectory& q) {
  if (p.history.empty()) return 0.0;
  double err = 0.0;
  const int count = 50;
  for (int s = 0; s <= count; ++s) {
    const double t = p.t1 - p.tau + p.tau * s / count;
    const Eigen::MatrixXd d = q.derivatives(t, p.m - 1, s == count ? Side::Left : Side::Right);
    const Eigen::MatrixXd h = p.history_derivatives(t, p.m - 1);
    err = std::max(err, (d - h).cwiseAbs().maxCoeff());
  }
  return err;
}

inline double sup_terminal_error(const IsoperimetricProblem& p, const Trajectory& q) {
  double err = 0.0;
  for (int i = 0; i < static_cast<int>(p.terminal.size()); ++i)
    err = std::max(err, (q.eval(p.t2, i, Side::Left) - p.terminal[i]).cwiseAbs().maxCoeff());
  return err;
}

/// Sup-norm of q - reference over [t1, t2].
inline double sup_difference(const Trajectory& a, const Trajectory& b, double t1, double t2, int count = 400) {
  double err = 0.0;
  for (int s = 0; s <= count; ++s) {
    const double t = t1 + (t2 - t1) * s / count;
    err = std::max(err, (a.eval(t, 0, Side::Left) - b.eval(t, 0, Side::Left)).cwiseAbs().maxCoeff());
  }
  return err;
}

inline double noether_deviation(const AugmentedSetup& setup, const TransformationGroup& g, const Trajectory& q,
                                int count, double* mean_out = nullptr) {
  const auto& p = setup.problem;
  double dev = 0.0;
  for (Regime regime : {Regime::First, Regime::Second}) {
    const Grid grid = regime_grid(p, q, regime, count);
    const auto rep = constancy_report([&](double t) { return noether_quantity(setup, g, q, t, regime); }, {grid});
    dev = std::max(dev, rep.worst());
    if (mean_out && regime == Regime::Second) *mean_out = rep.mean.front();
  }
  return dev;
}

inline std::vector<Check> verify_variational(const io::ProblemFile& f, double tol, int grid) {
  const IsoperimetricProblem& p = *f.variational;
  if (!f.trajectory) throw Error(ErrorCode::InvalidInput, "entry has no reference trajectory to verify");
  const Trajectory& q = *f.trajectory;
  const Eigen::VectorXd lambda = f.lambda ? *f.lambda : Eigen::VectorXd::Zero(p.k());
  std::vector<Check> checks;
  const ResidualReport rep = verify(p, q, lambda, tol, grid);
  checks.push_back(gate("el_residual_sup", rep.el_sup(), tol));
  checks.push_back(gate("history_match", sup_history_error(p, q), tol));
  if (!p.terminal.empty()) checks.push_back(gate("terminal_match", sup_terminal_error(p, q), tol));
  const double J = functional_value(p, q);
  if (f.expected_J)
    checks.push_back(gate("functional_J", std::abs(J - *f.expected_J), tol, "J = " + io::num(J)));
  else
    checks.push_back(report("functional_J", J));
  if (p.k() > 0) {
    const Eigen::VectorXd I = constraint_values(p, q);
    if (f.expected_I && f.expected_I->size() == p.k())
      checks.push_back(gate("constraint_I", (I - *f.expected_I).cwiseAbs().maxCoeff(), tol, "I[0] = " + io::num(I[0])));
    checks.push_back(gate("constraint_defect", rep.constraint_defect.cwiseAbs().maxCoeff(), tol));
    checks.push_back(report("classification", rep.abnormal ? 1.0 : 0.0, rep.abnormal ? "abnormal" : "normal"));
  }
  checks.push_back(report("cdur_sup", rep.cdur_sup, rep.hypothesis_violated ? "hypothesis_violated" : "hypothesis_holds"));
  checks.push_back(report("hypothesis_violated", rep.hypothesis_violated ? 1.0 : 0.0,
                          rep.hypothesis_violated ? "true" : "false"));
  const AugmentedSetup setup{p, lambda};
  TransformationGroup time_shift;
  time_shift.eta = ScalarFunction::constant(1.0);
  const double nd = noether_deviation(setup, time_shift, q, grid / 2);
  if (rep.hypothesis_violated) {
    checks.push_back(report("dr_residual_sup", rep.dr_sup, "not gated: hypothesis_violated"));
    checks.push_back(report("dr_constancy", nd, "not gated: hypothesis_violated"));
  } else {
    checks.push_back(gate("dr_residual_sup", rep.dr_sup, tol));
    checks.push_back(gate("dr_constancy", nd, tol));
  }
  if (f.check_solve) {
    CollocationScheme scheme;
    const ElSolution sol = solve_el(p, std::nullopt, Eigen::VectorXd::Zero(p.k()), scheme);
    checks.push_back(Check{"solve_converged", sol.report.residual, scheme.tolerance, true, sol.report.converged(),
                           to_string(sol.report.outcome)});
    checks.push_back(gate("solve_lambda_error", (sol.lambda - lambda).cwiseAbs().maxCoeff(), 1e-5));
    checks.push_back(gate("solve_trajectory_error", sup_difference(sol.trajectory, q, p.t1, p.t2), 1e-5));
  }
  return checks;
}

inline Grid control_grid(const ControlProblem& cp, int count) {
  const std::vector<double> cuts{cp.t1, cp.t2, cp.t2 - cp.tau};
  return make_grid(cp.t1, cp.t2, count, cuts, kKnotRadius);
}

inline std::vector<Check> verify_control(const io::ProblemFile& f, double tol, int grid) {
  const ControlProblem& cp = *f.control;
  std::vector<Check> checks;
  CollocationScheme scheme;
  const PmpSolution sol = solve_pmp(cp, scheme);
  checks.push_back(Check{"solve_converged", sol.report.residual, scheme.tolerance, true, sol.report.converged(),
                         to_string(sol.report.outcome)});
  double state = 0.0, costate = 0.0, stat = 0.0;
  const Grid g = control_grid(cp, grid);
  for (double t : g.times) {
    const PmpResiduals r = pmp_residuals(cp, sol.triple, sol.lambda, t);
    state = std::max(state, r.state.cwiseAbs().maxCoeff());
    costate = std::max(costate, r.costate.cwiseAbs().maxCoeff());
    stat = std::max(stat, r.stationarity.cwiseAbs().maxCoeff());
  }
  checks.push_back(gate("pmp_state_sup", state, tol));
  checks.push_back(gate("pmp_costate_sup", costate, tol));
  checks.push_back(gate("pmp_stationarity_sup", stat, tol));
  const double end = cp.terminal_state
                         ? (sol.triple.q.eval(cp.t2, 0, Side::Left) - *cp.terminal_state).cwiseAbs().maxCoeff()
                         : sol.triple.p.eval(cp.t2, 0, Side::Left).cwiseAbs().maxCoeff();
  checks.push_back(gate("terminal_policy", end, tol, cp.terminal_state ? "q(t2) fixed" : "p(t2) = 0"));
  ControlSymmetry energy;
  energy.eta = ScalarFunction::constant(1.0);
  std::vector<double> h;
  for (double t : g.times) h.push_back(hamiltonian_noether_quantity(cp, energy, sol.triple, sol.lambda, t));
  const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
  const double dev = h.empty() ? 0.0 : 0.5 * (*hi - *lo);
  if (f.check_hamiltonian)
    checks.push_back(gate("hamiltonian_constancy", dev, 1e-5));
  else
    checks.push_back(report("hamiltonian_constancy", dev, "not gated"));
  return checks;
}

// ------------------------------------------------------------ commands

inline int cmd_list(std::ostream& out) {
  for (const auto& e : registry()) {
    const io::ProblemFile f = e.build();
    const io::json j = io::parse_json(std::string(e.document));
    out << e.name << ',' << (f.control ? "control" : "variational") << ',' << j.value("description", std::string())
        << '\n';
  }
  return kPass;
}

inline int cmd_residuals(const Source& s, int grid, double tol, std::ostream& out) {
  const io::ProblemFile f = load(s);
  const IsoperimetricProblem& p = need_variational(f);
  const Trajectory q = need_trajectory(s, f);
  const Eigen::VectorXd lambda = lambda_of(s, f, p.k());
  const ResidualReport rep = verify(p, q, lambda, tol, grid);
  Sink sink(s.out, out);
  io::write_residual_csv(*sink, rep);
  if (sink.to_file() || s.json) out << io::dump(io::summary_json(rep));
  return kPass;
}

inline int cmd_conserved(const Source& s, int grid, double tol, const std::string& eta, const std::string& xi,
                         const std::string& gauge, std::ostream& out) {
  const io::ProblemFile f = load(s);
  const IsoperimetricProblem& p = need_variational(f);
  const Trajectory q = need_trajectory(s, f);
  const Eigen::VectorXd lambda = lambda_of(s, f, p.k());
  const TransformationGroup g = make_group(p, eta, xi, gauge);
  const AugmentedSetup setup{p, lambda};
  Sink sink(s.out, out);
  *sink << "t,regime,C\n";
  io::json summary = io::json::object();
  for (Regime regime : {Regime::First, Regime::Second}) {
    const Grid gr = regime_grid(p, q, regime, std::max(1, grid / 2));
    std::vector<double> values;
    for (double t : gr.times) {
      values.push_back(noether_quantity(setup, g, q, t, regime));
      *sink << io::num(t) << ',' << to_string(regime) << ',' << io::num(values.back()) << '\n';
    }
    double mean = 0.0, dev = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    for (double v : values) dev = std::max(dev, std::abs(v - mean));
    summary[to_string(regime)] = {{"mean", mean}, {"max_deviation", dev}};
  }
  const ResidualReport rep = verify(p, q, lambda, tol, grid);
  summary["cdur_sup"] = rep.cdur_sup;
  summary["hypothesis_violated"] = rep.hypothesis_violated;
  if (sink.to_file() || s.json) out << io::dump(summary);
  return kPass;
}

inline int cmd_invariance(const Source& s, const std::string& eta, const std::string& xi, const std::string& gauge,
                          std::optional<double> a, std::optional<double> b, std::ostream& out) {
  const io::ProblemFile f = load(s);
  const IsoperimetricProblem& p = need_variational(f);
  const Trajectory q = need_trajectory(s, f);
  const Eigen::VectorXd lambda = lambda_of(s, f, p.k());
  const TransformationGroup g = make_group(p, eta, xi, gauge);
  const AugmentedSetup setup{p, lambda};
  const double defect = invariance_defect(setup, g, q, a.value_or(p.t1), b.value_or(p.t2));
  const auto [first, second] = necessary_condition_defect(setup, g, q);
  Sink sink(s.out, out);
  *sink << io::dump({{"invariance_defect", defect},
                     {"necessary_condition", {{"first", first}, {"second", second}}}});
  return kPass;
}

inline int cmd_solve(const Source& s, const CollocationScheme& scheme, std::ostream& out) {
  const io::ProblemFile f = load(s);
  io::json doc;
  bool converged = false;
  if (f.variational) {
    const IsoperimetricProblem& p = *f.variational;
    std::optional<Trajectory> guess;
    if (!s.trajectory.empty()) guess = io::load_trajectory(s.trajectory);
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(p.k());
    if (!s.lambda.empty()) lam = lambda_of(s, f, p.k());
    const ElSolution sol = solve_el(p, guess, lam, scheme);
    converged = sol.report.converged();
    doc = {{"trajectory", io::trajectory_to_json(sol.trajectory)},
           {"lambda", io::to_json(sol.lambda)},
           {"report", io::to_json(sol.report)}};
  } else {
    const ControlProblem& cp = *f.control;
    std::optional<Eigen::VectorXd> lam;
    if (!s.lambda.empty()) lam = lambda_of(s, f, cp.k());
    const PmpSolution sol = solve_pmp(cp, scheme, lam);
    converged = sol.report.converged();
    doc = {{"q", io::trajectory_to_json(sol.triple.q)},
           {"u", io::trajectory_to_json(sol.triple.u)},
           {"p", io::trajectory_to_json(sol.triple.p)},
           {"lambda", io::to_json(sol.lambda)},
           {"report", io::to_json(sol.report)}};
  }
  Sink sink(s.out, out);
  *sink << io::dump(doc);
  return converged ? kPass : kNonConvergence;
}

inline int cmd_verify(const std::string& name, double tol, int grid, bool as_json, std::ostream& out) {
  const io::ProblemFile f = find_entry(name).build();
  const std::vector<Check> checks = f.variational ? verify_variational(f, tol, grid) : verify_control(f, tol, grid);
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  if (as_json) {
    io::json arr = io::json::array();
    for (const auto& c : checks)
      arr.push_back({{"check", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"gated", c.gated},
                     {"pass", c.pass}, {"note", c.note}});
    io::json doc{{"entry", name}, {"pass", ok}, {"checks", arr}};
    for (const auto& c : checks)
      if (c.name == "hypothesis_violated") doc["hypothesis_violated"] = c.value != 0.0;
    out << io::dump(doc);
  } else {
    out << check_table(checks);
    out << "result," << (ok ? "pass" : "FAIL") << '\n';
  }
  return ok ? kPass : kGatedFailure;
}

}  // namespace detail

/// Entry point shared by the executable and the tests; args exclude the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Delayed higher-order variational problems: residuals, conserved quantities, solving"};
  app.require_subcommand(1);
  detail::Source src;
  int grid = 200;
  double tol = 1e-6;
  std::string eta = "1", xi = "0", gauge = "0";
  std::optional<double> from, to;
  CollocationScheme scheme;

  auto* list = app.add_subcommand("list", "registered problems");

  auto* residuals = app.add_subcommand("residuals", "residual sweep as CSV");
  detail::add_source(residuals, src);
  residuals->add_option("--grid", grid, "grid points");
  residuals->add_option("--tol", tol, "hypothesis tolerance");

  auto* conserved = app.add_subcommand("conserved", "Noether quantity along a trajectory");
  detail::add_source(conserved, src);
  conserved->add_option("--grid", grid, "grid points");
  conserved->add_option("--tol", tol, "hypothesis tolerance");
  conserved->add_option("--eta", eta, "time generator eta(t, q)");
  conserved->add_option("--xi", xi, "space generators xi(t, q), ';' separated");
  conserved->add_option("--gauge", gauge, "gauge term over the integrand arguments");

  auto* invariance = app.add_subcommand("invariance", "invariance defect of a transformation group");
  detail::add_source(invariance, src);
  invariance->add_option("--eta", eta, "time generator eta(t, q)");
  invariance->add_option("--xi", xi, "space generators xi(t, q), ';' separated");
  invariance->add_option("--gauge", gauge, "gauge term over the integrand arguments");
  invariance->add_option("--from", from, "interval start (default t1)");
  invariance->add_option("--to", to, "interval end (default t2)");

  auto* solve = app.add_subcommand("solve", "collocation solve");
  detail::add_source(solve, src);
  solve->add_option("--nodes", scheme.nodes, "mesh intervals");
  solve->add_option("--tol", scheme.tolerance, "residual tolerance");
  solve->add_option("--maxiter", scheme.max_iterations, "Newton iterations");

  std::string entry;
  auto* verify_cmd = app.add_subcommand("verify", "gated verification of a registry entry");
  verify_cmd->add_option("name", entry, "registry entry")->required();
  verify_cmd->add_option("--tol", tol, "tolerance");
  verify_cmd->add_option("--grid", grid, "grid points");
  verify_cmd->add_flag("--json", src.json, "JSON output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }

  try {
    if (list->parsed()) return detail::cmd_list(out);
    if (grid <= 0) throw Error(ErrorCode::EmptyGrid, "--grid must be positive");
    if (residuals->parsed()) return detail::cmd_residuals(src, grid, tol, out);
    if (conserved->parsed()) return detail::cmd_conserved(src, grid, tol, eta, xi, gauge, out);
    if (invariance->parsed()) return detail::cmd_invariance(src, eta, xi, gauge, from, to, out);
    if (solve->parsed()) {
      if (scheme.max_iterations < 0 || !(scheme.tolerance > 0.0))
        throw Error(ErrorCode::InvalidInput, "--maxiter must be >= 0 and --tol > 0");
      return detail::cmd_solve(src, scheme, out);
    }
    if (verify_cmd->parsed()) return detail::cmd_verify(entry, tol, grid, src.json, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
  return kInvalidInput;
}

}  // namespace delvar::cli
