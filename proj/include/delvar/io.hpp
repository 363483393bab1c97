#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "delvar/euler_lagrange.hpp"
#include "delvar/expr.hpp"
#include "delvar/optimal_control.hpp"
#include "delvar/problem.hpp"
#include "delvar/solver.hpp"
#include "delvar/trajectory.hpp"

namespace delvar::io {

using json = nlohmann::json;

inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Problem document: a variational or control problem plus optional reference data.
struct ProblemFile {
  std::string name;
  std::string description;
  std::optional<IsoperimetricProblem> variational;
  std::optional<ControlProblem> control;
  std::optional<Trajectory> trajectory;
  std::optional<Eigen::VectorXd> lambda;
  std::optional<double> expected_J;
  std::optional<Eigen::VectorXd> expected_I;
  /// Run solve_el and compare against the reference trajectory.
  bool check_solve = false;
  /// Gate constancy of H along the Pontryagin solution.
  bool check_hamiltonian = false;
  /// Expression text kept for reporting.
  std::vector<std::string> history_text;
};

namespace detail {

[[noreturn]] inline void bad(const std::string& what) { throw Error(ErrorCode::InvalidInput, what); }

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline double number(const json& j, const char* what) {
  if (!j.is_number()) bad(std::string("field '") + what + "' must be a number");
  return j.get<double>();
}

inline int integer(const json& j, const char* what) {
  if (!j.is_number_integer()) bad(std::string("field '") + what + "' must be an integer");
  return j.get<int>();
}

inline Eigen::VectorXd vector(const json& j, const char* what) {
  if (j.is_number()) return Eigen::VectorXd::Constant(1, j.get<double>());
  if (!j.is_array()) bad(std::string("field '") + what + "' must be an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], what);
  return v;
}

inline std::vector<std::string> strings(const json& j, const char* what) {
  std::vector<std::string> out;
  if (j.is_string()) {
    out.push_back(j.get<std::string>());
  } else if (j.is_array()) {
    for (const auto& e : j) {
      if (!e.is_string()) bad(std::string("field '") + what + "' must hold expression strings");
      out.push_back(e.get<std::string>());
    }
  } else {
    bad(std::string("field '") + what + "' must be a string or an array of strings");
  }
  return out;
}

inline std::vector<ScalarFunction> time_functions(const json& j, const char* what, int count) {
  std::vector<ScalarFunction> out;
  for (const auto& s : strings(j, what)) out.push_back(expr::compile(s, expr::Binding::time()));
  if (static_cast<int>(out.size()) != count)
    bad(std::string("field '") + what + "' needs " + std::to_string(count) + " expressions");
  return out;
}

inline int derivative_key(const std::string& key) {
  if (key == "q") return 0;
  if (key == "qd") return 1;
  if (key == "qdd") return 2;
  if (key.size() >= 2 && key[0] == 'd') {
    int v = 0;
    for (std::size_t i = 1; i < key.size(); ++i) {
      if (key[i] < '0' || key[i] > '9') return -1;
      v = v * 10 + (key[i] - '0');
    }
    return v;
  }
  return -1;
}

}  // namespace detail

// ------------------------------------------------------------ trajectories

/// Segments carry "coeffs" per component in powers of t ("monomial", the
/// default) or of t - midpoint ("centered").
inline Trajectory trajectory_from_json(const json& j) {
  const int n = detail::integer(detail::require(j, "n"), "n");
  const int m = j.contains("m") ? detail::integer(j.at("m"), "m") : 0;
  const json& segs = detail::require(j, "segments");
  if (!segs.is_array() || segs.empty()) detail::bad("trajectory needs at least one segment");
  std::vector<PolySegment> out;
  for (const auto& s : segs) {
    const double a = detail::number(detail::require(s, "a"), "a");
    const double b = detail::number(detail::require(s, "b"), "b");
    const std::string basis = s.value("basis", std::string("monomial"));
    const json& cj = detail::require(s, "coeffs");
    if (!cj.is_array() || static_cast<int>(cj.size()) != n) detail::bad("segment needs one coefficient list per component");
    std::vector<std::vector<double>> coeffs;
    for (const auto& row : cj) {
      const Eigen::VectorXd v = detail::vector(row, "coeffs");
      if (v.size() == 0) detail::bad("empty coefficient list");
      coeffs.emplace_back(v.data(), v.data() + v.size());
    }
    if (basis == "monomial") {
      out.push_back(PolySegment::from_monomial(a, b, coeffs));
    } else if (basis == "centered") {
      out.emplace_back(a, b, std::move(coeffs));
    } else {
      detail::bad("unknown basis '" + basis + "'");
    }
  }
  std::vector<double> knots;
  if (j.contains("nonsmooth_knots")) {
    const Eigen::VectorXd k = detail::vector(j.at("nonsmooth_knots"), "nonsmooth_knots");
    knots.assign(k.data(), k.data() + k.size());
  }
  return Trajectory(n, m, std::move(out), std::move(knots));
}

inline json trajectory_to_json(const Trajectory& q) {
  json segs = json::array();
  for (const auto& s : q.segments()) segs.push_back({{"a", s.start()}, {"b", s.end()}, {"basis", "centered"}, {"coeffs", s.coefficients()}});
  return {{"n", q.dimension()}, {"m", q.smoothness()}, {"nonsmooth_knots", q.nonsmooth_knots()}, {"segments", segs}};
}

inline json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// ------------------------------------------------------------ problems

inline IsoperimetricProblem variational_from_json(const json& j, std::vector<std::string>* history_text = nullptr) {
  IsoperimetricProblem p;
  p.m = detail::integer(detail::require(j, "m"), "m");
  p.n = detail::integer(detail::require(j, "n"), "n");
  if (p.m < 1 || p.n < 1 || p.m > 4 || p.n > 8) detail::bad("m must be in 1..4 and n in 1..8");
  p.tau = detail::number(detail::require(j, "tau"), "tau");
  p.t1 = detail::number(detail::require(j, "t1"), "t1");
  p.t2 = detail::number(detail::require(j, "t2"), "t2");
  const expr::Binding b = expr::Binding::variational(p.m, p.n);
  p.L = expr::compile_integrand(detail::require(j, "L").get<std::string>(), b);
  if (j.contains("g"))
    for (const auto& s : detail::strings(j.at("g"), "g")) p.g.push_back(expr::compile_integrand(s, b));
  p.l = j.contains("l") ? detail::vector(j.at("l"), "l") : Eigen::VectorXd::Zero(0);
  if (j.contains("k") && detail::integer(j.at("k"), "k") != p.k()) detail::bad("k does not match the number of g entries");
  if (j.contains("history")) {
    p.history = detail::time_functions(j.at("history"), "history", p.n);
    if (history_text) *history_text = detail::strings(j.at("history"), "history");
  }
  if (j.contains("boundary")) {
    const json& bj = j.at("boundary");
    if (!bj.is_object()) detail::bad("boundary must be an object");
    p.terminal.assign(p.m, Eigen::VectorXd());
    for (auto it = bj.begin(); it != bj.end(); ++it) {
      const int d = detail::derivative_key(it.key());
      if (d < 0 || d >= p.m) detail::bad("boundary key '" + it.key() + "' is not a derivative below m");
      p.terminal[d] = detail::vector(it.value(), "boundary");
    }
    for (const auto& v : p.terminal)
      if (v.size() == 0) detail::bad("boundary must give q^(i)(t2) for every i < m");
  }
  p.validate();
  return p;
}

inline ControlProblem control_from_json(const json& j) {
  ControlProblem cp;
  cp.n = detail::integer(detail::require(j, "n"), "n");
  cp.mc = detail::integer(detail::require(j, "mc"), "mc");
  if (cp.n < 1 || cp.mc < 1 || cp.n > 8 || cp.mc > 8) detail::bad("n and mc must be in 1..8");
  cp.tau = detail::number(detail::require(j, "tau"), "tau");
  cp.t1 = detail::number(detail::require(j, "t1"), "t1");
  cp.t2 = detail::number(detail::require(j, "t2"), "t2");
  const expr::Binding b = expr::Binding::control(cp.n, cp.mc);
  cp.L = expr::compile_integrand(detail::require(j, "L").get<std::string>(), b);
  for (const auto& s : detail::strings(detail::require(j, "phi"), "phi")) cp.phi.push_back(expr::compile_integrand(s, b));
  if (j.contains("g"))
    for (const auto& s : detail::strings(j.at("g"), "g")) cp.g.push_back(expr::compile_integrand(s, b));
  cp.l = j.contains("l") ? detail::vector(j.at("l"), "l") : Eigen::VectorXd::Zero(0);
  if (j.contains("history")) cp.history = detail::time_functions(j.at("history"), "history", cp.n);
  if (j.contains("control_history"))
    cp.control_history = detail::time_functions(j.at("control_history"), "control_history", cp.mc);
  if (j.contains("terminal_state")) cp.terminal_state = detail::vector(j.at("terminal_state"), "terminal_state");
  cp.validate();
  return cp;
}

inline ProblemFile problem_from_json(const json& j) {
  if (!j.is_object()) detail::bad("problem document must be a JSON object");
  ProblemFile f;
  f.name = j.value("name", std::string());
  f.description = j.value("description", std::string());
  const std::string type = j.value("type", std::string("variational"));
  if (type == "variational") {
    f.variational = variational_from_json(j, &f.history_text);
  } else if (type == "control") {
    f.control = control_from_json(j);
  } else {
    detail::bad("unknown problem type '" + type + "'");
  }
  if (j.contains("trajectory")) f.trajectory = trajectory_from_json(j.at("trajectory"));
  if (j.contains("lambda")) f.lambda = detail::vector(j.at("lambda"), "lambda");
  if (j.contains("expected")) {
    const json& e = j.at("expected");
    if (e.contains("J")) f.expected_J = detail::number(e.at("J"), "J");
    if (e.contains("I")) f.expected_I = detail::vector(e.at("I"), "I");
  }
  if (j.contains("checks")) {
    f.check_solve = j.at("checks").value("solve", false);
    f.check_hamiltonian = j.at("checks").value("hamiltonian_constant", false);
  }
  return f;
}

inline json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed JSON: ") + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ProblemFile load_problem(const std::string& path) { return problem_from_json(parse_json(read_file(path))); }

inline Trajectory load_trajectory(const std::string& path) {
  json j = parse_json(read_file(path));
  if (j.contains("trajectory")) j = j.at("trajectory");
  try {
    return trajectory_from_json(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, e.what());
  }
}

// ------------------------------------------------------------ reports

inline json to_json(const SolveReport& r) {
  return {{"outcome", to_string(r.outcome)}, {"converged", r.converged()}, {"iterations", r.iterations},
          {"residual", r.residual}, {"lambda", to_json(r.lambda)},
          {"condition", std::isfinite(r.condition) ? json(r.condition) : json(nullptr)}, {"message", r.message}};
}

inline json summary_json(const ResidualReport& r) {
  json j = {{"points", r.grid.size()},
            {"el_sup", r.el_sup()},
            {"el_sup_first", r.el_sup_first},
            {"el_sup_second", r.el_sup_second},
            {"dr_residual_sup", r.dr_sup},
            {"cdur_sup", r.cdur_sup},
            {"constraint_defect", to_json(r.constraint_defect)},
            {"hypothesis_violated", r.hypothesis_violated},
            {"abnormal", r.abnormal}};
  j["classification"] = r.classification ? json(to_string(*r.classification)) : json(nullptr);
  return j;
}

/// Residual table: t, regime, el components, dr quantity, dr residual, cdur.
inline void write_residual_csv(std::ostream& out, const ResidualReport& r) {
  const std::size_t n = r.el.empty() ? 0 : static_cast<std::size_t>(r.el.front().size());
  out << "t,regime";
  for (std::size_t c = 0; c < n; ++c) out << ",el_" << c;
  out << ",dr_quantity,dr_residual,cdur\n";
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    out << num(r.grid.times[i]) << ',' << to_string(r.regimes[i]);
    for (std::size_t c = 0; c < n; ++c) out << ',' << num(r.el[i][static_cast<Eigen::Index>(c)]);
    out << ',' << num(r.dr_quantity[i]) << ',' << num(r.dr_residual[i]) << ',';
    if (r.cdur[i]) out << num(*r.cdur[i]);
    out << '\n';
  }
}

/// Json output with numbers at 17 significant digits.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace delvar::io
