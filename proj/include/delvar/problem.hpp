#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "delvar/calculus.hpp"
#include "delvar/error.hpp"
#include "delvar/function.hpp"
#include "delvar/integrand.hpp"
#include "delvar/trajectory.hpp"

namespace delvar {

/// Problem of order m: minimise the integral of L[q](t) over [t1, t2] subject to
/// integral constraints of g[q] equal to l, a prescribed history on
/// [t1 - tau, t1] and terminal data q^(i)(t2), i < m.
struct IsoperimetricProblem {
  int m = 1;
  int n = 1;
  double tau = 0.5;
  double t1 = 0.0;
  double t2 = 1.0;
  Integrand L;
  std::vector<Integrand> g;
  Eigen::VectorXd l = Eigen::VectorXd::Zero(0);
  /// One unary function of time per state component.
  std::vector<ScalarFunction> history;
  /// terminal[i] = q^(i)(t2), i = 0..m-1.  Empty when the end is free.
  std::vector<Eigen::VectorXd> terminal;

  int k() const { return static_cast<int>(g.size()); }
  ArgLayout layout() const { return ArgLayout::variational(n, m); }

  void validate() const {
    if (m < 1 || n < 1) throw Error(ErrorCode::InvalidProblem, "m and n must be positive");
    if (!(t1 < t2)) throw Error(ErrorCode::InvalidProblem, "t1 must be smaller than t2");
    if (!(tau > 0.0) || !(tau < t2 - t1)) throw Error(ErrorCode::InvalidProblem, "tau must lie in (0, t2 - t1)");
    if (l.size() != k()) throw Error(ErrorCode::InvalidProblem, "g and l differ in length");
    if (!history.empty() && static_cast<int>(history.size()) != n)
      throw Error(ErrorCode::InvalidProblem, "history needs one function per component");
    if (!terminal.empty() && static_cast<int>(terminal.size()) != m)
      throw Error(ErrorCode::InvalidProblem, "terminal data needs q^(i)(t2) for i = 0..m-1");
    for (const auto& v : terminal)
      if (v.size() != n) throw Error(ErrorCode::InvalidProblem, "terminal vector has wrong dimension");
  }

  /// History derivatives 0..order at t as an n x (order+1) matrix.
  Eigen::MatrixXd history_derivatives(double t, int order) const;
};

/// Problem plus multipliers, defining F = L - lambda . g.
struct AugmentedSetup {
  IsoperimetricProblem problem;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(0);
};

/// Delayed control problem over the layout (t; q; u; q(t-tau); u(t-tau)).
struct ControlProblem {
  int n = 1;
  int mc = 1;
  double tau = 0.5;
  double t1 = 0.0;
  double t2 = 1.0;
  Integrand L;
  /// Velocity map, one integrand per state component.
  std::vector<Integrand> phi;
  std::vector<Integrand> g;
  Eigen::VectorXd l = Eigen::VectorXd::Zero(0);
  std::vector<ScalarFunction> history;
  /// Control values before t1; zero when empty.
  std::vector<ScalarFunction> control_history;
  /// When set, q(t2) is fixed and p(t2) is free; otherwise p(t2) = 0.
  std::optional<Eigen::VectorXd> terminal_state;

  int k() const { return static_cast<int>(g.size()); }
  ArgLayout layout() const { return ArgLayout::control(n, mc); }

  void validate() const {
    if (n < 1 || mc < 1) throw Error(ErrorCode::InvalidProblem, "n and mc must be positive");
    if (!(t1 < t2)) throw Error(ErrorCode::InvalidProblem, "t1 must be smaller than t2");
    if (!(tau > 0.0) || !(tau < t2 - t1)) throw Error(ErrorCode::InvalidProblem, "tau must lie in (0, t2 - t1)");
    if (static_cast<int>(phi.size()) != n) throw Error(ErrorCode::InvalidProblem, "phi needs n components");
    if (l.size() != k()) throw Error(ErrorCode::InvalidProblem, "g and l differ in length");
    if (!history.empty() && static_cast<int>(history.size()) != n)
      throw Error(ErrorCode::InvalidProblem, "history needs one function per state component");
    if (!control_history.empty() && static_cast<int>(control_history.size()) != mc)
      throw Error(ErrorCode::InvalidProblem, "control history needs one function per control component");
    if (terminal_state && terminal_state->size() != n)
      throw Error(ErrorCode::InvalidProblem, "terminal state has wrong dimension");
  }
};

/// Generators of t -> t + s eta(t, q), q -> q + s xi(t, q), with gauge term Phi
/// over the variational layout.
struct TransformationGroup {
  ScalarFunction eta = ScalarFunction::constant(0.0);
  std::vector<ScalarFunction> xi;
  Integrand gauge;
};

/// Generators over (t, q, u) for control problems.
struct ControlSymmetry {
  ScalarFunction eta = ScalarFunction::constant(0.0);
  std::vector<ScalarFunction> xi;
  std::vector<ScalarFunction> varrho;
  std::vector<ScalarFunction> varsigma;
};

// ------------------------------------------------------------ history

namespace detail {

/// Derivatives 0..order of a unary time function, as a vector.
inline Eigen::VectorXd time_derivatives(const ScalarFunction& f, double t, int order, const StencilConfig& cfg) {
  Eigen::VectorXd out(order + 1);
  if (f.differentiable() && order <= kMaxJetOrder) {
    J1 j = eval_in_time<double>(f, t, order);
    for (int r = 0; r <= order; ++r) out[r] = j.c[r] * factorial(r);
    return out;
  }
  auto fn = [&f](double s) { return f(std::span<const double>(&s, 1)); };
  for (int r = 0; r <= order; ++r) out[r] = total_derivative(fn, t, r, cfg);
  return out;
}

}  // namespace detail

inline Eigen::MatrixXd IsoperimetricProblem::history_derivatives(double t, int order) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, order + 1);
  if (history.empty()) return out;
  StencilConfig cfg{tau * 1e-4, {t1 - tau, t1}};
  for (int c = 0; c < n; ++c) out.row(c) = detail::time_derivatives(history[c], t, order, cfg).transpose();
  return out;
}

// ------------------------------------------------------------ augmented integrand

/// F = L - sum_j lambda_j g_j.
inline Integrand augmented_integrand(const AugmentedSetup& setup) {
  const auto& p = setup.problem;
  if (setup.lambda.size() != p.k()) throw Error(ErrorCode::InvalidProblem, "lambda has wrong length");
  std::vector<Integrand> parts{p.L};
  std::vector<double> weights{1.0};
  for (int j = 0; j < p.k(); ++j) {
    parts.push_back(p.g[j]);
    weights.push_back(-setup.lambda[j]);
  }
  if (parts.size() == 1) return p.L;
  return linear_combination(parts, weights);
}

// ------------------------------------------------------------ path arguments

namespace detail {

/// [q]^m_tau(u): (u, q(u), .., q^(m)(u), q(u-tau), .., q^(m)(u-tau)).
inline std::vector<double> path_args(const Trajectory& q, int m, double tau, double u, Side side = Side::Right) {
  const int n = q.dimension();
  std::vector<double> args(1 + 2 * n * (m + 1));
  args[0] = u;
  const Eigen::MatrixXd now = q.derivatives(u, m, side);
  const Eigen::MatrixXd past = q.derivatives(u - tau, m, side);
  for (int j = 0; j <= m; ++j)
    for (int c = 0; c < n; ++c) {
      args[1 + j * n + c] = now(c, j);
      args[1 + (m + 1) * n + j * n + c] = past(c, j);
    }
  return args;
}

/// Taylor jets in time of the same arguments, expanded about u.
inline std::vector<J1> path_jets(const Trajectory& q, int m, double tau, double u, int order, Side side = Side::Right) {
  if (order > kMaxJetOrder) throw Error(ErrorCode::OrderTooHigh, "jet order limit exceeded");
  const int n = q.dimension();
  std::vector<J1> args(1 + 2 * n * (m + 1), J1::truncated(order));
  args[0] = time_jet(u, order);
  const Eigen::MatrixXd now = q.derivatives(u, m + order, side);
  const Eigen::MatrixXd past = q.derivatives(u - tau, m + order, side);
  for (int j = 0; j <= m; ++j)
    for (int c = 0; c < n; ++c) {
      J1& a = args[1 + j * n + c];
      J1& b = args[1 + (m + 1) * n + j * n + c];
      for (int r = 0; r <= order; ++r) {
        a.c[r] = now(c, j + r) / factorial(r);
        b.c[r] = past(c, j + r) / factorial(r);
      }
    }
  return args;
}

/// Series of d f / d x_slot along jet arguments.
inline J1 slot_partial_series(const ScalarFunction& f, const std::vector<J1>& args, int slot) {
  std::vector<JD> x(args.size());
  for (std::size_t i = 0; i < args.size(); ++i) {
    x[i] = JD::truncated(args[i].order);
    for (int r = 0; r <= args[i].order; ++r) x[i].c[r] = D1(args[i].c[r], 0.0);
  }
  x[slot].c[0].d = 1.0;
  const JD out = f(std::span<const JD>(x));
  J1 res = J1::truncated(out.order);
  for (int r = 0; r <= out.order; ++r) res.c[r] = out.c[r].d;
  return res;
}

/// d/dt of a time series.
inline J1 series_derivative(const J1& a, int times = 1) {
  J1 r = a;
  for (int s = 0; s < times; ++s) {
    J1 next = J1::truncated(std::max(r.order - 1, 0));
    if (r.order == 0) {
      next.c[0] = 0.0;
    } else {
      for (int k = 0; k < r.order; ++k) next.c[k] = double(k + 1) * r.c[k + 1];
    }
    r = next;
  }
  return r;
}

/// Series of one trajectory component's j-th derivative about u.
inline J1 trajectory_series(const Trajectory& q, int component, int j, double u, int order, Side side) {
  const Eigen::MatrixXd d = q.derivatives(u, j + order, side);
  J1 r = J1::truncated(order);
  for (int k = 0; k <= order; ++k) r.c[k] = d(component, j + k) / factorial(k);
  return r;
}

/// Times where F[q] or its advanced copy may lose smoothness.
inline std::vector<double> smoothness_breaks(const Trajectory& q, double tau, double t1, double t2) {
  std::vector<double> out{t1, t2, t2 - tau, q.start(), q.end()};
  for (double b : q.breakpoints()) {
    out.push_back(b);
    out.push_back(b + tau);
    out.push_back(b - tau);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)); }),
            out.end());
  return out;
}

inline void require_window(const Trajectory& q, double tau, double t1, double t2) {
  const double slack = 1e-12 * (1.0 + std::abs(t1) + std::abs(t2));
  if (q.start() > t1 - tau + slack || q.end() < t2 - slack)
    throw Error(ErrorCode::OutOfDomain, "trajectory does not cover [t1 - tau, t2]");
}

}  // namespace detail

// ------------------------------------------------------------ functionals

inline double functional_value(const IsoperimetricProblem& p, const Integrand& f, const Trajectory& q) {
  detail::require_window(q, p.tau, p.t1, p.t2);
  const std::vector<double> breaks = detail::smoothness_breaks(q, p.tau, p.t1, p.t2);
  return integrate([&](double t) { return f(detail::path_args(q, p.m, p.tau, t)); }, p.t1, p.t2, breaks);
}

inline double functional_value(const IsoperimetricProblem& p, const Trajectory& q) {
  return functional_value(p, p.L, q);
}

inline Eigen::VectorXd constraint_values(const IsoperimetricProblem& p, const Trajectory& q) {
  detail::require_window(q, p.tau, p.t1, p.t2);
  Eigen::VectorXd out(p.k());
  if (p.k() == 0) return out;
  const std::vector<double> breaks = detail::smoothness_breaks(q, p.tau, p.t1, p.t2);
  out = integrate(
      [&](double t) {
        const std::vector<double> args = detail::path_args(q, p.m, p.tau, t);
        Eigen::VectorXd v(p.k());
        for (int j = 0; j < p.k(); ++j) v[j] = p.g[j](args);
        return v;
      },
      p.t1, p.t2, breaks);
  return out;
}

inline Eigen::VectorXd constraint_defect(const IsoperimetricProblem& p, const Trajectory& q) {
  return constraint_values(p, q) - p.l;
}

}  // namespace delvar
