#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "delvar/calculus.hpp"
#include "delvar/detail/path.hpp"
#include "delvar/dubois_reymond.hpp"
#include "delvar/problem.hpp"
#include "delvar/trajectory.hpp"

namespace delvar {

/// Arguments of the Hamiltonian: (t, q, u, q(t-tau), u(t-tau), p, lambda).
struct ControlArgs {
  double t = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd u;
  Eigen::VectorXd q_tau;
  Eigen::VectorXd u_tau;
  Eigen::VectorXd p;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(0);

  /// Flat (t; q; u; q_tau; u_tau) vector for the integrands.
  std::vector<double> flat() const {
    std::vector<double> a;
    a.reserve(1 + 2 * (q.size() + u.size()));
    a.push_back(t);
    for (const Eigen::VectorXd* v : {&q, &u, &q_tau, &u_tau})
      for (Eigen::Index i = 0; i < v->size(); ++i) a.push_back((*v)[i]);
    return a;
  }
};

/// State, control and costate paths.  q and u cover [t1 - tau, t2], p covers [t1, t2].
struct PontryaginTriple {
  Trajectory q;
  Trajectory u;
  Trajectory p;
};

namespace detail {

inline void check_args(const ControlProblem& cp, const ControlArgs& a) {
  if (a.q.size() != cp.n || a.q_tau.size() != cp.n || a.p.size() != cp.n || a.u.size() != cp.mc ||
      a.u_tau.size() != cp.mc || a.lambda.size() != cp.k())
    throw Error(ErrorCode::InvalidInput, "control arguments have wrong dimensions");
}

}  // namespace detail

/// H = L - lambda . g + p . phi.
inline double hamiltonian(const ControlProblem& cp, const ControlArgs& a) {
  detail::check_args(cp, a);
  const std::vector<double> x = a.flat();
  double h = cp.L(x);
  for (int j = 0; j < cp.k(); ++j) h -= a.lambda[j] * cp.g[j](x);
  for (int c = 0; c < cp.n; ++c) h += a.p[c] * cp.phi[c](x);
  return h;
}

/// Block partial of H in the 7-slot order (t, q, u, q_tau, u_tau, p, lambda).
inline Eigen::VectorXd hamiltonian_partial(const ControlProblem& cp, const ControlArgs& a, int block) {
  detail::check_args(cp, a);
  const std::vector<double> x = a.flat();
  if (block == 6) {
    Eigen::VectorXd out(cp.n);
    for (int c = 0; c < cp.n; ++c) out[c] = cp.phi[c](x);
    return out;
  }
  if (block == 7) {
    Eigen::VectorXd out(cp.k());
    for (int j = 0; j < cp.k(); ++j) out[j] = -cp.g[j](x);
    return out;
  }
  const ArgLayout layout = cp.layout();
  if (block < 1 || block > 7) throw Error(ErrorCode::BlockOutOfRange, "Hamiltonian block " + std::to_string(block));
  Eigen::VectorXd out = partial(cp.L, layout, block, x);
  for (int j = 0; j < cp.k(); ++j) out -= a.lambda[j] * partial(cp.g[j], layout, block, x);
  for (int c = 0; c < cp.n; ++c) out += a.p[c] * partial(cp.phi[c], layout, block, x);
  return out;
}

/// Arguments along a triple at time t.
inline ControlArgs triple_args(const ControlProblem& cp, const PontryaginTriple& tr, const Eigen::VectorXd& lambda,
                               double t, Side side = Side::Right) {
  ControlArgs a;
  a.t = t;
  a.q = tr.q.eval(t, 0, side);
  a.u = tr.u.eval(t, 0, side);
  a.q_tau = tr.q.eval(t - cp.tau, 0, side);
  a.u_tau = tr.u.eval(t - cp.tau, 0, side);
  a.p = tr.p.eval(t, 0, side);
  a.lambda = lambda;
  return a;
}

struct PmpResiduals {
  Eigen::VectorXd state;
  Eigen::VectorXd costate;
  Eigen::VectorXd stationarity;
};

/// Residuals of the delayed Hamiltonian system and stationarity condition.
inline PmpResiduals pmp_residuals(const ControlProblem& cp, const PontryaginTriple& tr, const Eigen::VectorXd& lambda,
                                  double t, Side side = Side::Right) {
  const double slack = 1e-12 * (1.0 + std::abs(t));
  if (t < cp.t1 - slack || t > cp.t2 + slack) throw Error(ErrorCode::OutOfDomain, "PMP residuals live on [t1, t2]");
  const ControlArgs a = triple_args(cp, tr, lambda, t, side);
  PmpResiduals r;
  r.state = tr.q.derivatives(t, 1, side).col(1) - hamiltonian_partial(cp, a, 6);
  r.costate = tr.p.derivatives(t, 1, side).col(1) + hamiltonian_partial(cp, a, 2);
  r.stationarity = hamiltonian_partial(cp, a, 3);
  if (regime_of(t, cp.t2, cp.tau) == Regime::First) {
    const ControlArgs adv = triple_args(cp, tr, lambda, t + cp.tau, side);
    r.costate += hamiltonian_partial(cp, adv, 4);
    r.stationarity += hamiltonian_partial(cp, adv, 5);
  }
  return r;
}

/// -p . xi + H eta along a triple; the same expression on both regimes.
inline double hamiltonian_noether_quantity(const ControlProblem& cp, const ControlSymmetry& sym,
                                           const PontryaginTriple& tr, const Eigen::VectorXd& lambda, double t) {
  const ControlArgs a = triple_args(cp, tr, lambda, t);
  std::vector<double> x{t};
  for (Eigen::Index i = 0; i < a.q.size(); ++i) x.push_back(a.q[i]);
  for (Eigen::Index i = 0; i < a.u.size(); ++i) x.push_back(a.u[i]);
  const std::span<const double> xs(x);
  double c = hamiltonian(cp, a) * sym.eta(xs);
  for (int i = 0; i < cp.n && !sym.xi.empty(); ++i) c -= a.p[i] * sym.xi[i](xs);
  return c;
}

/// Constant time generator with block generators for q and its first derivative.
struct SecondOrderGroup {
  double eta = 0.0;
  std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& q)> xi0;
  std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& q, const Eigen::VectorXd& qd)> xi1;
};

/// Second-order Noether quantity built from partials of F directly.
inline double second_order_noether_quantity(const AugmentedSetup& setup, const Trajectory& q, double t, Regime regime,
                                            const SecondOrderGroup& g) {
  const auto& p = setup.problem;
  if (p.m != 2) throw Error(ErrorCode::WrongOrder, "second-order quantity needs m = 2");
  const detail::PathEval path = detail::path_for(setup, q);
  const int n = p.n;
  // Momenta written out: d3F + d6F(t+tau) - d/dt(d4F + d7F(t+tau)) and d4F + d7F(t+tau).
  std::vector<J1> b3 = path.partial(t, 3, 0);
  std::vector<J1> b4 = path.partial(t, 4, 1);
  if (regime == Regime::First) {
    const std::vector<J1> b6 = path.partial(t + p.tau, 6, 0);
    const std::vector<J1> b7 = path.partial(t + p.tau, 7, 1);
    for (int c = 0; c < n; ++c) {
      b3[c] = b3[c] + b6[c];
      b4[c] = b4[c] + b7[c];
    }
  }
  Eigen::VectorXd p0(n), p1(n);
  for (int c = 0; c < n; ++c) {
    p0[c] = b3[c].c[0] - b4[c].c[1];
    p1[c] = b4[c].c[0];
  }
  const Eigen::MatrixXd d = q.derivatives(t, 2);
  const Eigen::VectorXd xi0 = g.xi0 ? g.xi0(t, d.col(0)) : Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd xi1 = g.xi1 ? g.xi1(t, d.col(0), d.col(1)) : Eigen::VectorXd::Zero(n);
  const double F = path.value(t, 0).c[0];
  return F * g.eta + p0.dot(xi0 - d.col(1) * g.eta) + p1.dot(xi1 - d.col(2) * g.eta);
}

/// Chain-system form of an m = 2, n = 1 problem: state (q, qd), control qdd.
/// The control layout (t, q0, q1, u, q0_tau, q1_tau, u_tau) has the same slot
/// order as the variational one, so integrands carry over unchanged.
inline ControlProblem reduce_to_control(const IsoperimetricProblem& p) {
  if (p.m != 2 || p.n != 1) throw Error(ErrorCode::WrongOrder, "reduction is defined for m = 2, n = 1");
  ControlProblem cp;
  cp.n = 2;
  cp.mc = 1;
  cp.tau = p.tau;
  cp.t1 = p.t1;
  cp.t2 = p.t2;
  cp.L = p.L;
  cp.g = p.g;
  cp.l = p.l;
  auto slot = [](int index) {
    return Integrand(ScalarFunction::generic([index](auto args) { return args[index]; }, 7));
  };
  cp.phi = {slot(2), slot(3)};
  if (!p.history.empty()) {
    cp.history = {p.history[0], time_derivative_of(p.history[0])};
    cp.control_history = {time_derivative_of(time_derivative_of(p.history[0]))};
  }
  if (p.terminal.size() == 2) {
    Eigen::VectorXd end(2);
    end << p.terminal[0][0], p.terminal[1][0];
    cp.terminal_state = end;
  }
  return cp;
}

}  // namespace delvar
