#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "delvar/delvar.hpp"

namespace support {

using namespace delvar;

/// Example 1: L = (qdd + qdd_tau)^2, g = (qd + qd_tau)^2 on [0, 2], tau = 1.
inline IsoperimetricProblem example1(double l = 249.6) {
  IsoperimetricProblem p;
  p.m = 2;
  p.n = 1;
  p.tau = 1.0;
  p.t1 = 0.0;
  p.t2 = 2.0;
  p.L = Integrand(ScalarFunction::generic([](auto a) { return (a[3] + a[6]) * (a[3] + a[6]); }, 7));
  p.g = {Integrand(ScalarFunction::generic([](auto a) { return (a[2] + a[5]) * (a[2] + a[5]); }, 7))};
  p.l = Eigen::VectorXd::Constant(1, l);
  p.history = {ScalarFunction::generic([](auto a) { return -(a[0] * a[0] * a[0] * a[0]); }, 1)};
  p.terminal = {Eigen::VectorXd::Constant(1, -14.0), Eigen::VectorXd::Constant(1, -32.0)};
  return p;
}

/// L = qd^2, g = q, l = 1/6 on [0, 1], tau = 0.5, history t(1 - t), q(1) = 0.
inline IsoperimetricProblem classical() {
  IsoperimetricProblem p;
  p.m = 1;
  p.n = 1;
  p.tau = 0.5;
  p.t1 = 0.0;
  p.t2 = 1.0;
  p.L = Integrand(ScalarFunction::generic([](auto a) { return a[2] * a[2]; }, 5));
  p.g = {Integrand(ScalarFunction::generic([](auto a) { return a[1]; }, 5))};
  p.l = Eigen::VectorXd::Constant(1, 1.0 / 6.0);
  p.history = {ScalarFunction::generic([](auto a) { return a[0] * (1.0 - a[0]); }, 1)};
  p.terminal = {Eigen::VectorXd::Zero(1)};
  return p;
}

/// q(t) = t(1 - t) on [-0.5, 1].
inline Trajectory parabola() {
  return Trajectory(1, 2, {PolySegment::from_monomial(-0.5, 1.0, {{0.0, 1.0, -1.0}})});
}

/// Single polynomial segment with the given monomial coefficients.
inline Trajectory poly(double a, double b, std::vector<double> c, int m = 2) {
  return Trajectory(1, m, {PolySegment::from_monomial(a, b, {std::move(c)})});
}

/// Delayed LQ: L = u^2, phi = q_tau + u on [0, 1], tau = 0.5.
inline ControlProblem delayed_lq(bool fixed_end) {
  ControlProblem cp;
  cp.n = 1;
  cp.mc = 1;
  cp.tau = 0.5;
  cp.t1 = 0.0;
  cp.t2 = 1.0;
  cp.L = Integrand(ScalarFunction::generic([](auto a) { return a[2] * a[2]; }, 5));
  cp.phi = {Integrand(ScalarFunction::generic([](auto a) { return a[3] + a[2]; }, 5))};
  if (fixed_end) cp.terminal_state = Eigen::VectorXd::Constant(1, 1.0);
  return cp;
}

/// Costate of the fixed-end delayed LQ by the method of steps:
/// p' = 0 on [0.5, 1], p'(t) = -p(t + 0.5) on [0, 0.5], q(1) = 1.
struct LqOracle {
  double c;
  LqOracle() {
    // q on [0, 0.5]: -c/2 (1.5 t - t^2/2); q(1) = -c (5/16 + 1/12 + 1/4).
    c = -1.0 / (5.0 / 16.0 + 1.0 / 12.0 + 0.25);
  }
  double p(double t) const { return t >= 0.5 ? c : c * (1.5 - t); }
  double u(double t) const { return -0.5 * p(t); }
  double q(double t) const {
    if (t <= 0.0) return 0.0;
    if (t <= 0.5) return -0.5 * c * (1.5 * t - 0.5 * t * t);
    // q(t) = q(0.5) + int_{0.5}^{t} [q(s - 0.5) - c/2] ds
    const double s = t - 0.5;
    const double integral = -0.5 * c * (0.75 * s * s - s * s * s / 6.0);
    return -0.5 * c * (0.75 - 0.125) + integral - 0.5 * c * s;
  }
};

/// Dense monomial polynomial used as an exact integration oracle.
struct Poly {
  std::vector<double> c;

  double operator()(double t) const {
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
    return v;
  }
  Poly operator*(const Poly& o) const {
    Poly r{std::vector<double>(c.size() + o.c.size() - 1, 0.0)};
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < o.c.size(); ++j) r.c[i + j] += c[i] * o.c[j];
    return r;
  }
  Poly operator+(const Poly& o) const {
    Poly r{std::vector<double>(std::max(c.size(), o.c.size()), 0.0)};
    for (std::size_t i = 0; i < c.size(); ++i) r.c[i] += c[i];
    for (std::size_t i = 0; i < o.c.size(); ++i) r.c[i] += o.c[i];
    return r;
  }
  Poly scaled(double k) const {
    Poly r = *this;
    for (double& x : r.c) x *= k;
    return r;
  }
  Poly derivative() const {
    if (c.size() < 2) return Poly{{0.0}};
    Poly r{std::vector<double>(c.size() - 1)};
    for (std::size_t i = 1; i < c.size(); ++i) r.c[i - 1] = c[i] * double(i);
    return r;
  }
  double integral(double a, double b) const {
    double fa = 0.0, fb = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) {
      fa = fa * a + c[i] / double(i + 1);
      fb = fb * b + c[i] / double(i + 1);
    }
    return fb * b - fa * a;
  }
};

/// Bare problem shell with the given window and Lagrangian.
inline IsoperimetricProblem shell(int m, double t1, double t2, double tau, Integrand L, std::vector<Integrand> g = {},
                                  std::vector<double> l = {}) {
  IsoperimetricProblem p;
  p.m = m;
  p.n = 1;
  p.t1 = t1;
  p.t2 = t2;
  p.tau = tau;
  p.L = std::move(L);
  p.g = std::move(g);
  p.l = Eigen::Map<const Eigen::VectorXd>(l.data(), static_cast<Eigen::Index>(l.size()));
  return p;
}

inline AugmentedSetup setup(IsoperimetricProblem p, std::vector<double> lambda = {}) {
  if (lambda.empty()) lambda.assign(static_cast<std::size_t>(p.k()), 0.0);
  AugmentedSetup s;
  s.problem = std::move(p);
  s.lambda = Eigen::Map<const Eigen::VectorXd>(lambda.data(), static_cast<Eigen::Index>(lambda.size()));
  return s;
}

template <typename F>
Integrand lagrangian(F f, int arity) {
  return Integrand(ScalarFunction::generic(std::move(f), arity));
}

}  // namespace support
