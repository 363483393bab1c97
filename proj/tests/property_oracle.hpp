#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "support.hpp"

namespace oracle {

using namespace delvar;

inline constexpr double kTau = 0.5;

/// F = x'Ax/2 + b'x + e sin(t) qd over x = (q, qd, q_tau, qd_tau).
struct Quadratic {
  std::array<std::array<double, 4>, 4> A{};
  std::array<double, 4> b{};
  double e = 0.0;

  explicit Quadratic(std::mt19937& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j <= i; ++j) A[i][j] = A[j][i] = U(rng);
    for (double& v : b) v = U(rng);
    e = U(rng);
  }

  Integrand integrand() const {
    const Quadratic self = *this;
    return support::lagrangian(
        [self](auto a) {
          using std::sin;
          using S = typename decltype(a)::value_type;
          S acc = S(0.0);
          for (int i = 0; i < 4; ++i) {
            acc = acc + self.b[i] * a[1 + i];
            for (int j = 0; j < 4; ++j) acc = acc + 0.5 * self.A[i][j] * a[1 + i] * a[1 + j];
          }
          return acc + self.e * sin(a[0]) * a[2];
        },
        5);
  }

  // Hand-coded pieces along a polynomial path.
  std::array<double, 4> state(const Trajectory& q, double t) const {
    return {q.eval(t, 0)[0], q.eval(t, 1)[0], q.eval(t - kTau, 0)[0], q.eval(t - kTau, 1)[0]};
  }
  std::array<double, 4> rate(const Trajectory& q, double t) const {
    return {q.eval(t, 1)[0], q.eval(t, 2)[0], q.eval(t - kTau, 1)[0], q.eval(t - kTau, 2)[0]};
  }
  double value(const Trajectory& q, double t) const {
    const auto x = state(q, t);
    double v = e * std::sin(t) * x[1];
    for (int i = 0; i < 4; ++i) {
      v += b[i] * x[i];
      for (int j = 0; j < 4; ++j) v += 0.5 * A[i][j] * x[i] * x[j];
    }
    return v;
  }
  /// Gradient component k of F at time t.
  double grad(const Trajectory& q, double t, int k) const {
    const auto x = state(q, t);
    double g = b[k] + (k == 1 ? e * std::sin(t) : 0.0);
    for (int j = 0; j < 4; ++j) g += A[k][j] * x[j];
    return g;
  }
  /// d/dt of gradient component k along the path.
  double grad_rate(const Trajectory& q, double t, int k) const {
    const auto xd = rate(q, t);
    double g = k == 1 ? e * std::cos(t) : 0.0;
    for (int j = 0; j < 4; ++j) g += A[k][j] * xd[j];
    return g;
  }
};

inline Trajectory random_quintic(std::mt19937& rng, double a, double b, int m) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> c(6);
  for (double& v : c) v = U(rng);
  return support::poly(a, b, c, m);
}

/// Error relative to max(1, |want|).
inline double relative(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

/// First-order library formulas against hand-coded ones on random quadratic
/// integrands.  `check(name, got, want)` sees every comparison.
template <typename Check>
void first_order_trials(unsigned seed, int trials, Check&& check) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < trials; ++trial) {
    const Quadratic F(rng);
    const auto s = support::setup(support::shell(1, 0.0, 1.0, kTau, F.integrand()));
    const Trajectory q = random_quintic(rng, -kTau, 1.0, 2);
    TransformationGroup g;
    const double e0 = U(rng), e1 = U(rng), e2 = U(rng), x0 = U(rng), x1 = U(rng), x2 = U(rng);
    g.eta = ScalarFunction::generic([=](auto a) { return e0 + e1 * a[0] + e2 * a[1]; }, 2);
    g.xi = {ScalarFunction::generic([=](auto a) { return x0 + x1 * a[0] + x2 * a[1]; }, 2)};

    for (double t : {0.13, 0.37, 0.71, 0.92}) {
      const bool first = t < 1.0 - kTau;
      const Regime r = first ? Regime::First : Regime::Second;
      double el = F.grad(q, t, 0) - F.grad_rate(q, t, 1);
      double psi1 = F.grad(q, t, 1);
      if (first) {
        el += F.grad(q, t + kTau, 2) - F.grad_rate(q, t + kTau, 3);
        psi1 += F.grad(q, t + kTau, 3);
      }
      const double qd = q.eval(t, 1)[0];
      const double dr = F.value(q, t) - psi1 * qd;
      const double eta = e0 + e1 * t + e2 * q.eval(t, 0)[0];
      const double xi = x0 + x1 * t + x2 * q.eval(t, 0)[0];
      const double noether = psi1 * xi + dr * eta;

      check("el_residual", el_residual(s, q, t)[0], el);
      check("psi_1", psi(s, q, 1, t, r)[0], psi1);
      check("dr_quantity", dr_quantity(s, q, t, r), dr);
      check("noether_quantity", noether_quantity(s, g, q, t, r), noether);
      if (first) {
        const double cdur = F.grad(q, t + kTau, 2) * qd + F.grad(q, t + kTau, 3) * q.eval(t, 2)[0];
        check("cdur_residual", cdur_residual(s, q, t), cdur);
      }
    }
  }
}

/// Second-order corollary quantity against the general Noether quantity.
template <typename Check>
void second_order_trials(unsigned seed, int trials, Check&& check) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < trials; ++trial) {
    std::array<double, 7> w{};
    for (double& v : w) v = U(rng);
    auto p = support::example1();
    p.L = support::lagrangian(
        [w](auto a) {
          using std::cos, std::sin;
          return w[0] * a[3] * a[3] + w[1] * a[3] * a[6] + w[2] * a[2] * a[5] + w[3] * sin(a[1]) * a[4] +
                 w[4] * cos(a[0]) * a[2] * a[2] + w[5] * a[6] * a[6] + w[6] * a[1] * a[2] * a[3];
        },
        7);
    const auto s = support::setup(p, {U(rng)});
    const Trajectory q = random_quintic(rng, -1.0, 2.0, 3);
    const double eta = U(rng), a = U(rng), b = U(rng), c = U(rng);

    TransformationGroup general;
    general.eta = ScalarFunction::constant(eta);
    general.xi = {ScalarFunction::generic([=](auto x) { return a + b * x[0] + c * x[1]; }, 2)};

    SecondOrderGroup corollary;
    corollary.eta = eta;
    corollary.xi0 = [=](double t, const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, a + b * t + c * x[0]); };
    corollary.xi1 = [=](double, const Eigen::VectorXd&, const Eigen::VectorXd& xd) {
      return Eigen::VectorXd::Constant(1, b + c * xd[0]);
    };

    for (double t : {0.25, 0.8, 1.3, 1.75}) {
      const Regime r = regime_of(t, 2.0, 1.0);
      check("second_order_noether", second_order_noether_quantity(s, q, t, r, corollary),
            noether_quantity(s, general, q, t, r));
    }
  }
}

}  // namespace oracle
