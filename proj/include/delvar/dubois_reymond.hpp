#pragma once

#include <string>

#include <Eigen/Dense>

#include "delvar/detail/path.hpp"
#include "delvar/euler_lagrange.hpp"

namespace delvar {

namespace detail {

inline void check_psi_index(int j, int m) {
  if (j < 1 || j > m)
    throw Error(ErrorCode::JOutOfRange, "psi index " + std::to_string(j) + " not in 1.." + std::to_string(m));
}

/// Series of F - sum_j psi_j . q^(j).
inline J1 dr_quantity_series(const PathEval& path, double t, Regime regime, int order) {
  J1 acc = path.value(t, order);
  for (int j = 1; j <= path.m(); ++j) acc = acc - dot(path.psi(j, t, regime, order), path.q_series(j, t, order));
  return acc;
}

inline double dr_residual(const PathEval& path, double t, Regime regime) {
  const double dF1 = path.partial(t, 1, 0)[0].c[0];
  if (path.exact()) return dr_quantity_series(path, t, regime, 1).c[1] - dF1;
  auto fn = [&](double s) { return dr_quantity_series(path, s, regime, 0).c[0]; };
  return total_derivative(fn, t, 1, path.stencil()) - dF1;
}

inline double cdur_residual(const PathEval& path, double t) {
  const int m = path.m();
  double acc = 0.0;
  for (int j = 0; j <= m; ++j) {
    const Eigen::VectorXd d = values_of(path.partial(t + path.tau(), j + m + 3, 0));
    const Eigen::VectorXd qd = path.trajectory().derivatives(t, j + 1, path.side()).col(j + 1);
    acc += d.dot(qd);
  }
  return acc;
}

}  // namespace detail

/// Generalised momentum psi_j on the given regime.
inline Eigen::VectorXd psi(const AugmentedSetup& setup, const Trajectory& q, int j, double t, Regime regime) {
  detail::check_psi_index(j, setup.problem.m);
  return detail::values_of(detail::path_for(setup, q).psi(j, t, regime, 0));
}

/// Hypothesis residual sum_j d_{j+m+3}F(t+tau) . q^(j+1)(t) on [t1 - tau, t2 - tau].
inline double cdur_residual(const AugmentedSetup& setup, const Trajectory& q, double t) {
  const auto& p = setup.problem;
  const double slack = 1e-12 * (1.0 + std::abs(t));
  if (t < p.t1 - p.tau - slack || t > p.t2 - p.tau + slack)
    throw Error(ErrorCode::OutOfDomain, "cdur residual is defined on [t1 - tau, t2 - tau]");
  return detail::cdur_residual(detail::path_for(setup, q), t);
}

/// F - sum_j psi_j . q^(j).
inline double dr_quantity(const AugmentedSetup& setup, const Trajectory& q, double t, Regime regime) {
  return detail::dr_quantity_series(detail::path_for(setup, q), t, regime, 0).c[0];
}

/// d/dt of the DuBois-Reymond quantity minus d_1 F.
inline double dr_residual(const AugmentedSetup& setup, const Trajectory& q, double t, Regime regime) {
  return detail::dr_residual(detail::path_for(setup, q), t, regime);
}

}  // namespace delvar
