#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "delvar/calculus.hpp"
#include "delvar/detail/path.hpp"
#include "delvar/problem.hpp"
#include "delvar/trajectory.hpp"

namespace delvar {

inline constexpr double kKnotRadius = 1e-2;

/// Exclusion radius shrunk to a quarter of the closest pair of breaks so fine
/// meshes keep admissible samples between knots.
inline double break_radius(const std::vector<double>& breaks, double radius) {
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) radius = std::min(radius, 0.25 * (breaks[i + 1] - breaks[i]));
  return radius;
}

/// Sample grid over one regime that avoids every smoothness break.
inline Grid regime_grid(const IsoperimetricProblem& p, const Trajectory& q, Regime regime, int count,
                        double radius = kKnotRadius) {
  const std::vector<double> breaks = detail::smoothness_breaks(q, p.tau, p.t1, p.t2);
  const double a = regime == Regime::First ? p.t1 : p.t2 - p.tau;
  const double b = regime == Regime::First ? p.t2 - p.tau : p.t2;
  return make_grid(a, b, count, breaks, break_radius(breaks, radius));
}

/// Sample grid over [t1, t2] that avoids every smoothness break, t2 - tau included.
inline Grid residual_grid(const IsoperimetricProblem& p, const Trajectory& q, int count,
                          double radius = kKnotRadius) {
  const std::vector<double> breaks = detail::smoothness_breaks(q, p.tau, p.t1, p.t2);
  return make_grid(p.t1, p.t2, count, breaks, break_radius(breaks, radius));
}

namespace detail {

inline PathEval path_for(const AugmentedSetup& s, const Trajectory& q, Side side = Side::Right) {
  require_window(q, s.problem.tau, s.problem.t1, s.problem.t2);
  return PathEval(augmented_integrand(s), q, s.problem.m, s.problem.tau, s.problem.t1, s.problem.t2, side);
}

inline Eigen::VectorXd el_residual(const PathEval& path, double t, Regime regime) {
  return values_of(path.psi(0, t, regime, 0));
}

}  // namespace detail

/// Differential-form Euler-Lagrange residual at t; zero along extremals.
inline Eigen::VectorXd el_residual(const AugmentedSetup& setup, const Trajectory& q, double t) {
  const auto& p = setup.problem;
  return detail::el_residual(detail::path_for(setup, q), t, regime_of(t, p.t2, p.tau));
}

/// Left-hand side of the integral form on the given regime, integrals taken from t2 - tau.
inline Eigen::VectorXd el_integral_lhs(const AugmentedSetup& setup, const Trajectory& q, double t, Regime regime) {
  const auto& p = setup.problem;
  const detail::PathEval path = detail::path_for(setup, q);
  const int m = p.m;
  const double a = p.t2 - p.tau;
  const std::vector<double> breaks = detail::smoothness_breaks(q, p.tau, p.t1, p.t2);
  Eigen::VectorXd out = -detail::values_of(path.stacked(m, t, regime, 0));
  for (int i = 0; i < m; ++i) {
    const int folds = m - i;
    const double sign = ((m - i - 1) % 2 == 0) ? 1.0 : -1.0;
    // Repeated integration collapsed into one kernel: (t-s)^(k-1)/(k-1)!.
    auto kernel = [&](double s) -> Eigen::VectorXd {
      const double w = std::pow(t - s, folds - 1) / factorial(folds - 1);
      return w * detail::values_of(path.stacked(i, s, regime, 0));
    };
    Eigen::VectorXd integral = t >= a ? integrate(kernel, a, t, breaks) : Eigen::VectorXd(-integrate(kernel, t, a, breaks));
    out += sign * integral;
  }
  return out;
}

/// Least-squares fit in the Legendre basis on the regime interval.
struct PolynomialFit {
  /// n x m: row per component, column per Legendre degree.
  Eigen::MatrixXd coefficients;
  double residual = 0.0;
};

inline PolynomialFit fit_legendre(const std::vector<double>& t, const std::vector<Eigen::VectorXd>& y, int degree,
                                  double a, double b) {
  const int rows = static_cast<int>(t.size());
  const int cols = degree + 1;
  if (rows < degree + 2) throw Error(ErrorCode::DegenerateGrid, "not enough samples for the fit");
  Eigen::MatrixXd V(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const double x = (2.0 * t[r] - a - b) / (b - a);
    double p0 = 1.0, p1 = x;
    for (int c = 0; c < cols; ++c) {
      if (c == 0) {
        V(r, c) = 1.0;
      } else if (c == 1) {
        V(r, c) = x;
      } else {
        const double p2 = ((2.0 * c - 1.0) * x * p1 - (c - 1.0) * p0) / c;
        p0 = p1;
        p1 = p2;
        V(r, c) = p2;
      }
    }
  }
  const int n = static_cast<int>(y.front().size());
  Eigen::MatrixXd Y(rows, n);
  for (int r = 0; r < rows; ++r) Y.row(r) = y[r].transpose();
  const auto qr = V.colPivHouseholderQr();
  const Eigen::MatrixXd C = qr.solve(Y);
  PolynomialFit fit;
  fit.coefficients = C.transpose();
  const Eigen::MatrixXd R = V * C - Y;
  for (int r = 0; r < rows; ++r) fit.residual = std::max(fit.residual, R.row(r).norm());
  return fit;
}

/// Fit of a degree m-1 polynomial to the integral form; extremals leave no residual.
inline PolynomialFit el_integral_defect(const AugmentedSetup& setup, const Trajectory& q, const Grid& grid,
                                        Regime regime) {
  const auto& p = setup.problem;
  if (static_cast<int>(grid.size()) < p.m + 1) throw Error(ErrorCode::DegenerateGrid, "fit needs at least m+1 samples");
  std::vector<Eigen::VectorXd> ys;
  ys.reserve(grid.size());
  for (double t : grid.times) ys.push_back(el_integral_lhs(setup, q, t, regime));
  const double a = regime == Regime::First ? p.t1 : p.t2 - p.tau;
  const double b = regime == Regime::First ? p.t2 - p.tau : p.t2;
  return fit_legendre(grid.times, ys, p.m - 1, a, b);
}

enum class Classification { Normal, Abnormal };

/// Residual sweep over a regime-respecting grid.
struct ResidualReport {
  Grid grid;
  std::vector<Regime> regimes;
  std::vector<Eigen::VectorXd> el;
  std::vector<double> dr_quantity;
  std::vector<double> dr_residual;
  /// Present only where t <= t2 - tau.
  std::vector<std::optional<double>> cdur;
  double el_sup_first = 0.0;
  double el_sup_second = 0.0;
  double dr_sup = 0.0;
  double cdur_sup = 0.0;
  Eigen::VectorXd constraint_defect;
  bool hypothesis_violated = false;
  bool abnormal = false;
  std::optional<Classification> classification;

  double el_sup() const { return std::max(el_sup_first, el_sup_second); }
};

inline const char* to_string(Classification c) { return c == Classification::Normal ? "normal" : "abnormal"; }

struct ClassifyResult {
  Classification kind = Classification::Normal;
  /// k = 1: sup of the g residual.  k > 1: smallest singular value of the
  /// stacked residual matrix.
  double measure = 0.0;
  double tol = 0.0;
};

/// Normal unless the constraint integrands satisfy the Euler-Lagrange equations themselves.
inline ClassifyResult classify(const IsoperimetricProblem& p, const Trajectory& q,
                               std::optional<double> tol = std::nullopt, int samples = 100) {
  if (p.k() == 0) throw Error(ErrorCode::NoConstraints, "classification needs at least one constraint");
  detail::require_window(q, p.tau, p.t1, p.t2);
  const Grid grid = residual_grid(p, q, samples);
  const int rows = static_cast<int>(grid.size()) * p.n;
  Eigen::MatrixXd R(rows, p.k());
  double scale = 0.0;
  for (int j = 0; j < p.k(); ++j) {
    const detail::PathEval path(p.g[j], q, p.m, p.tau, p.t1, p.t2);
    for (std::size_t s = 0; s < grid.size(); ++s) {
      const double t = grid.times[s];
      const Regime regime = regime_of(t, p.t2, p.tau);
      R.block(static_cast<Eigen::Index>(s) * p.n, j, p.n, 1) = detail::el_residual(path, t, regime);
      for (int i = 0; i <= p.m; ++i)
        scale = std::max(scale, detail::values_of(path.stacked(i, t, regime, 0)).cwiseAbs().maxCoeff());
    }
  }
  ClassifyResult out;
  out.tol = tol ? *tol : 1e-6 * (1.0 + scale);
  if (p.k() == 1) {
    for (std::size_t s = 0; s < grid.size(); ++s)
      out.measure = std::max(out.measure, R.block(static_cast<Eigen::Index>(s) * p.n, 0, p.n, 1).norm());
  } else {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
    out.measure = svd.singularValues().minCoeff();
  }
  out.kind = out.measure <= out.tol ? Classification::Abnormal : Classification::Normal;
  return out;
}

}  // namespace delvar
