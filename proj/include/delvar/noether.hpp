#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "delvar/calculus.hpp"
#include "delvar/detail/path.hpp"
#include "delvar/dubois_reymond.hpp"
#include "delvar/euler_lagrange.hpp"

namespace delvar {

namespace detail {

inline void require_differentiable(const TransformationGroup& g) {
  bool ok = g.eta.differentiable() && g.gauge.differentiable();
  for (const auto& x : g.xi) ok = ok && x.differentiable();
  if (!ok) throw Error(ErrorCode::NotDifferentiable, "group generators must be differentiable");
}

/// Jets of (t, q(t)) about t; the generator argument vector.
inline std::vector<J1> group_args(const Trajectory& q, double t, int order, Side side) {
  const int n = q.dimension();
  std::vector<J1> a(1 + n);
  a[0] = time_jet(t, order);
  for (int c = 0; c < n; ++c) a[1 + c] = trajectory_series(q, c, 0, t, order, side);
  return a;
}

inline std::vector<J1> xi_series(const TransformationGroup& g, const std::vector<J1>& args, int n) {
  std::vector<J1> out;
  out.reserve(n);
  for (int c = 0; c < n; ++c) {
    if (g.xi.empty()) {
      out.push_back(J1::truncated(args[0].order));
    } else {
      out.push_back(g.xi[c](std::span<const J1>(args)));
    }
  }
  return out;
}

/// Series of rho^0..rho^imax about t, each truncated to the requested order.
inline std::vector<std::vector<J1>> rho_series(const TransformationGroup& g, const Trajectory& q, int imax, double t,
                                               int order, Side side = Side::Right) {
  require_differentiable(g);
  const int n = q.dimension();
  const int top = imax + order;
  const std::vector<J1> args = group_args(q, t, top, side);
  const J1 eta = g.eta(std::span<const J1>(args));
  const J1 eta_dot = series_derivative(eta);
  std::vector<std::vector<J1>> out;
  out.push_back(xi_series(g, args, n));
  for (int i = 1; i <= imax; ++i) {
    std::vector<J1> next;
    for (int c = 0; c < n; ++c) {
      const J1 qi = trajectory_series(q, c, i, t, top - i, side);
      next.push_back(series_derivative(out.back()[c]) - qi * eta_dot);
    }
    out.push_back(std::move(next));
  }
  return out;
}

inline double eta_value(const TransformationGroup& g, const Trajectory& q, double t, Side side = Side::Right) {
  const std::vector<J1> args = group_args(q, t, 0, side);
  return g.eta(std::span<const J1>(args)).c[0];
}

}  // namespace detail

/// rho^0 = xi(t, q(t)); rho^i = d/dt rho^(i-1) - q^(i)(t) d/dt eta(t, q(t)).
inline Eigen::VectorXd rho(const TransformationGroup& g, const Trajectory& q, int i, double t) {
  if (i < 0 || i > q.smoothness())
    throw Error(ErrorCode::IOutOfRange, "rho index " + std::to_string(i) + " not in 0.." + std::to_string(q.smoothness()));
  return detail::values_of(detail::rho_series(g, q, i, t, 0).back());
}

/// Generalised Noether quantity on the given regime.
inline double noether_quantity(const AugmentedSetup& setup, const TransformationGroup& g, const Trajectory& q,
                               double t, Regime regime) {
  const auto& p = setup.problem;
  const detail::PathEval path = detail::path_for(setup, q);
  const auto rhos = detail::rho_series(g, q, p.m - 1, t, 0);
  double acc = 0.0;
  double dr = path.value(t, 0).c[0];
  for (int j = 1; j <= p.m; ++j) {
    const Eigen::VectorXd psij = detail::values_of(path.psi(j, t, regime, 0));
    acc += psij.dot(detail::values_of(rhos[j - 1]));
    dr -= psij.dot(q.derivatives(t, j).col(j));
  }
  const double gauge = g.gauge(detail::path_args(q, p.m, p.tau, t));
  return acc + dr * detail::eta_value(g, q, t) - gauge;
}

/// Derivative in s of the transformed action over [a, b] minus the gauge increment.
inline double invariance_defect(const AugmentedSetup& setup, const TransformationGroup& g, const Trajectory& q,
                                double a, double b) {
  const auto& p = setup.problem;
  detail::require_differentiable(g);
  detail::require_window(q, p.tau, p.t1, p.t2);
  const double slack = 1e-12 * (1.0 + std::abs(p.t1) + std::abs(p.t2));
  if (a > b) throw Error(ErrorCode::InvalidInput, "interval requires a <= b");
  if (a < p.t1 - slack || b > p.t2 + slack)
    throw Error(ErrorCode::TransformEscapesDomain, "interval must lie inside [t1, t2]");
  const Integrand F = augmented_integrand(setup);
  const int m = p.m;
  const int n = p.n;
  const std::vector<double> breaks = detail::smoothness_breaks(q, p.tau, p.t1, p.t2);

  // Transformed derivative blocks at time u, generators switched off before t1.
  auto transformed = [&](double u, double s, std::vector<double>& out, int offset, double& jac) {
    const bool active = u >= p.t1;
    const std::vector<J1> args = detail::group_args(q, u, m + 1, Side::Right);
    const J1 eta = active ? g.eta(std::span<const J1>(args)) : J1(0.0);
    const std::vector<J1> xi = active ? detail::xi_series(g, args, n) : std::vector<J1>(n, J1(0.0));
    const J1 denom = 1.0 + s * detail::series_derivative(eta);
    jac = denom.c[0];
    for (int c = 0; c < n; ++c) {
      J1 cur = args[1 + c] + s * xi[c];
      out[offset + c] = cur.c[0];
      for (int i = 1; i <= m; ++i) {
        cur = detail::series_derivative(cur) / denom;
        out[offset + i * n + c] = cur.c[0];
      }
    }
    return eta.c[0];
  };

  auto action = [&](double s) {
    return integrate(
        [&](double t) {
          std::vector<double> args(1 + 2 * n * (m + 1));
          double jac = 1.0, jac_delayed = 1.0;
          const double eta = transformed(t, s, args, 1, jac);
          transformed(t - p.tau, s, args, 1 + (m + 1) * n, jac_delayed);
          args[0] = t + s * eta;
          return F(args) * jac;
        },
        a, b, breaks);
  };
  const double dS = derivative_in_parameter(action).value;
  const double gauge_increment = integrate(
      [&](double t) {
        return g.gauge(std::span<const J1>(detail::path_jets(q, m, p.tau, t, 1))).c[1];
      },
      a, b, breaks);
  return dS - gauge_increment;
}

/// Regime integrals of the invariance lemma: (first, second).
inline std::pair<double, double> necessary_condition_defect(const AugmentedSetup& setup, const TransformationGroup& g,
                                                            const Trajectory& q) {
  const auto& p = setup.problem;
  detail::require_differentiable(g);
  const detail::PathEval path = detail::path_for(setup, q);
  const std::vector<double> breaks = detail::smoothness_breaks(q, p.tau, p.t1, p.t2);
  auto integrand = [&](double t, Regime regime) {
    const auto rhos = detail::rho_series(g, q, p.m, t, 0);
    const std::vector<J1> gargs = detail::group_args(q, t, 1, Side::Right);
    const J1 eta = g.eta(std::span<const J1>(gargs));
    const double gauge_dot = g.gauge(std::span<const J1>(detail::path_jets(q, p.m, p.tau, t, 1))).c[1];
    double v = -gauge_dot + path.partial(t, 1, 0)[0].c[0] * eta.c[0] + path.value(t, 0).c[0] * eta.c[1];
    for (int i = 0; i <= p.m; ++i) v += detail::values_of(path.stacked(i, t, regime, 0)).dot(detail::values_of(rhos[i]));
    return v;
  };
  const double first = integrate([&](double t) { return integrand(t, Regime::First); }, p.t1, p.t2 - p.tau, breaks);
  const double second = integrate([&](double t) { return integrand(t, Regime::Second); }, p.t2 - p.tau, p.t2, breaks);
  return {first, second};
}

struct ConstancyReport {
  std::vector<double> mean;
  std::vector<double> max_deviation;
  std::vector<Grid> grids;

  double worst() const {
    return max_deviation.empty() ? 0.0 : *std::max_element(max_deviation.begin(), max_deviation.end());
  }
};

/// Per-grid mean and largest deviation from it.
inline ConstancyReport constancy_report(const std::function<double(double)>& quantity, const std::vector<Grid>& grids) {
  if (grids.empty()) throw Error(ErrorCode::EmptyGrid, "constancy report needs at least one grid");
  ConstancyReport r;
  r.grids = grids;
  for (const Grid& grid : grids) {
    if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "constancy report grid is empty");
    std::vector<double> v;
    v.reserve(grid.size());
    for (double t : grid.times) v.push_back(quantity(t));
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double dev = 0.0;
    for (double x : v) dev = std::max(dev, std::abs(x - mean));
    r.mean.push_back(mean);
    r.max_deviation.push_back(dev);
  }
  return r;
}

}  // namespace delvar
