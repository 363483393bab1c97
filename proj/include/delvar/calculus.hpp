#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "delvar/autodiff.hpp"
#include "delvar/error.hpp"
#include "delvar/integrand.hpp"

namespace delvar {

// ------------------------------------------------------------ quadrature

inline constexpr int kGaussNodes = 8;

struct GaussRule {
  std::array<double, kGaussNodes> nodes;    // on [-1, 1]
  std::array<double, kGaussNodes> weights;
};

/// Gauss-Legendre rule with `count` nodes on [-1, 1], by Newton iteration on P_count.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int count) {
  std::vector<double> x(count), w(count);
  for (int i = 0; i < count; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= count; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = count * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= count; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = count * (z * p1 - p0) / (z * z - 1.0);
    x[count - 1 - i] = z;
    w[count - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

inline const GaussRule& gauss8() {
  static const GaussRule rule = [] {
    auto [x, w] = gauss_legendre(kGaussNodes);
    GaussRule r{};
    std::copy(x.begin(), x.end(), r.nodes.begin());
    std::copy(w.begin(), w.end(), r.weights.begin());
    return r;
  }();
  return rule;
}

/// Sorted distinct cut points inside (a, b), with a and b at the ends.
inline std::vector<double> panel_cuts(double a, double b, std::span<const double> breaks) {
  std::vector<double> cuts{a};
  for (double x : breaks)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double p, double q) { return std::abs(p - q) <= 1e-13 * (1.0 + std::abs(p)); }),
             cuts.end());
  return cuts;
}

/// Composite 8-point Gauss-Legendre over [a, b]; panels never straddle a break
/// and are at most (b-a)/64 wide.
template <typename Fn>
auto integrate(Fn&& fn, double a, double b, std::span<const double> breaks = {}) -> decltype(fn(a)) {
  using R = decltype(fn(a));
  if (b < a) throw Error(ErrorCode::InvalidInput, "integrate requires a <= b");
  if (b == a) {
    if constexpr (std::is_arithmetic_v<R>) return R(0);
    else return R(fn(a) * 0.0);
  }
  const GaussRule& rule = gauss8();
  const double max_width = (b - a) / 64.0;
  const std::vector<double> cuts = panel_cuts(a, b, breaks);
  bool started = false;
  R total{};
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double lo = cuts[p], hi = cuts[p + 1];
    const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_width - 1e-9)));
    const double width = (hi - lo) / panels;
    for (int k = 0; k < panels; ++k) {
      const double pa = lo + k * width;
      const double half = 0.5 * width, mid = pa + half;
      for (int i = 0; i < kGaussNodes; ++i) {
        R v = fn(mid + half * rule.nodes[i]) * (half * rule.weights[i]);
        if (!started) {
          total = v;
          started = true;
        } else {
          total = total + v;
        }
      }
    }
  }
  return total;
}

// ------------------------------------------------------------ partials

/// Gradient of f with respect to one block of its argument vector.
inline Eigen::VectorXd partial(const Integrand& f, const ArgLayout& layout, int block, std::span<const double> args) {
  layout.check(block);
  const int off = layout.offset(block);
  const int size = layout.size(block);
  if (f.has_analytic_partial()) return f.analytic_partial()(block, args);
  Eigen::VectorXd out(size);
  if (f.differentiable()) {
    std::vector<D1> x(args.begin(), args.end());
    for (int c = 0; c < size; ++c) {
      x[off + c].d = 1.0;
      out[c] = f(std::span<const D1>(x)).d;
      x[off + c].d = 0.0;
    }
    return out;
  }
  std::vector<double> x(args.begin(), args.end());
  for (int c = 0; c < size; ++c) {
    const double x0 = x[off + c];
    const double h = std::max(1e-6, 1e-6 * std::abs(x0));
    x[off + c] = x0 + h;
    const double fp = f(std::span<const double>(x));
    x[off + c] = x0 - h;
    const double fm = f(std::span<const double>(x));
    x[off + c] = x0;
    out[c] = (fp - fm) / (2.0 * h);
  }
  return out;
}

// ------------------------------------------------------------ stencils

struct StencilConfig {
  double h = 1e-4;
  /// Times a stencil must not cross (regime bounds and smoothness breaks).
  std::vector<double> walls;
};

namespace detail {

inline bool crosses(double lo, double hi, const std::vector<double>& walls) {
  for (double w : walls) {
    const double eps = 1e-12 * (1.0 + std::abs(w));
    if (w > lo + eps && w < hi - eps) return true;
  }
  return false;
}

}  // namespace detail

/// order-th time derivative (order <= 2) by a 5-point stencil; central when
/// it fits between walls, otherwise one-sided.
template <typename Fn>
auto total_derivative(Fn&& fn, double t, int order, const StencilConfig& cfg) -> decltype(fn(t)) {
  if (order < 0 || order > 2) throw Error(ErrorCode::OrderTooHigh, "stencil derivatives are limited to order 2");
  if (order == 0) return fn(t);
  const double h = cfg.h;
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidInput, "stencil step must be positive");
  if (!detail::crosses(t - 2 * h, t + 2 * h, cfg.walls)) {
    auto fm2 = fn(t - 2 * h), fm1 = fn(t - h), fp1 = fn(t + h), fp2 = fn(t + 2 * h);
    if (order == 1) return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    auto f0 = fn(t);
    return (-1.0 * fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
  }
  for (double dir : {1.0, -1.0}) {
    const double lo = dir > 0 ? t : t - 4 * h;
    const double hi = dir > 0 ? t + 4 * h : t;
    if (detail::crosses(lo, hi, cfg.walls)) continue;
    const double s = dir * h;
    auto f0 = fn(t), f1 = fn(t + s), f2 = fn(t + 2 * s), f3 = fn(t + 3 * s), f4 = fn(t + 4 * s);
    if (order == 1) return (-25.0 * f0 + 48.0 * f1 - 36.0 * f2 + 16.0 * f3 - 3.0 * f4) / (12.0 * s);
    return (35.0 * f0 - 104.0 * f1 + 114.0 * f2 - 56.0 * f3 + 11.0 * f4) / (12.0 * h * h);
  }
  throw Error(ErrorCode::StencilCrossesBreakpoint, "no stencil placement fits at t = " + std::to_string(t));
}

// ------------------------------------------------------------ parameter derivatives

struct ParameterDerivative {
  double value = 0.0;
  double error = 0.0;
};

/// d/ds at s = 0 by Richardson-extrapolated central differences (h = 1e-3, 5e-4).
template <typename Fn>
ParameterDerivative derivative_in_parameter(Fn&& fn) {
  constexpr double h = 1e-3;
  const double d1 = (fn(h) - fn(-h)) / (2.0 * h);
  const double d2 = (fn(0.5 * h) - fn(-0.5 * h)) / h;
  const double r = (4.0 * d2 - d1) / 3.0;
  return {r, std::abs(r - d2)};
}

}  // namespace delvar
