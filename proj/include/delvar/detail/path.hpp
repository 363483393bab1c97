#pragma once

// Time series of an integrand and its block partials along a trajectory.
// Exact (jets) for differentiable integrands; 5-point stencils of finite
// difference partials otherwise, limited to second derivatives.

#include <vector>

#include <Eigen/Dense>

#include "delvar/calculus.hpp"
#include "delvar/problem.hpp"
#include "delvar/trajectory.hpp"

namespace delvar {

/// t < t2 - tau is the first regime; t2 - tau itself belongs to the second.
enum class Regime { First, Second };

inline Regime regime_of(double t, double t2, double tau) { return t < t2 - tau ? Regime::First : Regime::Second; }

inline const char* to_string(Regime r) { return r == Regime::First ? "first" : "second"; }

namespace detail {

class PathEval {
 public:
  PathEval(Integrand f, const Trajectory& q, int m, double tau, double t1, double t2, Side side = Side::Right)
      : f_(std::move(f)), q_(q), m_(m), n_(q.dimension()), tau_(tau), t1_(t1), t2_(t2), side_(side),
        layout_(ArgLayout::variational(q.dimension(), m)) {
    if (!f_.differentiable()) cfg_ = StencilConfig{(t2 - t1) * 1e-4, smoothness_breaks(q, tau, t1, t2)};
  }

  bool exact() const { return f_.differentiable(); }
  int m() const { return m_; }
  int n() const { return n_; }
  double tau() const { return tau_; }
  double t1() const { return t1_; }
  double t2() const { return t2_; }
  Side side() const { return side_; }
  const Trajectory& trajectory() const { return q_; }
  const ArgLayout& layout() const { return layout_; }
  const Integrand& integrand() const { return f_; }

  /// Series of F[q](u) up to the given order.
  J1 value(double u, int order) const {
    if (exact()) return f_(std::span<const J1>(path_jets(q_, m_, tau_, u, order, side_)));
    J1 r = J1::truncated(order);
    auto fn = [this](double s) { return f_(path_args(q_, m_, tau_, s, side_)); };
    for (int k = 0; k <= order; ++k) r.c[k] = total_derivative(fn, u, k, cfg_) / factorial(k);
    return r;
  }

  /// Series of the block partial of F[q] at u, one entry per component.
  std::vector<J1> partial(double u, int block, int order) const {
    layout_.check(block);
    const int size = layout_.size(block);
    std::vector<J1> out;
    out.reserve(size);
    if (exact()) {
      const std::vector<J1> args = path_jets(q_, m_, tau_, u, order, side_);
      for (int c = 0; c < size; ++c)
        out.push_back(slot_partial_series(f_.function(), args, layout_.offset(block) + c));
      return out;
    }
    for (int c = 0; c < size; ++c) {
      J1 r = J1::truncated(order);
      auto fn = [this, block, c](double s) {
        const std::vector<double> a = path_args(q_, m_, tau_, s, side_);
        return delvar::partial(f_, layout_, block, a)[c];
      };
      for (int k = 0; k <= order; ++k) r.c[k] = total_derivative(fn, u, k, cfg_) / factorial(k);
      out.push_back(r);
    }
    return out;
  }

  /// Stacked partial P_i(t) = d_{i+2}F(t) (+ d_{i+m+3}F(t+tau) in the first regime).
  std::vector<J1> stacked(int i, double t, Regime regime, int order) const {
    std::vector<J1> out = partial(t, i + 2, order);
    if (regime == Regime::First) {
      const std::vector<J1> adv = partial(t + tau_, i + m_ + 3, order);
      for (int c = 0; c < n_; ++c) out[c] = out[c] + adv[c];
    }
    return out;
  }

  /// Series of psi_j = sum_{i=0}^{m-j} (-1)^i d^i/dt^i P_{i+j}; j = 0 gives the
  /// Euler-Lagrange expression.
  std::vector<J1> psi(int j, double t, Regime regime, int order) const {
    std::vector<J1> out(n_, J1::truncated(order));
    for (int c = 0; c < n_; ++c)
      for (int k = 0; k <= order; ++k) out[c].c[k] = 0.0;
    for (int i = 0; i <= m_ - j; ++i) {
      const std::vector<J1> p = stacked(i + j, t, regime, order + i);
      const double sign = (i % 2 == 0) ? 1.0 : -1.0;
      for (int c = 0; c < n_; ++c) {
        const J1 d = series_derivative(p[c], i);
        for (int k = 0; k <= order; ++k) out[c].c[k] += sign * d.c[k];
      }
    }
    return out;
  }

  /// Series of q^(j) component-wise about u.
  std::vector<J1> q_series(int j, double u, int order) const {
    std::vector<J1> out;
    out.reserve(n_);
    for (int c = 0; c < n_; ++c) out.push_back(trajectory_series(q_, c, j, u, order, side_));
    return out;
  }

  const StencilConfig& stencil() const { return cfg_; }

 private:
  Integrand f_;
  const Trajectory& q_;
  int m_;
  int n_;
  double tau_;
  double t1_;
  double t2_;
  Side side_;
  ArgLayout layout_;
  StencilConfig cfg_;
};

inline Eigen::VectorXd values_of(const std::vector<J1>& s) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(s.size()));
  for (std::size_t c = 0; c < s.size(); ++c) v[static_cast<Eigen::Index>(c)] = s[c].c[0];
  return v;
}

inline J1 dot(const std::vector<J1>& a, const std::vector<J1>& b) {
  J1 acc = a[0] * b[0];
  for (std::size_t c = 1; c < a.size(); ++c) acc = acc + a[c] * b[c];
  return acc;
}

}  // namespace detail
}  // namespace delvar
