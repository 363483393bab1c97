#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "delvar/calculus.hpp"
#include "delvar/detail/path.hpp"
#include "delvar/dubois_reymond.hpp"
#include "delvar/euler_lagrange.hpp"
#include "delvar/optimal_control.hpp"
#include "delvar/problem.hpp"
#include "delvar/trajectory.hpp"

namespace delvar {

struct CollocationScheme {
  /// Mesh intervals over [t1, t2]; t2 - tau is always a mesh node.
  int nodes = 64;
  /// Collocation points per interval for the Euler-Lagrange solver; the basis
  /// degree is 2m - 1 + this.
  int collocation_points = 2;
  /// Basis degree of state and costate in the Pontryagin solver.
  int pmp_degree = 3;
  int max_iterations = 50;
  double tolerance = 1e-10;
  double initial_step = 1.0;
  double min_step = 1e-6;
  /// Retry over lambda in {-10, -1, 0, 1, 10}^k when Newton fails (k <= 3).
  bool multistart = true;
};

enum class SolveOutcome { Converged, NonConvergence, SingularJacobian };

inline const char* to_string(SolveOutcome o) {
  switch (o) {
    case SolveOutcome::Converged: return "converged";
    case SolveOutcome::NonConvergence: return "non_convergence";
    case SolveOutcome::SingularJacobian: return "singular_jacobian";
  }
  return "unknown";
}

struct SolveReport {
  SolveOutcome outcome = SolveOutcome::NonConvergence;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(0);
  double condition = std::numeric_limits<double>::infinity();
  std::string message;

  bool converged() const { return outcome == SolveOutcome::Converged; }
};

struct ElSolution {
  Trajectory trajectory;
  Eigen::VectorXd lambda;
  SolveReport report;
};

struct PmpSolution {
  PontryaginTriple triple;
  Eigen::VectorXd lambda;
  SolveReport report;
};

// ------------------------------------------------------------ mesh helpers

/// Knots of the collocation mesh: uniform on each regime, t2 - tau included.
inline std::vector<double> collocation_mesh(double t1, double t2, double tau, int nodes) {
  if (nodes < 2) throw Error(ErrorCode::InvalidInput, "mesh needs at least two intervals");
  const double split = t2 - tau;
  int n1 = static_cast<int>(std::lround(nodes * (split - t1) / (t2 - t1)));
  n1 = std::clamp(n1, 1, nodes - 1);
  const int n2 = nodes - n1;
  std::vector<double> knots;
  for (int i = 0; i < n1; ++i) knots.push_back(t1 + (split - t1) * i / n1);
  for (int i = 0; i < n2; ++i) knots.push_back(split + (t2 - split) * i / n2);
  knots.push_back(t2);
  return knots;
}

/// Polynomial on [a, b] matching derivatives 0..r at both ends (degree 2r+1),
/// one row of da/db per component.
inline PolySegment hermite_segment(double a, double b, const Eigen::MatrixXd& da, const Eigen::MatrixXd& db) {
  const int n = static_cast<int>(da.rows());
  const int r = static_cast<int>(da.cols()) - 1;
  const int size = 2 * (r + 1);
  const double mid = 0.5 * (a + b);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(size, size);
  for (int side = 0; side < 2; ++side) {
    const double x = (side == 0 ? a : b) - mid;
    for (int d = 0; d <= r; ++d)
      for (int k = d; k < size; ++k) M(side * (r + 1) + d, k) = factorial(k) / factorial(k - d) * std::pow(x, k - d);
  }
  const auto lu = M.fullPivLu();
  std::vector<std::vector<double>> coeffs(n);
  for (int c = 0; c < n; ++c) {
    Eigen::VectorXd rhs(size);
    for (int d = 0; d <= r; ++d) {
      rhs[d] = da(c, d);
      rhs[r + 1 + d] = db(c, d);
    }
    const Eigen::VectorXd sol = lu.solve(rhs);
    coeffs[c].assign(sol.data(), sol.data() + size);
  }
  return PolySegment(a, b, std::move(coeffs));
}

/// Hermite panels of a vector history on [a, b]; missing functions mean zero.
inline std::vector<PolySegment> stitch_history(const std::vector<ScalarFunction>& fns, int n, double a, double b,
                                               int panels, int r) {
  std::vector<PolySegment> out;
  const StencilConfig cfg{(b - a) * 1e-4, {a, b}};
  auto derivs = [&](double t) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, r + 1);
    if (!fns.empty())
      for (int c = 0; c < n; ++c) d.row(c) = detail::time_derivatives(fns[c], t, r, cfg).transpose();
    return d;
  };
  for (int i = 0; i < panels; ++i) {
    const double lo = a + (b - a) * i / panels;
    const double hi = i + 1 == panels ? b : a + (b - a) * (i + 1) / panels;
    out.push_back(hermite_segment(lo, hi, derivs(lo), derivs(hi)));
  }
  return out;
}

namespace detail {

/// Scaled local coefficients on [a, b] (powers of (t - mid)/half) to segment form.
inline PolySegment segment_from_scaled(double a, double b, int n, int degree, const double* x, int stride) {
  const double half = 0.5 * (b - a);
  std::vector<std::vector<double>> coeffs(n, std::vector<double>(degree + 1));
  for (int c = 0; c < n; ++c) {
    double scale = 1.0;
    for (int k = 0; k <= degree; ++k) {
      coeffs[c][k] = x[c * stride + k] / scale;
      scale *= half;
    }
  }
  return PolySegment(a, b, std::move(coeffs));
}

/// Inverse of segment_from_scaled for an existing path: Taylor data at the midpoint.
inline void scaled_from_path(const Trajectory& q, double a, double b, int degree, double* x, int stride) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const Eigen::MatrixXd d = q.derivatives(mid, degree);
  for (int c = 0; c < q.dimension(); ++c) {
    double scale = 1.0;
    for (int k = 0; k <= degree; ++k) {
      x[c * stride + k] = d(c, k) / factorial(k) * scale;
      scale *= half;
    }
  }
}

inline int segment_index(const std::vector<double>& knots, double t, Side side) {
  const int last = static_cast<int>(knots.size()) - 2;
  if (side == Side::Right) {
    auto it = std::upper_bound(knots.begin(), knots.end(), t + 1e-13 * (1.0 + std::abs(t)));
    return std::clamp(static_cast<int>(it - knots.begin()) - 1, 0, last);
  }
  auto it = std::lower_bound(knots.begin(), knots.end(), t - 1e-13 * (1.0 + std::abs(t)));
  return std::clamp(static_cast<int>(it - knots.begin()) - 1, 0, last);
}

/// Mesh segments touched by evaluations at the given times (outside the mesh ignored).
inline std::vector<int> touched(const std::vector<double>& knots, std::initializer_list<double> times, bool both_sides) {
  std::vector<int> out;
  for (double t : times) {
    if (t < knots.front() - 1e-12 || t > knots.back() + 1e-12) continue;
    out.push_back(segment_index(knots, t, Side::Right));
    if (both_sides) out.push_back(segment_index(knots, t, Side::Left));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

template <typename Ctx>
struct EquationGroup {
  int rows = 0;
  /// Mesh segments whose unknowns enter; empty with `global` set means all.
  std::vector<int> segments;
  bool global = false;
  bool uses_lambda = false;
  bool linear = false;
  std::function<void(const Ctx&, double* out)> eval;
};

/// Square nonlinear system in per-segment unknowns plus trailing multipliers.
template <typename Ctx>
struct CollocationSystem {
  int unknowns = 0;
  int multipliers = 0;
  /// Mesh segment owning each unknown; -1 for multipliers.
  std::vector<int> owner;
  std::vector<EquationGroup<Ctx>> groups;
  std::function<Ctx(const Eigen::VectorXd&)> build;

  int equations() const {
    int r = 0;
    for (const auto& g : groups) r += g.rows;
    return r;
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
    const Ctx ctx = build(x);
    Eigen::VectorXd r(equations());
    int off = 0;
    for (const auto& g : groups) {
      g.eval(ctx, r.data() + off);
      off += g.rows;
    }
    return r;
  }

  /// Forward-difference Jacobian; each column only re-evaluates groups that
  /// depend on the perturbed unknown.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& r0) const {
    const int rows = equations();
    std::vector<int> offsets;
    int off = 0;
    for (const auto& g : groups) {
      offsets.push_back(off);
      off += g.rows;
    }
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(rows, unknowns);
    Eigen::VectorXd xp = x;
    std::vector<double> buf;
    for (int i = 0; i < unknowns; ++i) {
      const double h = 1e-7 * (1.0 + std::abs(x[i]));
      xp[i] = x[i] + h;
      const double step = xp[i] - x[i];
      const Ctx ctx = build(xp);
      const int seg = owner[i];
      for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& g = groups[gi];
        const bool hit = seg < 0 ? g.uses_lambda || g.global
                                 : g.global || std::binary_search(g.segments.begin(), g.segments.end(), seg);
        if (!hit) continue;
        buf.assign(g.rows, 0.0);
        g.eval(ctx, buf.data());
        for (int r = 0; r < g.rows; ++r) J(offsets[gi] + r, i) = (buf[r] - r0[offsets[gi] + r]) / step;
      }
      xp[i] = x[i];
    }
    return J;
  }

  /// Rows of the linear groups as A x = b.
  std::pair<Eigen::MatrixXd, Eigen::VectorXd> linear_rows() const {
    int rows = 0;
    for (const auto& g : groups)
      if (g.linear) rows += g.rows;
    Eigen::MatrixXd A(rows, unknowns);
    Eigen::VectorXd b(rows);
    auto eval_linear = [&](const Eigen::VectorXd& x) {
      const Ctx ctx = build(x);
      Eigen::VectorXd out(rows);
      int off = 0;
      for (const auto& g : groups) {
        if (!g.linear) continue;
        g.eval(ctx, out.data() + off);
        off += g.rows;
      }
      return out;
    };
    Eigen::VectorXd x = Eigen::VectorXd::Zero(unknowns);
    const Eigen::VectorXd r0 = eval_linear(x);
    for (int i = 0; i < unknowns; ++i) {
      x[i] = 1.0;
      A.col(i) = eval_linear(x) - r0;
      x[i] = 0.0;
    }
    b = -r0;
    return {A, b};
  }
};

/// Damped Newton with row equilibration and projection onto the linear rows.
template <typename Ctx>
SolveReport newton_solve(const CollocationSystem<Ctx>& sys, Eigen::VectorXd& x, const CollocationScheme& scheme) {
  SolveReport rep;
  const auto [A, b] = sys.linear_rows();
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  auto project = [&](Eigen::VectorXd& v) {
    if (A.rows() == 0) return;
    for (int pass = 0; pass < 2; ++pass) v -= cod.solve(A * v - b);
  };
  project(x);
  Eigen::VectorXd r = sys.residual(x);
  rep.residual = r.cwiseAbs().maxCoeff();
  for (int it = 0; it < scheme.max_iterations; ++it) {
    if (rep.residual <= scheme.tolerance) {
      rep.outcome = SolveOutcome::Converged;
      rep.iterations = it;
      return rep;
    }
    Eigen::MatrixXd J = sys.jacobian(x, r);
    Eigen::VectorXd rhs = -r;
    for (Eigen::Index i = 0; i < J.rows(); ++i) {
      const double s = J.row(i).cwiseAbs().maxCoeff();
      if (s > 0.0) {
        J.row(i) /= s;
        rhs[i] /= s;
      }
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    const double rcond = lu.rcond();
    rep.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(rcond >= 1e-12)) {
      rep.outcome = SolveOutcome::SingularJacobian;
      rep.iterations = it;
      rep.message = "Jacobian condition estimate exceeds 1e12";
      return rep;
    }
    const Eigen::VectorXd dx = lu.solve(rhs);
    const double base = r.norm();
    double alpha = scheme.initial_step;
    bool accepted = false;
    while (alpha >= scheme.min_step) {
      Eigen::VectorXd trial = x + alpha * dx;
      project(trial);
      const Eigen::VectorXd rt = sys.residual(trial);
      if (rt.allFinite() && (rt.norm() < base || rt.cwiseAbs().maxCoeff() <= scheme.tolerance)) {
        x = std::move(trial);
        r = rt;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    rep.iterations = it + 1;
    rep.residual = r.cwiseAbs().maxCoeff();
    if (!accepted) {
      rep.outcome = SolveOutcome::NonConvergence;
      rep.message = "line search stalled";
      return rep;
    }
  }
  if (rep.residual <= scheme.tolerance && scheme.max_iterations > 0) {
    rep.outcome = SolveOutcome::Converged;
  } else {
    rep.outcome = SolveOutcome::NonConvergence;
    rep.message = "iteration limit reached";
  }
  return rep;
}

inline std::vector<std::vector<double>> lambda_starts(int k) {
  std::vector<std::vector<double>> out{{}};
  for (int j = 0; j < k; ++j) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : out)
      for (double v : {-10.0, -1.0, 0.0, 1.0, 10.0}) {
        auto p = prefix;
        p.push_back(v);
        next.push_back(std::move(p));
      }
    out = std::move(next);
  }
  return out;
}

struct ElContext {
  Trajectory q;
  Eigen::VectorXd lambda;
  Integrand F;
};

}  // namespace detail

// ------------------------------------------------------------ Euler-Lagrange solver

/// Collocation solve of the delayed Euler-Lagrange problem jointly with lambda.
inline ElSolution solve_el(const IsoperimetricProblem& p, const std::optional<Trajectory>& guess,
                           const Eigen::VectorXd& lambda_guess, const CollocationScheme& scheme = {}) {
  p.validate();
  const int m = p.m, n = p.n, k = p.k();
  if (scheme.nodes < m + 2) throw Error(ErrorCode::InvalidInput, "collocation needs at least m+2 mesh intervals");
  if (scheme.collocation_points < 1) throw Error(ErrorCode::InvalidInput, "need at least one collocation point");
  if (lambda_guess.size() != k) throw Error(ErrorCode::InvalidInput, "lambda guess has wrong length");
  const int degree = 2 * m - 1 + scheme.collocation_points;
  const int per_comp = degree + 1;
  const std::vector<double> knots = collocation_mesh(p.t1, p.t2, p.tau, scheme.nodes);
  const int N = static_cast<int>(knots.size()) - 1;
  const double h = (p.t2 - p.t1) / scheme.nodes;
  const int panels = std::max(1, static_cast<int>(std::lround(p.tau / h)));
  const std::vector<PolySegment> history = stitch_history(p.history, n, p.t1 - p.tau, p.t1, panels, m);
  const auto [gx, gw] = gauss_legendre(scheme.collocation_points);
  (void)gw;

  using Ctx = detail::ElContext;
  detail::CollocationSystem<Ctx> sys;
  sys.unknowns = N * n * per_comp + k;
  sys.multipliers = k;
  for (int s = 0; s < N; ++s)
    for (int i = 0; i < n * per_comp; ++i) sys.owner.push_back(s);
  for (int j = 0; j < k; ++j) sys.owner.push_back(-1);

  sys.build = [&, N, n, per_comp, degree](const Eigen::VectorXd& x) {
    std::vector<PolySegment> segs = history;
    for (int s = 0; s < N; ++s)
      segs.push_back(detail::segment_from_scaled(knots[s], knots[s + 1], n, degree, x.data() + s * n * per_comp, per_comp));
    Eigen::VectorXd lambda = x.tail(k);
    Ctx ctx{Trajectory::unchecked(n, m, std::move(segs)), lambda, Integrand()};
    ctx.F = augmented_integrand(AugmentedSetup{p, lambda});
    return ctx;
  };

  using Group = detail::EquationGroup<Ctx>;
  const Eigen::MatrixXd left = p.history.empty() ? Eigen::MatrixXd::Zero(n, m) : p.history_derivatives(p.t1, m - 1);
  // History derivatives at t1.
  sys.groups.push_back(Group{m * n, {0}, false, false, true, [m, n, left, &p](const Ctx& c, double* out) {
                               const Eigen::MatrixXd d = c.q.derivatives(p.t1, m - 1, Side::Right);
                               for (int i = 0; i < m; ++i)
                                 for (int comp = 0; comp < n; ++comp) out[i * n + comp] = d(comp, i) - left(comp, i);
                             }});
  for (int s = 0; s < N; ++s) {
    const double a = knots[s], b = knots[s + 1];
    const Regime regime = regime_of(0.5 * (a + b), p.t2, p.tau);
    if (s > 0) {
      // Continuity of q..q^(m-1) at the left knot.
      sys.groups.push_back(Group{m * n, {s - 1, s}, false, false, true, [m, n, a](const Ctx& c, double* out) {
                                   const Eigen::MatrixXd l = c.q.derivatives(a, m - 1, Side::Left);
                                   const Eigen::MatrixXd r = c.q.derivatives(a, m - 1, Side::Right);
                                   for (int i = 0; i < m; ++i)
                                     for (int comp = 0; comp < n; ++comp) out[i * n + comp] = r(comp, i) - l(comp, i);
                                 }});
      // Continuity of the generalised momenta psi_1..psi_m.
      const Regime left_regime = a <= p.t2 - p.tau + 1e-12 ? Regime::First : Regime::Second;
      Group g{m * n, detail::touched(knots, {a, a - p.tau, a + p.tau}, true), false, true, false,
              [m, n, a, left_regime, regime, &p](const Ctx& c, double* out) {
                const detail::PathEval lp(c.F, c.q, m, p.tau, p.t1, p.t2, Side::Left);
                const detail::PathEval rp(c.F, c.q, m, p.tau, p.t1, p.t2, Side::Right);
                for (int j = 1; j <= m; ++j) {
                  const Eigen::VectorXd d =
                      detail::values_of(rp.psi(j, a, regime, 0)) - detail::values_of(lp.psi(j, a, left_regime, 0));
                  for (int comp = 0; comp < n; ++comp) out[(j - 1) * n + comp] = d[comp];
                }
              }};
      sys.groups.push_back(std::move(g));
    }
    for (double node : gx) {
      const double t = 0.5 * (a + b) + 0.5 * (b - a) * node;
      Group g{n, detail::touched(knots, {t, t - p.tau, t + p.tau}, false), false, true, false,
              [m, t, regime, &p](const Ctx& c, double* out) {
                const detail::PathEval path(c.F, c.q, m, p.tau, p.t1, p.t2);
                const Eigen::VectorXd r = detail::el_residual(path, t, regime);
                std::copy(r.data(), r.data() + r.size(), out);
              }};
      sys.groups.push_back(std::move(g));
    }
  }
  if (!p.terminal.empty()) {
    sys.groups.push_back(Group{m * n, {N - 1}, false, false, true, [m, n, &p](const Ctx& c, double* out) {
                                 const Eigen::MatrixXd d = c.q.derivatives(p.t2, m - 1, Side::Left);
                                 for (int i = 0; i < m; ++i)
                                   for (int comp = 0; comp < n; ++comp)
                                     out[i * n + comp] = d(comp, i) - p.terminal[i][comp];
                               }});
  } else {
    // Free end: natural conditions psi_j(t2) = 0.
    sys.groups.push_back(Group{m * n, detail::touched(knots, {p.t2, p.t2 - p.tau}, true), false, true, false,
                               [m, n, &p](const Ctx& c, double* out) {
                                 const detail::PathEval path(c.F, c.q, m, p.tau, p.t1, p.t2, Side::Left);
                                 for (int j = 1; j <= m; ++j) {
                                   const Eigen::VectorXd v = detail::values_of(path.psi(j, p.t2, Regime::Second, 0));
                                   for (int comp = 0; comp < n; ++comp) out[(j - 1) * n + comp] = v[comp];
                                 }
                               }});
  }
  if (k > 0) {
    sys.groups.push_back(Group{k, {}, true, false, false, [&p](const Ctx& c, double* out) {
                                 const Eigen::VectorXd d = constraint_defect(p, c.q);
                                 std::copy(d.data(), d.data() + d.size(), out);
                               }});
  }
  if (sys.equations() != sys.unknowns)
    throw Error(ErrorCode::InvalidProblem, "collocation system is not square");

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(sys.unknowns);
  if (guess) {
    for (int s = 0; s < N; ++s)
      detail::scaled_from_path(*guess, knots[s], knots[s + 1], degree, x0.data() + s * n * per_comp, per_comp);
  }
  x0.tail(k) = lambda_guess;

  Eigen::VectorXd x = x0;
  SolveReport rep = detail::newton_solve(sys, x, scheme);
  if (!rep.converged() && scheme.multistart && k >= 1 && k <= 3 && scheme.max_iterations > 0) {
    for (const auto& start : detail::lambda_starts(k)) {
      Eigen::VectorXd xs = x0;
      for (int j = 0; j < k; ++j) xs[xs.size() - k + j] = start[j];
      SolveReport r = detail::newton_solve(sys, xs, scheme);
      if (r.converged()) {
        rep = r;
        x = xs;
        break;
      }
    }
  }
  Ctx ctx = sys.build(x);
  rep.lambda = ctx.lambda;
  return ElSolution{std::move(ctx.q), ctx.lambda, rep};
}

// ------------------------------------------------------------ Pontryagin solver

namespace detail {

struct PmpContext {
  PontryaginTriple triple;
  Eigen::VectorXd lambda;
};

}  // namespace detail

/// Collocation solve of the delayed Hamiltonian system with stationarity.
inline PmpSolution solve_pmp(const ControlProblem& cp, const CollocationScheme& scheme = {},
                             std::optional<Eigen::VectorXd> lambda_guess = std::nullopt) {
  cp.validate();
  const int n = cp.n, mc = cp.mc, k = cp.k();
  const int D = scheme.pmp_degree;
  if (D < 1) throw Error(ErrorCode::InvalidInput, "Pontryagin basis degree must be positive");
  const std::vector<double> knots = collocation_mesh(cp.t1, cp.t2, cp.tau, scheme.nodes);
  const int N = static_cast<int>(knots.size()) - 1;
  const double h = (cp.t2 - cp.t1) / scheme.nodes;
  const int panels = std::max(1, static_cast<int>(std::lround(cp.tau / h)));
  const std::vector<PolySegment> qhist = stitch_history(cp.history, n, cp.t1 - cp.tau, cp.t1, panels, 1);
  const std::vector<PolySegment> uhist = stitch_history(cp.control_history, mc, cp.t1 - cp.tau, cp.t1, panels, 1);
  const auto [gx, gw] = gauss_legendre(D);
  (void)gw;
  const int q_size = n * (D + 1), p_size = n * (D + 1), u_size = mc * D;
  const int per_seg = q_size + p_size + u_size;

  using Ctx = detail::PmpContext;
  detail::CollocationSystem<Ctx> sys;
  sys.unknowns = N * per_seg + k;
  sys.multipliers = k;
  for (int s = 0; s < N; ++s)
    for (int i = 0; i < per_seg; ++i) sys.owner.push_back(s);
  for (int j = 0; j < k; ++j) sys.owner.push_back(-1);

  sys.build = [&, N, n, mc, D, q_size, p_size, per_seg](const Eigen::VectorXd& x) {
    std::vector<PolySegment> qs = qhist, us = uhist, ps;
    for (int s = 0; s < N; ++s) {
      const double* base = x.data() + s * per_seg;
      qs.push_back(detail::segment_from_scaled(knots[s], knots[s + 1], n, D, base, D + 1));
      ps.push_back(detail::segment_from_scaled(knots[s], knots[s + 1], n, D, base + q_size, D + 1));
      us.push_back(detail::segment_from_scaled(knots[s], knots[s + 1], mc, D - 1, base + q_size + p_size, D));
    }
    return Ctx{PontryaginTriple{Trajectory::unchecked(n, 1, std::move(qs)), Trajectory::unchecked(mc, 0, std::move(us)),
                                Trajectory::unchecked(n, 0, std::move(ps))},
               x.tail(k)};
  };

  using Group = detail::EquationGroup<Ctx>;
  Eigen::VectorXd q0 = Eigen::VectorXd::Zero(n);
  if (!cp.history.empty())
    for (int c = 0; c < n; ++c) {
      const double t1 = cp.t1;
      q0[c] = cp.history[c](std::span<const double>(&t1, 1));
    }
  sys.groups.push_back(Group{n, {0}, false, false, true, [q0, &cp](const Ctx& c, double* out) {
                               const Eigen::VectorXd v = c.triple.q.eval(cp.t1, 0, Side::Right) - q0;
                               std::copy(v.data(), v.data() + v.size(), out);
                             }});
  for (int s = 0; s < N; ++s) {
    const double a = knots[s], b = knots[s + 1];
    if (s > 0) {
      sys.groups.push_back(Group{2 * n, {s - 1, s}, false, false, true, [n, a](const Ctx& c, double* out) {
                                   const Eigen::VectorXd dq =
                                       c.triple.q.eval(a, 0, Side::Right) - c.triple.q.eval(a, 0, Side::Left);
                                   const Eigen::VectorXd dp =
                                       c.triple.p.eval(a, 0, Side::Right) - c.triple.p.eval(a, 0, Side::Left);
                                   for (int i = 0; i < n; ++i) {
                                     out[i] = dq[i];
                                     out[n + i] = dp[i];
                                   }
                                 }});
    }
    for (double node : gx) {
      const double t = 0.5 * (a + b) + 0.5 * (b - a) * node;
      sys.groups.push_back(Group{2 * n + mc, detail::touched(knots, {t, t - cp.tau, t + cp.tau}, false), false, true,
                                 false, [n, mc, t, &cp](const Ctx& c, double* out) {
                                   const PmpResiduals r = pmp_residuals(cp, c.triple, c.lambda, t);
                                   for (int i = 0; i < n; ++i) {
                                     out[i] = r.state[i];
                                     out[n + i] = r.costate[i];
                                   }
                                   for (int i = 0; i < mc; ++i) out[2 * n + i] = r.stationarity[i];
                                 }});
    }
  }
  sys.groups.push_back(Group{n, {N - 1}, false, false, true, [&cp](const Ctx& c, double* out) {
                               const Eigen::VectorXd v = cp.terminal_state
                                                             ? Eigen::VectorXd(c.triple.q.eval(cp.t2, 0, Side::Left) -
                                                                               *cp.terminal_state)
                                                             : Eigen::VectorXd(c.triple.p.eval(cp.t2, 0, Side::Left));
                               std::copy(v.data(), v.data() + v.size(), out);
                             }});
  if (k > 0) {
    sys.groups.push_back(Group{k, {}, true, false, false, [&cp](const Ctx& c, double* out) {
                                 const std::vector<double> breaks =
                                     detail::smoothness_breaks(c.triple.q, cp.tau, cp.t1, cp.t2);
                                 const Eigen::VectorXd v = integrate(
                                     [&](double t) {
                                       const ControlArgs a = triple_args(cp, c.triple, c.lambda, t);
                                       const std::vector<double> x = a.flat();
                                       Eigen::VectorXd g(cp.k());
                                       for (int j = 0; j < cp.k(); ++j) g[j] = cp.g[j](x);
                                       return g;
                                     },
                                     cp.t1, cp.t2, breaks);
                                 for (int j = 0; j < cp.k(); ++j) out[j] = v[j] - cp.l[j];
                               }});
  }
  if (sys.equations() != sys.unknowns) throw Error(ErrorCode::InvalidProblem, "collocation system is not square");

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(sys.unknowns);
  if (lambda_guess) {
    if (lambda_guess->size() != k) throw Error(ErrorCode::InvalidInput, "lambda guess has wrong length");
    x0.tail(k) = *lambda_guess;
  }
  Eigen::VectorXd x = x0;
  SolveReport rep = detail::newton_solve(sys, x, scheme);
  if (!rep.converged() && scheme.multistart && k >= 1 && k <= 3 && scheme.max_iterations > 0) {
    for (const auto& start : detail::lambda_starts(k)) {
      Eigen::VectorXd xs = x0;
      for (int j = 0; j < k; ++j) xs[xs.size() - k + j] = start[j];
      SolveReport r = detail::newton_solve(sys, xs, scheme);
      if (r.converged()) {
        rep = r;
        x = xs;
        break;
      }
    }
  }
  Ctx ctx = sys.build(x);
  rep.lambda = ctx.lambda;
  return PmpSolution{std::move(ctx.triple), ctx.lambda, rep};
}

// ------------------------------------------------------------ verification sweep

/// Residual sweep of every necessary condition over a regime-respecting grid.
inline ResidualReport verify(const IsoperimetricProblem& p, const Trajectory& q, const Eigen::VectorXd& lambda,
                             double tol = 1e-6, int samples = 200) {
  const AugmentedSetup setup{p, lambda};
  const detail::PathEval path = detail::path_for(setup, q);
  ResidualReport rep;
  rep.grid = residual_grid(p, q, samples);
  for (double t : rep.grid.times) {
    const Regime regime = regime_of(t, p.t2, p.tau);
    rep.regimes.push_back(regime);
    const Eigen::VectorXd el = detail::el_residual(path, t, regime);
    (regime == Regime::First ? rep.el_sup_first : rep.el_sup_second) =
        std::max(regime == Regime::First ? rep.el_sup_first : rep.el_sup_second, el.norm());
    rep.el.push_back(el);
    rep.dr_quantity.push_back(detail::dr_quantity_series(path, t, regime, 0).c[0]);
    const double drr = detail::dr_residual(path, t, regime);
    rep.dr_residual.push_back(drr);
    rep.dr_sup = std::max(rep.dr_sup, std::abs(drr));
    if (t <= p.t2 - p.tau) {
      const double c = detail::cdur_residual(path, t);
      rep.cdur.push_back(c);
      rep.cdur_sup = std::max(rep.cdur_sup, std::abs(c));
    } else {
      rep.cdur.push_back(std::nullopt);
    }
  }
  rep.constraint_defect = constraint_defect(p, q);
  rep.hypothesis_violated = rep.cdur_sup > tol;
  if (p.k() > 0) {
    rep.classification = classify(p, q).kind;
    rep.abnormal = *rep.classification == Classification::Abnormal;
  }
  return rep;
}

}  // namespace delvar
