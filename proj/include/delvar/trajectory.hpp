#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "delvar/error.hpp"

namespace delvar {

/// Which one-sided limit to take when a time coincides with a segment boundary.
enum class Side { Right, Left };

/// One polynomial piece of a vector path.  Coefficients are stored per
/// component in powers of (t - midpoint).
class PolySegment {
 public:
  PolySegment(double a, double b, std::vector<std::vector<double>> coeffs)
      : a_(a), b_(b), coeffs_(std::move(coeffs)) {
    if (!(a_ < b_)) throw Error(ErrorCode::InvalidTrajectory, "segment requires a < b");
    if (coeffs_.empty()) throw Error(ErrorCode::InvalidTrajectory, "segment without components");
    for (const auto& c : coeffs_) {
      if (c.size() != coeffs_.front().size() || c.empty())
        throw Error(ErrorCode::InvalidTrajectory, "component coefficient lists differ in length");
    }
  }

  /// Build from coefficients in powers of t (not shifted).
  static PolySegment from_monomial(double a, double b, const std::vector<std::vector<double>>& in_t) {
    const double mid = 0.5 * (a + b);
    std::vector<std::vector<double>> shifted;
    shifted.reserve(in_t.size());
    for (const auto& c : in_t) {
      // Taylor shift: p(mid + x) = sum_k x^k p^{(k)}(mid) / k!
      const int deg = static_cast<int>(c.size()) - 1;
      std::vector<double> out(c.size(), 0.0);
      std::vector<double> work = c;
      for (int k = 0; k <= deg; ++k) {
        // Horner evaluation of the current (derivative/k!) polynomial at mid.
        double v = 0.0;
        for (int r = deg - k; r >= 0; --r) v = v * mid + work[r];
        out[k] = v;
        for (int r = 0; r < deg - k; ++r) work[r] = work[r + 1] * double(r + 1) / double(k + 1);
      }
      shifted.push_back(std::move(out));
    }
    return PolySegment(a, b, std::move(shifted));
  }

  double start() const { return a_; }
  double end() const { return b_; }
  double midpoint() const { return 0.5 * (a_ + b_); }
  int dimension() const { return static_cast<int>(coeffs_.size()); }
  int degree() const { return static_cast<int>(coeffs_.front().size()) - 1; }
  const std::vector<std::vector<double>>& coefficients() const { return coeffs_; }

  /// order-th derivative of one component; zero beyond the degree.
  double derivative(int component, double t, int order) const {
    const auto& c = coeffs_[component];
    const int deg = static_cast<int>(c.size()) - 1;
    if (order > deg) return 0.0;
    const double x = t - midpoint();
    double v = 0.0;
    for (int r = deg; r >= order; --r) {
      double f = 1.0;
      for (int i = 0; i < order; ++i) f *= double(r - i);
      v = v * x + f * c[r];
    }
    return v;
  }

 private:
  double a_;
  double b_;
  std::vector<std::vector<double>> coeffs_;
};

/// Piecewise-polynomial path on [start, end] with smoothness class m:
/// derivatives 0..m-1 are continuous except at declared nonsmooth knots,
/// where only the value must match.  m = 0 allows jumps everywhere.
class Trajectory {
 public:
  static constexpr double kContiguityTol = 1e-12;
  static constexpr double kContinuityTol = 1e-9;

  Trajectory(int n, int m, std::vector<PolySegment> segments, std::vector<double> nonsmooth_knots = {})
      : Trajectory(n, m, std::move(segments), std::move(nonsmooth_knots), true) {}

  /// Construct without continuity checks (solver iterates).
  static Trajectory unchecked(int n, int m, std::vector<PolySegment> segments,
                              std::vector<double> nonsmooth_knots = {}) {
    return Trajectory(n, m, std::move(segments), std::move(nonsmooth_knots), false);
  }

  int dimension() const { return n_; }
  int smoothness() const { return m_; }
  double start() const { return segments_.front().start(); }
  double end() const { return segments_.back().end(); }
  int max_degree() const { return max_degree_; }
  const std::vector<PolySegment>& segments() const { return segments_; }
  const std::vector<double>& nonsmooth_knots() const { return nonsmooth_; }

  bool contains(double t) const {
    const double slack = kContiguityTol * (1.0 + std::abs(t));
    return t >= start() - slack && t <= end() + slack;
  }

  Eigen::VectorXd eval(double t, int order, Side side = Side::Right) const {
    if (order < 0 || order > max_degree_)
      throw Error(ErrorCode::OrderTooHigh,
                  "derivative order " + std::to_string(order) + " exceeds degree " + std::to_string(max_degree_));
    const PolySegment& s = segment_at(t, side);
    Eigen::VectorXd out(n_);
    for (int c = 0; c < n_; ++c) out[c] = s.derivative(c, t, order);
    return out;
  }

  Eigen::VectorXd shifted_eval(double t, int order, double shift, Side side = Side::Right) const {
    return eval(t + shift, order, side);
  }

  /// Derivatives 0..max_order as columns (n x (max_order+1)); orders above the
  /// segment degree are zero.
  Eigen::MatrixXd derivatives(double t, int max_order, Side side = Side::Right) const {
    const PolySegment& s = segment_at(t, side);
    Eigen::MatrixXd out(n_, max_order + 1);
    for (int c = 0; c < n_; ++c)
      for (int r = 0; r <= max_order; ++r) out(c, r) = s.derivative(c, t, r);
    return out;
  }

  /// Sorted segment boundaries including both domain ends.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    out.reserve(segments_.size() + 1);
    for (const auto& s : segments_) out.push_back(s.start());
    out.push_back(end());
    return out;
  }

  bool is_nonsmooth_knot(double t) const {
    return std::any_of(nonsmooth_.begin(), nonsmooth_.end(),
                       [t](double k) { return std::abs(k - t) <= 1e-12 * (1.0 + std::abs(t)); });
  }

  /// Throws InvalidTrajectory when a contiguity or continuity invariant fails.
  void validate() const {
    for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
      const PolySegment& l = segments_[i];
      const PolySegment& r = segments_[i + 1];
      if (std::abs(l.end() - r.start()) >= kContiguityTol)
        throw Error(ErrorCode::InvalidTrajectory, "segments are not contiguous at " + std::to_string(l.end()));
      const double knot = r.start();
      const int orders = is_nonsmooth_knot(knot) ? std::min(1, m_) : m_;
      for (int c = 0; c < n_; ++c) {
        for (int k = 0; k < orders; ++k) {
          const double vl = l.derivative(c, l.end(), k);
          const double vr = r.derivative(c, knot, k);
          if (std::abs(vl - vr) > kContinuityTol * std::max(1.0, std::abs(vl)))
            throw Error(ErrorCode::InvalidTrajectory, "derivative " + std::to_string(k) +
                                                          " jumps at knot " + std::to_string(knot));
        }
      }
    }
  }

 private:
  Trajectory(int n, int m, std::vector<PolySegment> segments, std::vector<double> nonsmooth, bool check)
      : n_(n), m_(m), segments_(std::move(segments)), nonsmooth_(std::move(nonsmooth)) {
    if (n_ < 1) throw Error(ErrorCode::InvalidTrajectory, "dimension must be positive");
    if (m_ < 0) throw Error(ErrorCode::InvalidTrajectory, "smoothness order must be non-negative");
    if (segments_.empty()) throw Error(ErrorCode::InvalidTrajectory, "trajectory without segments");
    std::sort(segments_.begin(), segments_.end(),
              [](const PolySegment& a, const PolySegment& b) { return a.start() < b.start(); });
    std::sort(nonsmooth_.begin(), nonsmooth_.end());
    max_degree_ = 0;
    for (const auto& s : segments_) {
      if (s.dimension() != n_) throw Error(ErrorCode::InvalidTrajectory, "segment dimension mismatch");
      max_degree_ = std::max(max_degree_, s.degree());
    }
    starts_.reserve(segments_.size());
    for (const auto& s : segments_) starts_.push_back(s.start());
    if (check) validate();
  }

  const PolySegment& segment_at(double t, Side side) const {
    if (!contains(t))
      throw Error(ErrorCode::OutOfDomain, "t = " + std::to_string(t) + " outside [" + std::to_string(start()) +
                                              ", " + std::to_string(end()) + "]");
    std::size_t idx;
    if (side == Side::Right) {
      // Last segment whose start is <= t; the domain end belongs to the last segment.
      auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
      idx = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
    } else {
      // First segment whose start is < t.
      auto it = std::lower_bound(starts_.begin(), starts_.end(), t);
      idx = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
    }
    return segments_[idx];
  }

  int n_;
  int m_;
  std::vector<PolySegment> segments_;
  std::vector<double> nonsmooth_;
  std::vector<double> starts_;
  int max_degree_ = 0;
};

/// Piecewise quartic extremal used as the worked second-order example:
/// -t^4 on [-1,0], t^4 on [0,1], -t^4+2 on [1,2]; t = 1 is a corner.
inline Trajectory example1_trajectory() {
  std::vector<PolySegment> segs;
  segs.push_back(PolySegment::from_monomial(-1.0, 0.0, {{0, 0, 0, 0, -1}}));
  segs.push_back(PolySegment::from_monomial(0.0, 1.0, {{0, 0, 0, 0, 1}}));
  segs.push_back(PolySegment::from_monomial(1.0, 2.0, {{2, 0, 0, 0, -1}}));
  return Trajectory(1, 2, std::move(segs), {1.0});
}

/// Sample times inside [a, b] kept a fixed distance away from excluded points.
struct Grid {
  std::vector<double> times;
  double knot_radius = 0.0;

  bool empty() const { return times.empty(); }
  std::size_t size() const { return times.size(); }
};

/// `count` points spread uniformly over [a, b] minus radius-neighbourhoods of
/// the excluded points (and of a and b themselves).
inline Grid make_grid(double a, double b, int count, std::span<const double> excluded, double radius) {
  if (count <= 0) throw Error(ErrorCode::EmptyGrid, "grid needs a positive point count");
  std::vector<double> cuts{a, b};
  for (double e : excluded)
    if (e > a && e < b) cuts.push_back(e);
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::pair<double, double>> pieces;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i] + radius;
    const double hi = cuts[i + 1] - radius;
    if (hi > lo) {
      pieces.emplace_back(lo, hi);
      total += hi - lo;
    }
  }
  if (pieces.empty() || total <= 0.0) throw Error(ErrorCode::EmptyGrid, "no admissible sample region");
  Grid g;
  g.knot_radius = radius;
  g.times.reserve(count);
  std::size_t p = 0;
  double consumed = 0.0;
  for (int k = 0; k < count; ++k) {
    double s = (k + 0.5) * total / count;
    while (p + 1 < pieces.size() && s > consumed + (pieces[p].second - pieces[p].first)) {
      consumed += pieces[p].second - pieces[p].first;
      ++p;
    }
    g.times.push_back(std::min(pieces[p].first + (s - consumed), pieces[p].second));
  }
  return g;
}

}  // namespace delvar
