#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "delvar/error.hpp"
#include "delvar/function.hpp"

namespace delvar {

/// Block structure of a flat argument vector.  Blocks are numbered from 1.
///
/// Variational layout for order m, dimension n:
///   1 = t, 2..m+2 = q..q^(m), m+3..2m+3 = q(t-tau)..q^(m)(t-tau).
/// Control layout for state dimension n and control dimension mc:
///   1 = t, 2 = q, 3 = u, 4 = q(t-tau), 5 = u(t-tau).
class ArgLayout {
 public:
  ArgLayout() = default;
  explicit ArgLayout(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    offsets_.resize(sizes_.size());
    int acc = 0;
    for (std::size_t b = 0; b < sizes_.size(); ++b) {
      offsets_[b] = acc;
      acc += sizes_[b];
    }
    total_ = acc;
  }

  static ArgLayout variational(int n, int m) {
    std::vector<int> sizes{1};
    for (int j = 0; j < 2 * (m + 1); ++j) sizes.push_back(n);
    return ArgLayout(std::move(sizes));
  }

  static ArgLayout control(int n, int mc) { return ArgLayout({1, n, mc, n, mc}); }

  int blocks() const { return static_cast<int>(sizes_.size()); }
  int total() const { return total_; }

  int size(int block) const {
    check(block);
    return sizes_[block - 1];
  }
  int offset(int block) const {
    check(block);
    return offsets_[block - 1];
  }

  void check(int block) const {
    if (block < 1 || block > blocks())
      throw Error(ErrorCode::BlockOutOfRange,
                  "block " + std::to_string(block) + " not in 1.." + std::to_string(blocks()));
  }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int total_ = 0;
};

/// Scalar integrand over an argument vector, with optional analytic block partials.
class Integrand {
 public:
  using BlockPartial = std::function<Eigen::VectorXd(int block, std::span<const double> args)>;

  Integrand() : f_(ScalarFunction::constant(0.0)) {}
  Integrand(ScalarFunction f, BlockPartial partial = {})  // NOLINT: functions promote implicitly
      : f_(std::move(f)), partial_(std::move(partial)) {}

  template <typename S>
  S operator()(std::span<const S> args) const {
    return f_(args);
  }
  double operator()(const std::vector<double>& args) const { return f_(std::span<const double>(args)); }

  const ScalarFunction& function() const { return f_; }
  bool differentiable() const { return f_.differentiable(); }
  bool has_analytic_partial() const { return static_cast<bool>(partial_); }
  const BlockPartial& analytic_partial() const { return partial_; }

 private:
  ScalarFunction f_;
  BlockPartial partial_;
};

/// sum_j w_j f_j, preserving differentiability and analytic partials when all parts have them.
inline Integrand linear_combination(const std::vector<Integrand>& parts, const std::vector<double>& weights) {
  const bool diff = std::all_of(parts.begin(), parts.end(), [](const Integrand& p) { return p.differentiable(); });
  const bool analytic =
      std::all_of(parts.begin(), parts.end(), [](const Integrand& p) { return p.has_analytic_partial(); });
  ScalarFunction f;
  if (diff) {
    f = ScalarFunction::generic(
        [parts, weights](auto args) {
          using S = typename decltype(args)::value_type;
          S acc(0.0);
          for (std::size_t j = 0; j < parts.size(); ++j)
            if (weights[j] != 0.0) acc = acc + weights[j] * parts[j](args);
          return acc;
        },
        -1);
  } else {
    f = ScalarFunction::numeric(
        [parts, weights](std::span<const double> args) {
          double acc = 0.0;
          for (std::size_t j = 0; j < parts.size(); ++j)
            if (weights[j] != 0.0) acc += weights[j] * parts[j](args);
          return acc;
        },
        -1);
  }
  Integrand::BlockPartial partial;
  if (analytic && !parts.empty()) {
    partial = [parts, weights](int block, std::span<const double> args) {
      Eigen::VectorXd acc = weights[0] * parts[0].analytic_partial()(block, args);
      for (std::size_t j = 1; j < parts.size(); ++j) acc += weights[j] * parts[j].analytic_partial()(block, args);
      return acc;
    };
  }
  return Integrand(std::move(f), std::move(partial));
}

}  // namespace delvar
