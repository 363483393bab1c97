#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>

#include "delvar/autodiff.hpp"
#include "delvar/error.hpp"

namespace delvar {

/// Type-erased scalar function of a flat argument vector.
///
/// A function built with `generic` is instantiated for every scalar type the
/// library differentiates with (double, Dual, Jet, Jet<Dual>), so partials and
/// time derivatives along a path are exact.  A function built with `numeric`
/// only evaluates on doubles; callers then fall back to finite differences
/// and stencils.
class ScalarFunction {
 public:
  ScalarFunction() : ScalarFunction(constant(0.0)) {}

  template <typename F>
  static ScalarFunction generic(F f, int arity) {
    return ScalarFunction(std::make_shared<GenericModel<F>>(std::move(f)), arity);
  }

  static ScalarFunction numeric(std::function<double(std::span<const double>)> f, int arity) {
    return ScalarFunction(std::make_shared<NumericModel>(std::move(f)), arity);
  }

  static ScalarFunction constant(double c, int arity = -1) {
    return generic([c](auto args) { return typename decltype(args)::value_type(c); }, arity);
  }

  double operator()(std::span<const double> x) const { return impl_->eval(x); }
  D1 operator()(std::span<const D1> x) const { return impl_->eval(x); }
  J1 operator()(std::span<const J1> x) const { return impl_->eval(x); }
  JD operator()(std::span<const JD> x) const { return impl_->eval(x); }

  template <typename S>
  S eval(std::span<const S> x) const {
    return (*this)(x);
  }

  bool differentiable() const { return impl_->differentiable(); }
  /// Expected argument count; -1 when the function accepts any length.
  int arity() const { return arity_; }

 private:
  struct Concept {
    virtual ~Concept() = default;
    virtual double eval(std::span<const double>) const = 0;
    virtual D1 eval(std::span<const D1>) const = 0;
    virtual J1 eval(std::span<const J1>) const = 0;
    virtual JD eval(std::span<const JD>) const = 0;
    virtual bool differentiable() const = 0;
  };

  template <typename F>
  struct GenericModel final : Concept {
    explicit GenericModel(F fn) : f(std::move(fn)) {}
    double eval(std::span<const double> x) const override { return f(x); }
    D1 eval(std::span<const D1> x) const override { return f(x); }
    J1 eval(std::span<const J1> x) const override { return f(x); }
    JD eval(std::span<const JD> x) const override { return f(x); }
    bool differentiable() const override { return true; }
    F f;
  };

  struct NumericModel final : Concept {
    explicit NumericModel(std::function<double(std::span<const double>)> fn) : f(std::move(fn)) {}
    double eval(std::span<const double> x) const override { return f(x); }
    D1 eval(std::span<const D1>) const override { throw unsupported(); }
    J1 eval(std::span<const J1>) const override { throw unsupported(); }
    JD eval(std::span<const JD>) const override { throw unsupported(); }
    bool differentiable() const override { return false; }
    static Error unsupported() {
      return Error(ErrorCode::NotDifferentiable, "function supports double evaluation only");
    }
    std::function<double(std::span<const double>)> f;
  };

  ScalarFunction(std::shared_ptr<const Concept> impl, int arity)
      : impl_(std::move(impl)), arity_(arity) {}

  std::shared_ptr<const Concept> impl_;
  int arity_ = -1;
};

/// Evaluate a unary function of time on a jet of the given order.
template <typename T = double>
Jet<T> eval_in_time(const ScalarFunction& f, double t, int order) {
  Jet<T> arg = Jet<T>::truncated(order);
  arg.c[0] = T(t);
  if (order >= 1) arg.c[1] = T(1.0);
  return f(std::span<const Jet<T>>(&arg, 1));
}

/// Derivative d/dt of a unary generic function of time, itself generic.
inline ScalarFunction time_derivative_of(const ScalarFunction& f) {
  if (!f.differentiable())
    throw Error(ErrorCode::NotDifferentiable, "time derivative of a numeric-only function");
  return ScalarFunction::generic(
      [f](auto args) {
        using S = typename decltype(args)::value_type;
        const S& t = args[0];
        if constexpr (std::is_same_v<S, double>) {
          J1 j = eval_in_time<double>(f, t, 1);
          return j.c[1];
        } else if constexpr (std::is_same_v<S, D1>) {
          Jet<D1> arg = Jet<D1>::truncated(2);
          arg.c[0] = t;
          arg.c[1] = D1(1.0);
          JD j = f(std::span<const JD>(&arg, 1));
          // d/dt of the first Taylor coefficient needs 2*c2 for the dual part.
          return D1(j.c[1].v, 2.0 * j.c[2].v * t.d);
        } else {
          // Jets: only the identity time expansion t0 + s is supported, which
          // is how histories are differentiated.
          using C = std::remove_cv_t<std::remove_reference_t<decltype(t.c[0])>>;
          for (int r = 2; r <= t.order; ++r)
            if (value(t.c[r]) != 0.0)
              throw Error(ErrorCode::NotDifferentiable, "time derivative requires a linear time jet");
          if (t.order >= kMaxJetOrder)
            throw Error(ErrorCode::OrderTooHigh, "jet order exhausted in time derivative");
          const bool constant_time = t.order < 1 || value(t.c[1]) == 0.0;
          S arg = S::truncated(t.order + 1);
          arg.c[0] = t.c[0];
          arg.c[1] = constant_time ? C(1.0) : t.c[1];
          S out = f(std::span<const S>(&arg, 1));
          S res = S::truncated(t.order);
          if (constant_time) {
            res.c[0] = out.c[1];
            for (int r = 1; r <= t.order; ++r) res.c[r] = C(0.0);
          } else {
            for (int r = 0; r <= t.order; ++r) res.c[r] = double(r + 1) * out.c[r + 1] / t.c[1];
          }
          return res;
        }
      },
      1);
}

}  // namespace delvar
