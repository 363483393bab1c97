#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace delvar;

TEST(Partial, SimpleAndExample1) {
  const Integrand f(ScalarFunction::generic([](auto a) { return a[2] * a[2]; }, 5));
  const std::vector<double> args{0.0, 1.0, 3.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(partial(f, ArgLayout::variational(1, 1), 3, args)[0], 6.0);
  EXPECT_DOUBLE_EQ(partial(f, ArgLayout::variational(1, 1), 1, args)[0], 0.0);

  const auto p = support::example1();
  const Trajectory q = example1_trajectory();
  const auto x = detail::path_args(q, 2, 1.0, 1.5);
  EXPECT_DOUBLE_EQ(partial(p.L, p.layout(), 4, x)[0], -48.0);
  EXPECT_THROW(partial(p.L, p.layout(), 8, x), Error);
}

TEST(Partial, FiniteDifferenceMatchesDual) {
  auto body = [](auto a) {
    using std::sin, std::exp;
    return sin(a[0]) * a[1] * a[2] + exp(0.3 * a[3]) * a[4] * a[4] + a[1] * a[4];
  };
  const Integrand exact(ScalarFunction::generic(body, 5));
  const Integrand numeric(ScalarFunction::numeric([body](std::span<const double> a) { return body(a); }, 5));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  const ArgLayout layout = ArgLayout::variational(1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(5);
    for (double& v : x) v = U(rng);
    for (int block = 1; block <= 5; ++block) {
      const double a = partial(exact, layout, block, x)[0];
      const double b = partial(numeric, layout, block, x)[0];
      EXPECT_NEAR(b, a, 1e-6 * (1.0 + std::abs(a)));
    }
  }
}

TEST(Partial, AnalyticPartialIsUsed) {
  const Integrand f(ScalarFunction::numeric([](std::span<const double> a) { return a[1] * a[1]; }, 3),
                    [](int block, std::span<const double> a) {
                      Eigen::VectorXd v = Eigen::VectorXd::Zero(1);
                      if (block == 2) v[0] = 2.0 * a[1];
                      return v;
                    });
  const std::vector<double> x{0.0, 1.25, 0.0};
  EXPECT_EQ(partial(f, ArgLayout({1, 1, 1}), 2, x)[0], 2.5);
}

TEST(TotalDerivative, Polynomials) {
  const StencilConfig cfg{1e-3, {}};
  EXPECT_NEAR(total_derivative([](double t) { return t * t; }, 3.0, 1, cfg), 6.0, 1e-8);
  EXPECT_NEAR(total_derivative([](double t) { return t * t * t; }, 2.0, 2, cfg), 12.0, 1e-5);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = U(rng), b = U(rng), c = U(rng), d = U(rng), e = U(rng);
    auto f = [&](double t) { return a + b * t + c * t * t + d * t * t * t + e * t * t * t * t; };
    const double t = U(rng);
    const double ref = b + 2 * c * t + 3 * d * t * t + 4 * e * t * t * t;
    EXPECT_NEAR(total_derivative(f, t, 1, cfg), ref, 1e-8);
  }
}

TEST(TotalDerivative, OneSidedNearWalls) {
  const StencilConfig cfg{1e-3, {1.0}};
  auto f = [](double t) { return t < 1.0 ? t * t : -t; };
  EXPECT_NEAR(total_derivative(f, 0.999, 1, cfg), 1.998, 1e-7);
  EXPECT_NEAR(total_derivative(f, 1.0005, 1, cfg), -1.0, 1e-7);
  const StencilConfig tight{1e-3, {0.0, 0.003}};
  EXPECT_THROW(total_derivative(f, 0.0015, 1, tight), Error);
}

TEST(TotalDerivative, Example1PartialAlongPath) {
  const auto p = support::example1();
  const Trajectory q = example1_trajectory();
  auto f = [&](double t) { return partial(p.L, p.layout(), 4, detail::path_args(q, 2, 1.0, t))[0]; };
  EXPECT_NEAR(total_derivative(f, 1.5, 1, StencilConfig{2e-4, {1.0, 2.0}}), -48.0, 1e-6);
}

TEST(Integrate, Basics) {
  EXPECT_NEAR(integrate([](double t) { return t * t * t; }, 0.0, 1.0), 0.25, 1e-15);
  // antiderivative of 144 (2t - 1)^2 is 24 (2t - 1)^3
  const double oracle = 24.0 * std::pow(3.0, 3) - 24.0 * std::pow(-1.0, 3);
  EXPECT_NEAR(integrate([](double t) { return 144.0 * (2 * t - 1) * (2 * t - 1); }, 0.0, 2.0), oracle, 1e-9);
  EXPECT_EQ(integrate([](double t) { return t; }, 1.0, 1.0), 0.0);
  EXPECT_THROW(integrate([](double t) { return t; }, 1.0, 0.0), Error);
}

TEST(Integrate, ExactForDegree15OnOnePanel) {
  const auto& rule = gauss8();
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::pow(0.5 + 0.5 * rule.nodes[i], 15) * 0.5;
  EXPECT_NEAR(s, 1.0 / 16.0, 1e-12);
}

TEST(Integrate, SplitsAtBreaks) {
  auto f = [](double t) { return t < 0.3 ? 1.0 : 2.0; };
  const std::vector<double> br{0.3};
  EXPECT_NEAR(integrate(f, 0.0, 1.0, br), 0.3 + 1.4, 1e-13);
}

TEST(DerivativeInParameter, Examples) {
  EXPECT_NEAR(derivative_in_parameter([](double s) { return 3 * s + 7; }).value, 3.0, 1e-10);
  EXPECT_NEAR(derivative_in_parameter([](double s) { return s * s; }).value, 0.0, 1e-12);
  EXPECT_NEAR(derivative_in_parameter([](double s) { return std::sin(s); }).value, 1.0, 1e-10);
}
