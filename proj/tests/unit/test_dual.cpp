#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dawnik/dual.hpp"

namespace dawnik {
namespace {

using D2 = Dual<2>;

// Derivative of f at x by central differences.
template <typename F>
double numeric(F f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

TEST(Dual, SeedsOneSlot) {
  const D2 x = D2::variable(1.5, 1);
  EXPECT_EQ(x.v, 1.5);
  EXPECT_EQ(x.d[0], 0.0);
  EXPECT_EQ(x.d[1], 1.0);
}

TEST(Dual, ProductAndQuotientRules) {
  const D2 x = D2::variable(2.0, 0);
  const D2 y = D2::variable(3.0, 1);
  const D2 p = x * y;
  EXPECT_DOUBLE_EQ(p.d[0], 3.0);
  EXPECT_DOUBLE_EQ(p.d[1], 2.0);
  const D2 q = x / y;
  EXPECT_DOUBLE_EQ(q.v, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(q.d[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(q.d[1], -2.0 / 9.0);
}

TEST(Dual, ElementaryFunctionsMatchFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (int i = 0; i < 50; ++i) {
    const double x0 = u(rng);
    const D2 x = D2::variable(x0, 0);
    EXPECT_NEAR(sin(x).d[0], numeric([](double t) { return std::sin(t); }, x0), 1e-8);
    EXPECT_NEAR(cos(x).d[0], numeric([](double t) { return std::cos(t); }, x0), 1e-8);
    EXPECT_NEAR(sqrt(x).d[0], numeric([](double t) { return std::sqrt(t); }, x0), 1e-8);
    EXPECT_NEAR(log(x).d[0], numeric([](double t) { return std::log(t); }, x0), 1e-8);
    EXPECT_NEAR(log1p(x).d[0], numeric([](double t) { return std::log1p(t); }, x0), 1e-8);
    EXPECT_NEAR(exp(x).d[0], numeric([](double t) { return std::exp(t); }, x0), 1e-7);
    EXPECT_NEAR(atan2(x, D2(0.7)).d[0], numeric([](double t) { return std::atan2(t, 0.7); }, x0), 1e-8);
    EXPECT_NEAR(atan2(D2(0.7), x).d[0], numeric([](double t) { return std::atan2(0.7, t); }, x0), 1e-8);
  }
}

TEST(Dual, ComparisonsUseValueOnly) {
  D2 a = D2::variable(1.0, 0);
  D2 b(1.0);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a < b);
  EXPECT_TRUE(a < 2.0);
}

TEST(Dual, NonFiniteGradientDetected) {
  D2 x = D2::variable(0.0, 0);
  EXPECT_TRUE(isfinite(x));
  EXPECT_FALSE(isfinite(sqrt(x)));  // infinite slope at zero
}

}  // namespace
}  // namespace dawnik
