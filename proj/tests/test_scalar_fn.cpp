#include "ctk/scalar_fn.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ctk;

TEST(ScalarFn, CatalogValues) {
  EXPECT_DOUBLE_EQ(ScalarFn::linear(2.0).value(1.5), 3.0);
  EXPECT_DOUBLE_EQ(ScalarFn::power(2.0, 3.0).value(-2.0), -16.0);
  EXPECT_NEAR(ScalarFn::saturating_exponential(1.0, 2.0).value(1.0), 1 - std::exp(-2.0), 1e-15);
  EXPECT_NEAR(ScalarFn::tanh_like(0.5, 1.0).value(0.3), 0.5 * std::tanh(0.3), 1e-15);
  EXPECT_NEAR(ScalarFn::xexp(1.0, 1.0).value(1.0), std::exp(-1.0), 1e-15);
  EXPECT_DOUBLE_EQ(ScalarFn::zero().value(4.0), 0.0);
}

TEST(ScalarFn, PiecewiseLinear) {
  const auto f = ScalarFn::piecewise_linear({1.0, 2.0}, {2.0, 2.5});
  EXPECT_DOUBLE_EQ(f.value(0.5), 1.0);
  EXPECT_DOUBLE_EQ(f.value(1.5), 2.25);
  EXPECT_DOUBLE_EQ(f.value(3.0), 3.0);
  EXPECT_DOUBLE_EQ(f.value(-1.0), -2.0);
  const auto s = f.derivative(1.0);
  EXPECT_TRUE(s.at_knot);
  EXPECT_DOUBLE_EQ(s.value, 0.5);
}

TEST(ScalarFn, DerivativesMatchFiniteDifferences) {
  for (const auto& f : {ScalarFn::power(1.5, 2.5), ScalarFn::saturating_exponential(2.0, 0.7),
                        ScalarFn::tanh_like(0.5, 2.0), ScalarFn::xexp(1.0, 0.5)}) {
    for (double x : {0.2, 1.0, 2.5}) {
      const double h = 1e-6;
      EXPECT_NEAR(f.derivative(x).value, (f.value(x + h) - f.value(x - h)) / (2 * h), 1e-6) << f.describe();
    }
  }
}

TEST(ScalarFn, InverseAndSector) {
  const auto f = ScalarFn::saturating_exponential(2.0, 1.0);
  EXPECT_NEAR(f.value(f.inverse(1.3)), 1.3, 1e-12);
  EXPECT_DOUBLE_EQ(ScalarFn::tanh_like(0.5, 1.0).sector_bound(), 0.5);
  EXPECT_TRUE(std::isinf(ScalarFn::power(1.0, 2.0).sector_bound()));
  EXPECT_THROW(ScalarFn::xexp(1.0, 1.0).inverse(0.1), InputError);
}

TEST(ScalarFn, ClassValidation) {
  auto f = ScalarFn::saturating_exponential(1.0, 1.0);
  f.declare(FnClass::K);
  EXPECT_NO_THROW(f.validate());
  f.declare(FnClass::K_inf);
  EXPECT_THROW(f.validate(), InputError);
  auto g = ScalarFn::xexp(1.0, 1.0);
  g.declare(FnClass::K);
  EXPECT_THROW(g.validate(), InputError);
  EXPECT_THROW(ScalarFn::power(1.0, 0.5), InputError);
}

TEST(ScalarFn, JsonRoundTrip) {
  const auto f = scalar_fn_from_json(Json::parse(R"({"kind": "tanh_like", "a": 0.5, "k": 2, "class": "K"})"));
  EXPECT_EQ(f.kind(), ScalarKind::tanh_like);
  EXPECT_EQ(f.declared(), FnClass::K);
  const auto g = scalar_fn_from_json(to_json(f));
  EXPECT_DOUBLE_EQ(g.value(0.7), f.value(0.7));
  EXPECT_THROW(scalar_fn_from_json(Json::parse(R"({"kind": "cosine"})")), InputError);
}
