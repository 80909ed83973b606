#include "ctk/measures.hpp"
#include "ctk/odesim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace ctk;

TEST(Flow, ExponentialDecay) {
  const auto vf = linear_field(Matrix::Constant(1, 1, -1.0));
  const auto tr = flow(vf, 0.0, Vector::Ones(1), 3.0);
  ASSERT_TRUE(tr.ok());
  EXPECT_NEAR(tr.final_state()(0), std::exp(-3.0), 1e-8);
  EXPECT_NEAR(tr.state_at(1.3)(0), std::exp(-1.3), 1e-7);
}

TEST(Flow, HarmonicOscillatorKeepsRadius) {
  Matrix a(2, 2);
  a << 0, 1, -1, 0;
  const auto tr = flow(linear_field(a), 0.0, (Vector(2) << 1.0, 0.0).finished(), 2 * std::numbers::pi);
  EXPECT_NEAR(tr.final_state()(0), 1.0, 1e-7);
  EXPECT_NEAR(tr.final_state()(1), 0.0, 1e-7);
}

TEST(Flow, HonorsMaxStep) {
  StepControl sc;
  sc.h_max = 0.01;
  const auto tr = flow(linear_field(Matrix::Constant(1, 1, -1.0)), 0.0, Vector::Ones(1), 1.0, sc);
  for (std::size_t k = 1; k < tr.size(); ++k) EXPECT_LE(tr.times()[k] - tr.times()[k - 1], 0.01 + 1e-15);
}

TEST(Flow, ReportsBlowUp) {
  VectorField vf;
  vf.dim = 1;
  vf.rhs = [](double, const Vector& x) { return Vector(x.array().square()); };
  StepControl sc;
  sc.max_steps = 5000;
  const auto tr = flow(vf, 0.0, Vector::Ones(1), 2.0, sc);
  EXPECT_FALSE(tr.ok());
}

TEST(Quadrature, GaussLegendreExactForDegree31) {
  const auto& q = gauss_legendre_16();
  double s = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * std::pow(q.nodes[i], 31);
  EXPECT_NEAR(s, 1.0 / 32.0, 1e-14);
}

TEST(AverageJacobian, FactorsTheField) {
  VectorField vf;
  vf.dim = 2;
  vf.rhs = [](double, const Vector& x) { return Vector((Vector(2) << -x(0) + x(1) * x(1), -2 * x(1) + std::tanh(x(0))).finished()); };
  const Vector x = (Vector(2) << 0.7, -0.4).finished();
  EXPECT_LT((average_jacobian(vf, 0.0, x) * x - vf(0.0, x)).norm(), 1e-8);
}

TEST(Order, MonotoneLinearSystemPreservesOrder) {
  Matrix a(2, 2);
  a << -1, 0.5, 0.3, -2;
  const auto r = check_order_preservation(linear_field(a), (Vector(2) << 1.0, 1.0).finished(),
                                          (Vector(2) << 1.5, 1.2).finished(), 5.0);
  EXPECT_TRUE(r.passed);
}

TEST(Order, NonMetzlerSystemBreaksOrder) {
  Matrix a(2, 2);
  a << -1, -2, 0, -1;
  const auto r = check_order_preservation(linear_field(a), Vector::Zero(2), (Vector(2) << 0.0, 1.0).finished(), 3.0);
  EXPECT_FALSE(r.passed);
}

TEST(Positivity, DetectsOutwardField) {
  Matrix a(2, 2);
  a << -1, 1, 1, -1;
  EXPECT_TRUE(check_positivity(linear_field(a)).passed);
  a(0, 1) = -1;
  EXPECT_FALSE(check_positivity(linear_field(a)).passed);
}

TEST(Coppel, ConstantMetzlerBound) {
  Matrix a(2, 2);
  a << -2, 1, 0.5, -1;
  for (Exponent p : {Exponent::finite(1.0), Exponent::finite(2.0), Exponent::infinity()}) {
    const auto r = coppel_check([a](double) { return a; }, (Vector(2) << 1.0, 0.2).finished(), NormSpec::identity(p), 5.0);
    EXPECT_TRUE(r.passed) << p.to_string() << " ratio " << r.worst_ratio;
  }
}

TEST(Coppel, RefusesNonMetzler) {
  Matrix a(2, 2);
  a << -2, -1, 0.5, -1;
  EXPECT_THROW(coppel_check([a](double) { return a; }, Vector::Ones(2), NormSpec(), 1.0), HypothesisError);
}

TEST(Box, SamplesStayInside) {
  const Box b = Box::uniform(3, -1.0, 2.0);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) EXPECT_TRUE(b.contains(b.sample(rng)));
  EXPECT_THROW((Box{Vector::Ones(2), Vector::Zero(2)}.validate()), InputError);
}
