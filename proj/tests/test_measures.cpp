#include "ctk/measures.hpp"

#include <gtest/gtest.h>

using namespace ctk;

namespace {
Matrix sample_matrix() {
  Matrix a(3, 3);
  a << -1.0, 2.0, 0.5, 0.3, -4.0, 1.0, -0.7, 0.2, -0.5;
  return a;
}
}  // namespace

TEST(ClosedForms, UnweightedMeasures) {
  const Matrix a = sample_matrix();
  EXPECT_DOUBLE_EQ(measure_1(a), 1.0);
  EXPECT_DOUBLE_EQ(measure_inf(a), 1.5);
  EXPECT_NEAR(measure_2(a), -0.37023710746581756, 1e-12);
  EXPECT_DOUBLE_EQ(conic_measure_1(a), 1.0);
  EXPECT_DOUBLE_EQ(conic_measure_inf(a), 1.5);
}

TEST(ClosedForms, ConicDropsNegativeEntries) {
  Matrix a(2, 2);
  a << -1, -3, 2, -2;
  EXPECT_DOUBLE_EQ(conic_measure_inf(a), 0.0);
  EXPECT_DOUBLE_EQ(measure_inf(a), 2.0);
  EXPECT_DOUBLE_EQ(conic_measure_1(a), 1.0);
}

TEST(Dispatch, WeightedEuclidean) {
  const Vector eta = (Vector(3) << 1.0, 2.0, 0.5).finished();
  const auto r = matrix_measure(sample_matrix(), NormSpec::diagonal(Exponent::finite(2.0), eta));
  EXPECT_NEAR(r.value, 0.6717719495777483, 1e-11);
  EXPECT_EQ(r.bound, Bound::exact);
}

TEST(Dispatch, MetzlerConicEqualsWhole) {
  Matrix a(3, 3);
  a << -2, 1, 0, 0.5, -1, 1, 1, 0, -3;
  for (Exponent p : {Exponent::finite(1.0), Exponent::finite(2.0), Exponent::infinity()}) {
    const auto ns = NormSpec::identity(p);
    EXPECT_NEAR(conic_measure(a, ns).value, matrix_measure(a, ns).value, 1e-9) << p.to_string();
  }
}

TEST(Dispatch, GeneralWeightInfinityCounterexample) {
  Matrix a(2, 2), r(2, 2);
  a << -1, 0.5, 1, -1;
  r << 4, 3, 3, 3;
  const auto ns = NormSpec::general(Exponent::infinity(), r);
  // RAR^-1 = [[0,-1/3],[1.5,-2]]
  EXPECT_NEAR(matrix_measure(a, ns).value, 1.0 / 3.0, 1e-12);
  const auto oracle = conic_measure_limit_oracle(a, ns);
  EXPECT_NEAR(oracle.value, -0.25, 2e-3);
  const auto lower = conic_measure_wp_sup(a, ns);
  EXPECT_EQ(lower.bound, Bound::lower);
  EXPECT_NEAR(lower.value, -0.25, 1e-6);
}

TEST(Oracle, MatchesClosedFormsOnMetzler) {
  Matrix a(3, 3);
  a << -2, 1, 0, 0.5, -1, 1, 1, 0, -3;
  for (Exponent p : {Exponent::finite(2.0), Exponent::infinity(), Exponent::finite(1.0)}) {
    const auto ns = NormSpec::identity(p);
    EXPECT_NEAR(conic_measure_limit_oracle(a, ns).value, conic_measure(a, ns).value, 2e-3) << p.to_string();
  }
}

TEST(Oracle, WholeSpaceMeasureForFractionalExponent) {
  // Symmetric negative definite: mu_p <= 0 for every p and equals lambda_max for p = 2.
  Matrix a(2, 2);
  a << -2, 0.5, 0.5, -1;
  const auto r = measure_limit_oracle(a, NormSpec::identity(Exponent::finite(2.0)));
  EXPECT_NEAR(r.value, measure_2(a), 2e-3);
  EXPECT_LT(matrix_measure(a, NormSpec::identity(Exponent::finite(3.0))).value, 0.0);
}

TEST(Perron, WeightedMeasuresAtPerronVectorsEqualLambda) {
  Matrix a(3, 3);
  a << -2, 1, 0, 0.5, -1, 1, 1, 0, -3;
  const double lambda = -0.4325316251475775;  // numpy.linalg.eig
  const Vector w = (Vector(3) << 0.33818549, 0.53009507, 0.13171944).finished();
  const Vector v = (Vector(3) << 0.28997487, 0.5109974, 0.19902773).finished();
  EXPECT_NEAR(metzler_weighted_measures(a, v).mu1_eta, lambda, 1e-7);
  EXPECT_NEAR(metzler_weighted_measures(a, w).mu_inf_eta_inv, lambda, 1e-7);
}

TEST(Mutation, OffsetShiftsClosedForms) {
  Matrix a(2, 2);
  a << -1, 1, 1, -2;
  const double base = conic_measure_inf(a);
  ctk::testing::set_closed_form_mutation(0.5);
  EXPECT_DOUBLE_EQ(conic_measure_inf(a), base + 0.5);
  ctk::testing::set_closed_form_mutation(0.0);
  EXPECT_DOUBLE_EQ(conic_measure_inf(a), base);
}

TEST(Inputs, RejectsNonSquare) {
  EXPECT_THROW(matrix_measure(Matrix::Zero(2, 3), NormSpec()), InputError);
}
