#include "ctk/json_io.hpp"
#include "ctk/normcore.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ctk;

TEST(Exponent, InfinityIsDistinct) {
  EXPECT_TRUE(Exponent::infinity().is_infinite());
  EXPECT_FALSE(Exponent::finite(1e300).is_infinite());
  EXPECT_TRUE(std::isinf(Exponent::infinity().value()));
  EXPECT_THROW(Exponent::finite(0.5), InputError);
}

TEST(Exponent, Conjugates) {
  EXPECT_TRUE(conjugate_exponent(Exponent::finite(1.0)).is_infinite());
  EXPECT_TRUE(conjugate_exponent(Exponent::infinity()).is_one());
  EXPECT_DOUBLE_EQ(conjugate_exponent(Exponent::finite(3.0)).value(), 1.5);
}

TEST(Exponent, Parsing) {
  EXPECT_TRUE(exponent_from_string("inf").is_infinite());
  EXPECT_DOUBLE_EQ(exponent_from_string("1.5").value(), 1.5);
  EXPECT_THROW(exponent_from_string("x"), InputError);
}

TEST(Norms, LpValues) {
  const Vector v = (Vector(3) << 3.0, -4.0, 0.0).finished();
  EXPECT_DOUBLE_EQ(lp_norm(v, Exponent::finite(1.0)), 7.0);
  EXPECT_DOUBLE_EQ(lp_norm(v, Exponent::finite(2.0)), 5.0);
  EXPECT_DOUBLE_EQ(lp_norm(v, Exponent::infinity()), 4.0);
  EXPECT_NEAR(lp_norm(v, Exponent::finite(3.0)), std::cbrt(91.0), 1e-14);
}

TEST(Norms, WeightedNorms) {
  const Vector x = (Vector(2) << 1.0, -1.0).finished();
  const auto d = NormSpec::diagonal(Exponent::finite(1.0), (Vector(2) << 2.0, 3.0).finished());
  EXPECT_DOUBLE_EQ(weighted_norm(x, d), 5.0);
  Matrix r(2, 2);
  r << 4, 3, 3, 3;
  const auto g = NormSpec::general(Exponent::infinity(), r);
  EXPECT_DOUBLE_EQ(weighted_norm(x, g), 1.0);
  EXPECT_FALSE(g.is_monotonic());
  EXPECT_TRUE(d.is_monotonic());
}

TEST(Norms, SimilarityMatchesHandComputation) {
  Matrix a(2, 2), r(2, 2), expected(2, 2);
  a << -1, 0.5, 1, -1;
  r << 4, 3, 3, 3;
  expected << 0, -1.0 / 3.0, 1.5, -2;
  const Matrix s = NormSpec::general(Exponent::infinity(), r).similarity(a);
  EXPECT_LT((s - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Norms, RejectsBadWeights) {
  EXPECT_THROW(NormSpec::diagonal(Exponent::finite(2.0), (Vector(2) << 1.0, 0.0).finished()), InputError);
  Matrix neg(2, 2);
  neg << 1, -1, 0, 1;
  EXPECT_THROW(NormSpec::general(Exponent::finite(2.0), neg), InputError);
  Matrix singular(2, 2);
  singular << 1, 1, 1, 1;
  EXPECT_THROW(NormSpec::general(Exponent::finite(2.0), singular), InputError);
}

TEST(Norms, DimensionCheck) {
  const auto d = NormSpec::diagonal(Exponent::finite(2.0), Vector::Ones(3));
  EXPECT_THROW(d.check_dim(2), InputError);
  EXPECT_NO_THROW(NormSpec::identity(Exponent::finite(2.0)).check_dim(5));
}

TEST(Matrices, MetzlerAndInducedNorms) {
  Matrix a(2, 2);
  a << -3, 1, 0.5, -2;
  EXPECT_TRUE(is_metzler(a));
  a(0, 1) = -0.1;
  EXPECT_FALSE(is_metzler(a));
  EXPECT_TRUE(is_metzler(a, 0.2));
  EXPECT_DOUBLE_EQ(induced_norm_1(a), 3.5);
  EXPECT_DOUBLE_EQ(induced_norm_inf(a), 3.1);
}

TEST(Jacobi, MatchesNumpyEigenvalues) {
  Matrix a(3, 3);
  a << -1.0, 2.0, 0.5, 0.3, -4.0, 1.0, -0.7, 0.2, -0.5;
  const Matrix s = (a + a.transpose()) / 2;
  // numpy.linalg.eigvalsh
  EXPECT_NEAR(max_symmetric_eigenvalue(s), -0.37023710746581756, 1e-12);
  const auto e = jacobi_eigen(s);
  const Matrix back = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
  EXPECT_LT((back - s).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(e.values(0), e.values(1));
}

TEST(JsonIo, RoundTrips) {
  const Json j = Json::parse(R"({"p": "inf", "weight": {"diag": [1, 2]}})");
  const NormSpec ns = normspec_from_json(j);
  EXPECT_TRUE(ns.exponent().is_infinite());
  EXPECT_EQ(ns.kind(), WeightKind::diagonal);
  EXPECT_EQ(normspec_from_json(to_json(ns)).describe(), ns.describe());
  EXPECT_THROW(matrix_from_json(Json::parse("[[1,2],[3]]")), InputError);
}
