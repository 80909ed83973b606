#include "ctk/pairings.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ctk;

namespace {
const Vector kx = (Vector(3) << 1.0, -2.0, 0.5).finished();
const Vector ky = (Vector(3) << 0.3, 0.4, -1.2).finished();
}  // namespace

TEST(WeakPairing, EuclideanIsInnerProduct) {
  EXPECT_NEAR(weak_pairing(kx, ky, NormSpec()), kx.dot(ky), 1e-14);
}

TEST(WeakPairing, FiniteExponentsMatchNumpy) {
  EXPECT_NEAR(weak_pairing(kx, ky, NormSpec::identity(Exponent::finite(3.0))), -0.7782384888032828, 1e-13);
  EXPECT_NEAR(weak_pairing(kx, ky, NormSpec::identity(Exponent::finite(1.5))), -1.5190147983607063, 1e-13);
}

TEST(WeakPairing, OneAndInfinity) {
  // ||y||_1 sign(y)^T x = 1.9 * (0.3... signs +,+,-) -> 1.9 * (1 - 2 - 0.5)
  EXPECT_NEAR(weak_pairing(kx, ky, NormSpec::identity(Exponent::finite(1.0))), 1.9 * -1.5, 1e-14);
  EXPECT_NEAR(weak_pairing(kx, ky, NormSpec::identity(Exponent::infinity())), -1.2 * 0.5, 1e-14);
}

TEST(WeakPairing, TiesTakeTheMaximum) {
  const Vector y = (Vector(2) << 1.0, -1.0).finished();
  const Vector x = (Vector(2) << 2.0, -3.0).finished();
  EXPECT_DOUBLE_EQ(weak_pairing(x, y, NormSpec::identity(Exponent::infinity())), 3.0);
  EXPECT_EQ(max_index_set(y).size(), 2u);
}

TEST(WeakPairing, ZeroSecondArgument) {
  EXPECT_EQ(weak_pairing(kx, Vector::Zero(3), NormSpec::identity(Exponent::finite(1.5))), 0.0);
  EXPECT_THROW(max_index_set(Vector::Zero(2)), InputError);
}

TEST(WeakPairing, WeightedIsPairingOfTransformedVectors) {
  const Vector eta = (Vector(3) << 1.0, 2.0, 0.5).finished();
  const auto ns = NormSpec::diagonal(Exponent::finite(3.0), eta);
  const Vector ex = eta.asDiagonal() * kx, ey = eta.asDiagonal() * ky;
  EXPECT_NEAR(weak_pairing(kx, ky, ns), weak_pairing(ex, ey, NormSpec::identity(Exponent::finite(3.0))), 1e-13);
}

TEST(WeakPairing, AxiomsOnRandomVectors) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (Exponent p : {Exponent::finite(1.0), Exponent::finite(1.5), Exponent::finite(2.0), Exponent::finite(4.0),
                     Exponent::infinity()}) {
    const auto ns = NormSpec::identity(p);
    for (int k = 0; k < 200; ++k) {
      Vector x(4), y(4);
      for (Index i = 0; i < 4; ++i) {
        x(i) = g(rng);
        y(i) = g(rng);
      }
      const double ny = weighted_norm(y, ns);
      EXPECT_NEAR(weak_pairing(y, y, ns), ny * ny, 1e-10 * ny * ny);
      // Cauchy-Schwarz
      EXPECT_LE(std::abs(weak_pairing(x, y, ns)), weighted_norm(x, ns) * ny * (1 + 1e-12));
      // scaling in both arguments
      EXPECT_NEAR(weak_pairing(2.5 * x, -3.0 * y, ns), -7.5 * weak_pairing(x, y, ns), 1e-9 * (1 + ny * ny));
      const auto dr = check_deimling(x, y, ns);
      EXPECT_GE(dr.margin, -1e-7);
    }
  }
}

TEST(Richardson, RecoversLinearLimit) {
  std::vector<double> h, q;
  for (double v : HSchedule{}.values()) {
    h.push_back(v);
    q.push_back(0.7 + 3.0 * v);
  }
  const auto lim = richardson_limit(h, q);
  EXPECT_NEAR(lim.value, 0.7, 1e-10);
  EXPECT_TRUE(lim.converged);
}

TEST(MarginReport, CountsFailures) {
  MarginReport r;
  r.record(0.1, 1e-9, [] { return Json(); });
  EXPECT_TRUE(r.passed());
  r.record(-0.2, 1e-9, [] { return Json{{"x", 1}}; });
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.failure_count, 1u);
  EXPECT_DOUBLE_EQ(r.worst_margin, -0.2);
}
