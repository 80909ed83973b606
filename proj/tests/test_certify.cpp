#include "ctk/certify.hpp"

#include <gtest/gtest.h>

using namespace ctk;

namespace {
Matrix metzler() {
  Matrix a(2, 2);
  a << -2, 1, 0.5, -1;  // mu+_inf = -0.5, mu+_1 = 0
  return a;
}
const NormSpec kInf = NormSpec::identity(Exponent::infinity());
}  // namespace

TEST(Certificate, RecordKeepsWorstWitness) {
  Certificate c;
  c.tolerance = 1e-9;
  c.record(0.3, [] { return Witness{}; });
  EXPECT_TRUE(c.certified());
  c.record(-0.1, [] { return Witness{Vector::Ones(1), {}, 1.0, {}, -0.1}; });
  c.record(-0.5, [] { return Witness{Vector::Zero(1), {}, 2.0, {}, -0.5}; });
  EXPECT_FALSE(c.certified());
  EXPECT_DOUBLE_EQ(c.witness->t, 2.0);
  c.record(-0.2, [] { return Witness{Vector::Zero(1), {}, 3.0, {}, -0.2}; });
  EXPECT_DOUBLE_EQ(c.witness->t, 2.0);
  EXPECT_DOUBLE_EQ(c.worst_margin, -0.5);
}

TEST(Certificate, JsonUsesRateKey) {
  Certificate c;
  c.condition = "x";
  c.rate = -0.5;
  EXPECT_TRUE(to_json(c).contains("b"));
  c.decay_rate = true;
  EXPECT_TRUE(to_json(c).contains("c"));
}

TEST(JacobianConic, EstimateIsTheClosedForm) {
  const auto c = certify_jacobian_conic(linear_field(metzler()), Box::uniform(2, -1, 1), kInf);
  EXPECT_NEAR(c.rate, -0.5, 1e-12);
  EXPECT_TRUE(check_jacobian_conic(linear_field(metzler()), Box::uniform(2, -1, 1), kInf, -0.5).certified());
  EXPECT_FALSE(check_jacobian_conic(linear_field(metzler()), Box::uniform(2, -1, 1), kInf, -0.6).certified());
}

TEST(JacobianConic, FlagsNonMonotoneJacobian) {
  Matrix a = metzler();
  a(0, 1) = -1;
  EXPECT_FALSE(certify_jacobian_conic(linear_field(a), Box::uniform(2, -1, 1), kInf).certified());
}

TEST(OneSidedLipschitz, CertifiesAndRefutesWithReproducibleWitness) {
  const auto vf = linear_field(metzler());
  const Box box = Box::uniform(2, -1, 1);
  EXPECT_TRUE(check_one_sided_lipschitz(vf, kInf, -0.5, box, true).certified());
  const auto bad = check_one_sided_lipschitz(vf, kInf, -0.6, box, true);
  ASSERT_FALSE(bad.certified());
  ASSERT_TRUE(bad.witness.has_value());
  EXPECT_TRUE(witness_reproduces(bad, vf));
}

TEST(Trajectory, ContractionAtTheMeasure) {
  const auto vf = linear_field(metzler());
  const Box box = Box::uniform(2, 0, 1);
  const auto pairs = sample_pairs(box, 4, true, 3);
  TrajectoryOptions to;
  to.horizon = 4.0;
  EXPECT_TRUE(check_trajectory_contraction(vf, kInf, -0.5, box, pairs, to).certified());
  EXPECT_TRUE(check_dini_contraction(vf, kInf, -0.5, pairs, to).certified());
  EXPECT_FALSE(check_trajectory_contraction(vf, kInf, -0.9, box, pairs, to).certified());
}

TEST(EtaConditions, L1AndLinf) {
  const auto vf = linear_field(metzler());
  const Box box = Box::uniform(2, 0, 1);
  EXPECT_TRUE(check_l1_eta(vf, Vector::Ones(2), 0.0, true, box).certified());
  EXPECT_FALSE(check_l1_eta(vf, Vector::Ones(2), -0.1, true, box).certified());
  EXPECT_TRUE(check_linf_eta(vf, Vector::Ones(2), -0.5, false, box).certified());
  EXPECT_FALSE(check_linf_eta(vf, Vector::Ones(2), -0.6, false, box).certified());
}

TEST(Equilibrium, PairingAndFactoredConic) {
  const auto vf = linear_field(metzler());
  const Box box = Box::uniform(2, 0, 2);
  EXPECT_TRUE(check_equilibrium_contraction(vf, kInf, -0.5, box).certified());
  EXPECT_TRUE(check_factored_conic(vf, kInf, -0.5, box).certified());
  EXPECT_FALSE(check_factored_conic(vf, kInf, -0.7, box).certified());
  const std::vector<Vector> starts = {Vector::Ones(2), (Vector(2) << 2.0, 0.0).finished()};
  EXPECT_TRUE(check_equilibrium_trajectory(vf, kInf, -0.5, starts).certified());
}

TEST(Equilibrium, RequiresOrigin) {
  VectorField vf = linear_field(metzler());
  vf.rhs = [](double, const Vector& x) { return Vector(-x + Vector::Ones(2)); };
  EXPECT_THROW(require_origin_equilibrium(vf, 0, 1), InputError);
}

TEST(NormEquivalence, MonotonicNormsHaveUnitConstant) {
  EXPECT_DOUBLE_EQ(norm_equivalence(kInf, 2).m, 1.0);
  Matrix r(2, 2);
  r << 4, 3, 3, 3;
  EXPECT_GT(norm_equivalence(NormSpec::general(Exponent::infinity(), r), 2).m, 1.0);
}

TEST(Samples, OrderedPairsAreOrdered) {
  for (const auto& [x, y] : sample_pairs(Box::uniform(3, 0, 1), 20, true, 5))
    EXPECT_TRUE(((x - y).array() >= 0).all());
}
