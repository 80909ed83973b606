#include "ctk/models.hpp"

#include <gtest/gtest.h>

using namespace ctk;

namespace {
LinearInterconnection pair_system() {
  LinearInterconnection li;
  li.k = Vector::Ones(2);
  li.d = Matrix(2, 2);
  li.d << 0, 0.3, 0.3, 0;
  li.input = InputSignal::sinusoidal(Vector::Constant(2, 0.05), Vector::Constant(2, 0.05), 3.0);
  return li;
}
const NormSpec kL1 = NormSpec::identity(Exponent::finite(1.0));
}  // namespace

TEST(LinearInterconnection, YoungWeights) {
  const auto spec = pair_system().comparison();
  // alpha = (2 k - eps sum|d| - eps_u) v = 1.6 v, gamma_ij = 0.3 v, gamma_u = u^2 / 0.1
  EXPECT_NEAR(spec.alpha[0].value(1.0), 1.6, 1e-14);
  EXPECT_NEAR(spec.gamma[0][1]->value(1.0), 0.3, 1e-14);
  EXPECT_NEAR(spec.gain((Vector(2) << 0.1, -0.2).finished())(1), 0.4, 1e-14);
}

TEST(Matrosov, CertifiesColumnRate) {
  const auto spec = pair_system().comparison();
  const Box box = Box::uniform(2, 0, 10);
  const auto cert = matrosov_certify(spec, kL1, 1.3, box);
  EXPECT_TRUE(cert.certified());
  EXPECT_TRUE(cert.decay_rate);
  EXPECT_FALSE(matrosov_certify(spec, kL1, 1.4, box).certified());
}

TEST(Iss, ConstantsPerWeight) {
  EXPECT_DOUBLE_EQ(iss_constants(kL1, 2)(0), 1.0);
  const auto d = NormSpec::diagonal(Exponent::finite(1.0), (Vector(2) << 2.0, 0.5).finished());
  EXPECT_DOUBLE_EQ(iss_constants(d, 2)(1), 2.0);
}

TEST(Iss, EnvelopeHoldsAtCertifiedRate) {
  const auto li = pair_system();
  const auto spec = li.comparison();
  const auto cert = matrosov_certify(spec, kL1, 1.3, Box::uniform(2, 0, 10));
  const auto rep = simulate_iss(spec, li.plant(), (Vector(2) << 1.0, -0.5).finished(), 10.0, kL1, 1.3, &cert);
  EXPECT_TRUE(rep.passed()) << rep.worst_envelope_ratio;
}

TEST(Iss, RefusesUncertifiedRateUnlessFalsifying) {
  const auto li = pair_system();
  const auto spec = li.comparison();
  const auto cert = matrosov_certify(spec, kL1, 1.3, Box::uniform(2, 0, 10));
  const Vector x0 = (Vector(2) << 1.0, -0.5).finished();
  EXPECT_THROW(simulate_iss(spec, li.plant(), x0, 10.0, kL1, 2.6, &cert), HypothesisError);
  EXPECT_THROW(simulate_iss(spec, li.plant(), x0, 10.0, kL1, 1.3, nullptr), HypothesisError);
  IssOptions io;
  io.require_certificate = false;
  const auto rep = simulate_iss(spec, li.plant(), x0, 10.0, kL1, 2.6, &cert, io);
  EXPECT_FALSE(rep.passed());
}

TEST(Comparison, MatrosovRejectsBilinearTerms) {
  const Json j = Json::parse(R"({"mode": "matrosov", "alpha": [{"kind": "linear", "a": 1, "class": "K_inf"}],
    "bilinear": [{"i": 0, "j": 0, "k": 0, "coef": -1}]})");
  EXPECT_THROW(comparison_from_json(j), InputError);
}

TEST(Comparison, GeneralModeNonmonotoneInterconnection) {
  const Json j = Json::parse(R"({"mode": "general",
    "alpha": [{"kind": "linear", "a": 1}, {"kind": "linear", "a": 1}],
    "couplings": [{"i": 1, "j": 0, "coef": 0.5, "fn": {"kind": "linear", "a": 1}}],
    "bilinear": [{"i": 0, "j": 0, "k": 1, "coef": -1}]})");
  const auto spec = comparison_from_json(j);
  EXPECT_FALSE(is_metzler(spec.drift_jacobian(Vector::Ones(2))));
  const auto rep = interconnection_certify(spec, kL1, 0.5, Box::uniform(2, 0, 3));
  EXPECT_TRUE(rep.pairing.certified());
  EXPECT_TRUE(rep.consistent);
  EXPECT_FALSE(interconnection_certify(spec, kL1, 0.6, Box::uniform(2, 0, 3)).pairing.certified());
}
