#include "ctk/measures.hpp"
#include "ctk/models.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ctk;

namespace {
HopfieldNetwork desk(InputSignal u = InputSignal::constant((Vector(2) << 0.2, 0.1).finished())) {
  HopfieldNetwork net;
  net.lambda = Vector::Ones(2);
  net.t = Matrix(2, 2);
  net.t << 0, 1, 1, 0;
  net.activations = {ScalarFn::tanh_like(0.5, 1.0), ScalarFn::tanh_like(0.5, 1.0)};
  net.input = std::move(u);
  return net;
}

SeparableSystem two_node() {
  SeparableSystem s;
  s.alpha = {ScalarFn::linear(2.0), ScalarFn::linear(2.0)};
  s.gamma.assign(2, std::vector<std::optional<ScalarFn>>(2));
  s.gamma[0][1] = ScalarFn::saturating_exponential(0.5, 1.0).declare(FnClass::K);
  s.gamma[1][0] = ScalarFn::saturating_exponential(0.5, 1.0).declare(FnClass::K);
  s.input = InputSignal::constant(Vector::Zero(2));
  return s;
}
}  // namespace

TEST(Inputs, Catalog) {
  const auto s = InputSignal::sinusoidal(Vector::Ones(1), Vector::Constant(1, 0.5), 4.0);
  EXPECT_NEAR(s.at(1.0)(0), 1.5, 1e-15);
  const auto pc = InputSignal::piecewise_constant({1.0}, {Vector::Zero(1), Vector::Ones(1)});
  EXPECT_DOUBLE_EQ(pc.at(0.5)(0), 0.0);
  EXPECT_DOUBLE_EQ(pc.at(1.0)(0), 1.0);
  EXPECT_THROW(InputSignal::constant(-Vector::Ones(2)).validate(2, true), InputError);
  EXPECT_THROW(input_from_json(Json::parse(R"({"kind": "square"})"), 1), InputError);
}

TEST(Perron, MatchesNumpy) {
  Matrix m(3, 3);
  m << -2, 1, 0, 0.5, -1, 1, 1, 0, -3;
  ASSERT_TRUE(is_irreducible(m));
  const auto pp = perron_eigpair(m);
  EXPECT_NEAR(pp.lambda, -0.4325316251475775, 1e-9);
  EXPECT_LT((pp.w - (Vector(3) << 0.33818549, 0.53009507, 0.13171944).finished()).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_LT((pp.v - (Vector(3) << 0.28997487, 0.5109974, 0.19902773).finished()).cwiseAbs().maxCoeff(), 1e-7);
  const Vector eta = hopfield_weights(pp.v, pp.w, Exponent::finite(2.0));
  EXPECT_LT((eta - (Vector(3) << 0.75330498, 0.79873112, 1.0).finished()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Perron, ReducibleMatrixRejected) {
  Matrix m(2, 2);
  m << -1, 1, 0, -1;
  EXPECT_FALSE(is_irreducible(m));
  EXPECT_THROW(perron_eigpair(m), HypothesisError);
}

TEST(Hopfield, DeskExampleCertificate) {
  const auto net = desk();
  Matrix expected(2, 2);
  expected << -1, 0.5, 0.5, -1;
  EXPECT_LT((net.perron_matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
  for (Exponent p : {Exponent::finite(1.0), Exponent::finite(2.0), Exponent::infinity()}) {
    const auto cert = hopfield_certificate(net, p);
    EXPECT_TRUE(cert.certified()) << p.to_string();
    EXPECT_NEAR(cert.c, 0.5, 1e-10);
    EXPECT_LT((cert.eta - Vector::Ones(2)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Hopfield, EquilibriumSolvesTheField) {
  const auto net = desk();
  const auto cert = hopfield_certificate(net, Exponent::infinity());
  const auto eq = hopfield_equilibrium(net, cert, {(Vector(2) << 3.0, -2.0).finished()});
  EXPECT_LT(net.rhs(0.0, eq.x_star).norm(), 1e-10);
  EXPECT_TRUE(eq.lyapunov_nonincreasing);
  EXPECT_LT((eq.limits.front() - eq.x_star).norm(), 1e-6);
}

TEST(Hopfield, RejectsNegativeWeightsAndSinusoidalEquilibrium) {
  auto net = desk();
  net.t(0, 1) = -0.1;
  EXPECT_THROW(net.validate(), InputError);
  const auto periodic = desk(InputSignal::sinusoidal(Vector::Constant(2, 0.2), Vector::Constant(2, 0.1)));
  const auto cert = hopfield_certificate(periodic, Exponent::infinity());
  EXPECT_THROW(hopfield_equilibrium(periodic, cert), InputError);
}

TEST(Hopfield, JsonModel) {
  const Json j = Json::parse(R"({"type": "hopfield", "Lambda": [1, 1], "T": [[0, 1], [1, 0]],
    "activations": [{"kind": "tanh_like", "a": 0.5, "k": 1}, {"kind": "tanh_like", "a": 0.5, "k": 1}],
    "input": {"kind": "constant", "value": [0.2, 0.1]}})");
  const auto net = hopfield_from_json(j);
  EXPECT_EQ(net.dim(), 2);
  EXPECT_DOUBLE_EQ(net.gbar()(0), 0.5);
}

TEST(Separable, StructureMatrixAtOrigin) {
  const auto s = two_node();
  Matrix expected(2, 2);
  expected << -2, 0.5, 0.5, -2;
  EXPECT_LT((separable_structure_matrix(s, Vector::Zero(2)).m - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Separable, CertifiesAtTheStructureRate) {
  const auto s = two_node();
  const auto ns = NormSpec::identity(Exponent::infinity());
  const Box box = Box::uniform(2, 0, 2);
  const auto good = separable_contraction(s, ns, 1.5, box);
  EXPECT_TRUE(good.dissipation.certified());
  EXPECT_TRUE(good.structure.certified());
  const auto bad = separable_contraction(s, ns, 1.6, box);
  EXPECT_FALSE(bad.dissipation.certified());
  EXPECT_FALSE(bad.structure.certified());
}

TEST(Separable, MonotoneFlavorNeedsClassKCouplings) {
  auto s = two_node();
  s.gamma[0][1] = ScalarFn::xexp(1.0, 1.0);
  EXPECT_THROW(s.validate(), InputError);
  s.flavor = Flavor::positive;
  EXPECT_NO_THROW(s.validate());
}
