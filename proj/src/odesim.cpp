#include "ctk/odesim.hpp"

#include "ctk/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ctk {

Box Box::uniform(Index n, double lo, double hi) {
  return {Vector::Constant(n, lo), Vector::Constant(n, hi)};
}

bool Box::contains(const Vector& x, double tol) const {
  return x.size() == lo.size() && (x.array() >= lo.array() - tol).all() &&
         (x.array() <= hi.array() + tol).all();
}

Vector Box::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x(lo.size());
  for (Index i = 0; i < x.size(); ++i) x(i) = lo(i) + u(rng) * (hi(i) - lo(i));
  return x;
}

void Box::validate() const {
  if (lo.size() != hi.size() || lo.size() == 0) throw InputError("box: bounds have mismatched dimensions");
  require_finite(lo, "box lower bound");
  require_finite(hi, "box upper bound");
  if ((hi.array() < lo.array()).any()) throw InputError("box: upper bound below lower bound");
}

Json to_json(const Box& b) { return {{"lo", to_json(b.lo)}, {"hi", to_json(b.hi)}}; }

Box box_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("lo") || !j.contains("hi"))
    throw InputError("box: expected {\"lo\": [...], \"hi\": [...]}");
  Box b{vector_from_json(j.at("lo")), vector_from_json(j.at("hi"))};
  b.validate();
  return b;
}

Matrix VectorField::jacobian_at(double t, const Vector& x) const {
  if (jacobian) return jacobian(t, x);
  const Index n = x.size();
  Matrix j(n, n);
  Vector xp = x;
  for (Index k = 0; k < n; ++k) {
    const double h = 1e-6 * (1.0 + std::abs(x(k)));
    xp(k) = x(k) + h;
    const Vector fp = rhs(t, xp);
    xp(k) = x(k) - h;
    const Vector fm = rhs(t, xp);
    xp(k) = x(k);
    j.col(k) = (fp - fm) / (2.0 * h);
  }
  return j;
}

Matrix VectorField::factor_at(double t, const Vector& x) const {
  if (factorization) return factorization(t, x);
  return average_jacobian(*this, t, x);
}

VectorField linear_field(const Matrix& a, std::string name) {
  require_square(a, "linear_field");
  require_finite(a, "linear_field");
  VectorField vf;
  vf.dim = a.rows();
  vf.rhs = [a](double, const Vector& x) -> Vector { return a * x; };
  vf.jacobian = [a](double, const Vector&) -> Matrix { return a; };
  vf.factorization = vf.jacobian;
  vf.name = std::move(name);
  return vf;
}

const QuadratureRule& gauss_legendre_16() {
  static const QuadratureRule rule = [] {
    constexpr int n = 16;
    QuadratureRule r;
    for (int i = 1; i <= n; ++i) {
      double z = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-15) break;
      }
      // Map [-1, 1] to [0, 1].
      r.nodes.push_back(0.5 * (1.0 - z));
      r.weights.push_back(1.0 / ((1.0 - z * z) * dp * dp));
    }
    return r;
  }();
  return rule;
}

Matrix average_jacobian(const VectorField& vf, double t, const Vector& x) {
  const auto& q = gauss_legendre_16();
  Matrix acc = Matrix::Zero(x.size(), x.size());
  for (std::size_t k = 0; k < q.nodes.size(); ++k) acc += q.weights[k] * vf.jacobian_at(t, q.nodes[k] * x);
  return acc;
}

double factorization_residual(const VectorField& vf, const Box& domain, double t0, double t1, int samples,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ut(t0, t1);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector x = domain.sample(rng);
    const double t = ut(rng);
    const double r = (vf(t, x) - vf.factor_at(t, x) * x).norm() / (1.0 + x.norm());
    worst = std::max(worst, r);
  }
  return worst;
}

Vector stack(const Vector& x, const Vector& y) {
  Vector z(x.size() + y.size());
  z << x, y;
  return z;
}
Vector top_half(const Vector& z) { return z.head(z.size() / 2); }
Vector bottom_half(const Vector& z) { return z.tail(z.size() / 2); }

VectorField stack_pair(const VectorField& vf) {
  VectorField out;
  out.dim = 2 * vf.dim;
  const Index n = vf.dim;
  out.rhs = [vf, n](double t, const Vector& z) -> Vector {
    return stack(vf(t, z.head(n)), vf(t, z.tail(n)));
  };
  if (vf.jacobian) {
    out.jacobian = [vf, n](double t, const Vector& z) -> Matrix {
      Matrix j = Matrix::Zero(2 * n, 2 * n);
      j.topLeftCorner(n, n) = vf.jacobian(t, z.head(n));
      j.bottomRightCorner(n, n) = vf.jacobian(t, z.tail(n));
      return j;
    };
  }
  out.name = vf.name + " (pair)";
  return out;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kAlpha = 0.7 / 5.0;
constexpr double kBeta = 0.4 / 5.0;
constexpr double kSafety = 0.9;

double scaled_max(const Vector& e, const Vector& x, const Vector& y, const StepControl& c) {
  double m = 0.0;
  for (Index i = 0; i < e.size(); ++i) {
    const double sc = c.atol + c.rtol * std::max(std::abs(x(i)), std::abs(y(i)));
    m = std::max(m, std::abs(e(i)) / sc);
  }
  return m;
}

double initial_step(const VectorField& vf, double t0, const Vector& x0, const Vector& f0,
                    const StepControl& c, double span) {
  Vector sc = (c.atol + c.rtol * x0.cwiseAbs().array()).matrix();
  const double d0 = (x0.array() / sc.array()).matrix().norm() / std::sqrt(double(x0.size()));
  const double d1 = (f0.array() / sc.array()).matrix().norm() / std::sqrt(double(x0.size()));
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  const Vector x1 = x0 + h0 * f0;
  const Vector f1 = vf(t0 + h0, x1);
  const double d2 = ((f1 - f0).array() / sc.array()).matrix().norm() / std::sqrt(double(x0.size())) / h0;
  const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                               : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
  return std::min({100 * h0, h1, span});
}

}  // namespace

Trajectory flow(const VectorField& vf, double t0, const Vector& x0, double t1, const StepControl& ctrl) {
  if (x0.size() != vf.dim) throw InputError("flow: initial state has wrong dimension");
  require_finite(x0, "flow initial state");
  if (!(t1 >= t0)) throw InputError("flow: final time precedes initial time");
  Trajectory traj(vf.dim);
  Vector x = x0;
  Vector k1 = vf(t0, x);
  traj.push(t0, x, k1);
  if (t1 == t0) return traj;
  const double span = t1 - t0;
  double h = ctrl.h_init > 0 ? ctrl.h_init : initial_step(vf, t0, x, k1, ctrl, span);
  h = std::min(h, ctrl.h_max);
  double t = t0;
  double err_prev = 1e-4;
  bool rejected = false;
  std::size_t steps = 0;
  while (t < t1) {
    if (steps++ >= ctrl.max_steps) {
      traj.status = FlowStatus::max_steps;
      traj.message = "step budget exhausted at t=" + std::to_string(t);
      return traj;
    }
    bool last = false;
    if (t + h >= t1 || t1 - (t + h) < 1e-12 * std::max(1.0, std::abs(t1))) {
      h = t1 - t;
      last = true;
    }
    if (h < ctrl.h_min) {
      traj.status = FlowStatus::step_underflow;
      traj.message = "step size underflow at t=" + std::to_string(t);
      return traj;
    }
    const Vector k2 = vf(t + c2 * h, x + h * (a21 * k1));
    const Vector k3 = vf(t + c3 * h, x + h * (a31 * k1 + a32 * k2));
    const Vector k4 = vf(t + c4 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = vf(t + c5 * h, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 = vf(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vector xn = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vector k7 = vf(t + h, xn);
    const Vector e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = scaled_max(e, x, xn, ctrl);
    if (!std::isfinite(err) || !xn.allFinite()) err = 1e10;
    if (err <= 1.0) {
      const double tn = last ? t1 : t + h;
      double fac = err == 0.0 ? 5.0 : kSafety * std::pow(err, -kAlpha) * std::pow(err_prev, kBeta);
      fac = std::clamp(fac, 0.2, 5.0);
      if (rejected) fac = std::min(fac, 1.0);
      err_prev = std::max(err, 1e-4);
      t = tn;
      x = xn;
      k1 = k7;
      traj.push(t, x, k1);
      rejected = false;
      h = std::min(h * fac, ctrl.h_max);
    } else {
      const double fac = std::max(0.2, kSafety * std::pow(err, -kAlpha));
      h *= fac;
      rejected = true;
    }
  }
  return traj;
}

OrderReport check_order_preservation(const VectorField& vf, const Vector& x0, const Vector& y0, double horizon,
                                     const StepControl& ctrl, double tol) {
  if (x0.size() != vf.dim || y0.size() != vf.dim) throw InputError("order check: dimension mismatch");
  if ((x0.array() > y0.array()).any()) throw InputError("order check: requires x0 <= y0");
  OrderReport r;
  const auto traj = flow(stack_pair(vf), 0.0, stack(x0, y0), horizon, ctrl);
  r.status = traj.status;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Vector& z = traj.states()[k];
    const double m = (bottom_half(z) - top_half(z)).minCoeff();
    if (m < r.min_margin) {
      r.min_margin = m;
      r.worst_time = traj.times()[k];
    }
  }
  r.passed = traj.ok() && r.min_margin >= -tol;
  return r;
}

Json to_json(const OrderReport& r) {
  return {{"condition", "order_preservation"},
          {"worst_margin", r.min_margin},
          {"worst_time", r.worst_time},
          {"passed", r.passed}};
}

PositivityReport check_positivity(const VectorField& vf, const PositivityOptions& opts) {
  const Index n = vf.dim;
  PositivityReport r;
  r.worst_point = Vector::Zero(n);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int per_face = n <= 10 ? opts.per_face : std::max(10, opts.per_face * 10 / static_cast<int>(n));
  for (Index i = 0; i < n; ++i) {
    for (int s = 0; s < per_face; ++s) {
      Vector x(n);
      for (Index k = 0; k < n; ++k) x(k) = opts.scale * u(rng);
      x(i) = 0.0;
      // Include the corner region: occasionally zero further coordinates.
      if (s % 4 == 3)
        for (Index k = 0; k < n; ++k)
          if (u(rng) < 0.5) x(k) = 0.0;
      const double t = opts.t_window * u(rng);
      const double fi = vf(t, x)(i);
      ++r.boundary_samples;
      if (fi < r.worst_subtangential) {
        r.worst_subtangential = fi;
        r.worst_point = x;
        r.worst_time = t;
      }
    }
  }
  for (int s = 0; s < opts.simulations; ++s) {
    Vector x0(n);
    for (Index k = 0; k < n; ++k) x0(k) = opts.scale * u(rng);
    if (s % 2 == 1) x0(s % n) = 0.0;
    const auto traj = flow(vf, 0.0, x0, opts.horizon);
    ++r.simulations;
    for (const auto& x : traj.states()) r.min_state_entry = std::min(r.min_state_entry, x.minCoeff());
  }
  r.passed = r.worst_subtangential >= -opts.tol && (r.simulations == 0 || r.min_state_entry >= -1e-7);
  return r;
}

Json to_json(const PositivityReport& r) {
  return {{"condition", "positivity"},
          {"samples", r.boundary_samples},
          {"worst_margin", r.worst_subtangential},
          {"worst_point", to_json(r.worst_point)},
          {"simulations", r.simulations},
          {"min_state_entry", r.min_state_entry},
          {"passed", r.passed}};
}

CoppelReport coppel_check(const std::function<Matrix(double)>& a_of_t, const Vector& x0, const NormSpec& ns,
                          double horizon, const StepControl& ctrl, double tol) {
  if ((x0.array() < 0.0).any()) throw InputError("coppel_check: initial state must be nonnegative");
  const Index n = x0.size();
  ns.check_dim(n);
  VectorField vf;
  vf.dim = n;
  vf.rhs = [&a_of_t](double t, const Vector& x) -> Vector { return a_of_t(t) * x; };
  const auto traj = flow(vf, 0.0, x0, horizon, ctrl);
  if (!traj.ok()) throw NumericalError("coppel_check: integration failed: " + traj.message);

  auto mu_plus = [&](double t) {
    const Matrix a = a_of_t(t);
    if (a.rows() != n || a.cols() != n) throw InputError("coppel_check: A(t) has wrong dimension");
    if (!is_metzler(a))
      throw HypothesisError("coppel_check: A(t) is not Metzler at t=" + std::to_string(t));
    return conic_measure(a, ns).value;
  };
  CoppelReport r;
  const double n0 = weighted_norm(x0, ns);
  double integral = 0.0;
  double mu_prev = mu_plus(0.0);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times()[k];
    if (k > 0) {
      const double mu = mu_plus(t);
      integral += 0.5 * (mu + mu_prev) * (t - traj.times()[k - 1]);
      mu_prev = mu;
    }
    const double bound = std::exp(integral) * n0;
    const double nx = weighted_norm(traj.states()[k], ns);
    r.times.push_back(t);
    r.norms.push_back(nx);
    r.bounds.push_back(bound);
    const double ratio = bound > 0 ? nx / bound : (nx == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
    if (ratio > r.worst_ratio) {
      r.worst_ratio = ratio;
      r.worst_time = t;
    }
    if (nx > bound * (1.0 + tol)) r.passed = false;
    ++r.points;
  }
  return r;
}

Json to_json(const CoppelReport& r) {
  return {{"condition", "conic_coppel"},
          {"samples", r.points},
          {"worst_ratio", r.worst_ratio},
          {"worst_time", r.worst_time},
          {"passed", r.passed}};
}

}  // namespace ctk
