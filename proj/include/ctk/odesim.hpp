#pragma once

#include "ctk/json_io.hpp"
#include "ctk/normcore.hpp"
#include "ctk/trajectory.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>

namespace ctk {

/// Axis-aligned box [lo, hi].
struct Box {
  Vector lo;
  Vector hi;

  static Box uniform(Index n, double lo, double hi);
  Index dim() const { return lo.size(); }
  bool contains(const Vector& x, double tol = 0.0) const;
  Vector width() const { return hi - lo; }
  Vector sample(std::mt19937_64& rng) const;
  void validate() const;
};
Json to_json(const Box& b);
Box box_from_json(const Json& j);

using Rhs = std::function<Vector(double, const Vector&)>;
using MatrixField = std::function<Matrix(double, const Vector&)>;

/// f(t, x) with optional analytic Jacobian and optional factorization
/// f(t, x) = A(t, x) x.
struct VectorField {
  Index dim = 0;
  Rhs rhs;
  MatrixField jacobian;       // empty: central differences
  MatrixField factorization;  // empty: average Jacobian along the ray
  std::optional<Box> invariant_box;
  std::string name;

  Vector operator()(double t, const Vector& x) const { return rhs(t, x); }
  /// Analytic Jacobian, else central differences with step 1e-6 (1 + |x_i|).
  Matrix jacobian_at(double t, const Vector& x) const;
  /// Supplied factorization, else the average Jacobian.
  Matrix factor_at(double t, const Vector& x) const;
};

VectorField linear_field(const Matrix& a, std::string name = "linear");

/// 16-point Gauss-Legendre rule on [0, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const QuadratureRule& gauss_legendre_16();

/// int_0^1 J(t, s x) ds. Then f(t, x) - f(t, 0) equals this matrix times x.
Matrix average_jacobian(const VectorField& vf, double t, const Vector& x);

/// Max over samples of ||f(t,x) - A(t,x)x|| / (1 + ||x||) in the 2-norm.
double factorization_residual(const VectorField& vf, const Box& domain, double t0, double t1,
                              int samples, std::uint64_t seed);

/// The 2n-dimensional system (x, y) -> (f(t,x), f(t,y)).
VectorField stack_pair(const VectorField& vf);
Vector stack(const Vector& x, const Vector& y);
Vector top_half(const Vector& z);
Vector bottom_half(const Vector& z);

struct StepControl {
  double atol = 1e-9;
  double rtol = 1e-8;
  double h_init = 0.0;  // 0: automatic
  double h_min = 1e-14;
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 2000000;
};

/// Dormand-Prince 5(4) with PI step-size control. On failure the trajectory
/// holds every accepted step and carries the failure status.
Trajectory flow(const VectorField& vf, double t0, const Vector& x0, double t1,
                const StepControl& ctrl = {});

struct OrderReport {
  double min_margin = std::numeric_limits<double>::infinity();  // min_t min_i (y_i - x_i)
  double worst_time = 0.0;
  bool passed = true;
  FlowStatus status = FlowStatus::ok;
};
OrderReport check_order_preservation(const VectorField& vf, const Vector& x0, const Vector& y0,
                                     double horizon, const StepControl& ctrl = {}, double tol = 1e-7);
Json to_json(const OrderReport& r);

struct PositivityOptions {
  double scale = 1.0;   // boundary points drawn from [0, scale]^n
  int per_face = 100;
  int simulations = 10;
  double horizon = 5.0;
  double t_window = 1.0;  // boundary checks sample t in [0, t_window]
  double tol = 1e-9;
  std::uint64_t seed = 1;
};

struct PositivityReport {
  std::size_t boundary_samples = 0;
  double worst_subtangential = std::numeric_limits<double>::infinity();  // min f_i at x_i = 0
  Vector worst_point;
  double worst_time = 0.0;
  std::size_t simulations = 0;
  double min_state_entry = std::numeric_limits<double>::infinity();
  bool passed = true;
};
PositivityReport check_positivity(const VectorField& vf, const PositivityOptions& opts = {});
Json to_json(const PositivityReport& r);

struct CoppelReport {
  std::size_t points = 0;
  double worst_ratio = 0.0;  // max ||x(t)|| / bound(t) (0/0 counts as 1)
  double worst_time = 0.0;
  bool passed = true;
  std::vector<double> times;
  std::vector<double> norms;
  std::vector<double> bounds;
};

/// Integrates x' = A(t) x from x0 >= 0 and compares ||x(t)|| against
/// exp(int_0^t mu+(A(s)) ds) ||x0|| on the integrator grid (trapezoid rule).
/// Refuses with HypothesisError when a sampled A(t) is not Metzler.
CoppelReport coppel_check(const std::function<Matrix(double)>& a_of_t, const Vector& x0,
                          const NormSpec& ns, double horizon, const StepControl& ctrl = {},
                          double tol = 1e-6);
Json to_json(const CoppelReport& r);

}  // namespace ctk
