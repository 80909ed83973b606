#pragma once

#include "ctk/json_io.hpp"

#include <string>
#include <vector>

namespace ctk {

enum class ScalarKind { linear, power, saturating_exponential, piecewise_linear, tanh_like, zero, xexp };
enum class FnClass { K, K_inf, nonneg_zero_at_zero };

std::string to_string(ScalarKind k);
std::string to_string(FnClass c);

/// Catalog of scalar functions used for dissipation rates, gains and
/// activations:
///
///   linear                  a x
///   power                   a sign(x) |x|^r, r >= 1
///   saturating_exponential  a (1 - e^{-k x})
///   piecewise_linear        interpolates (0,0) and the knots, extends the last slope
///   tanh_like               a tanh(k x)
///   zero                    0
///   xexp                    a x e^{-k x}
///
/// Negative arguments: power and tanh_like are odd, piecewise_linear extends
/// its first slope, the others use the same formula.
class ScalarFn {
 public:
  static ScalarFn linear(double a);
  static ScalarFn power(double a, double r);
  static ScalarFn saturating_exponential(double a, double k);
  static ScalarFn piecewise_linear(std::vector<double> xs, std::vector<double> ys);
  static ScalarFn tanh_like(double a, double k);
  static ScalarFn zero();
  static ScalarFn xexp(double a, double k);

  ScalarKind kind() const { return kind_; }
  FnClass declared() const { return declared_; }
  ScalarFn& declare(FnClass c) {
    declared_ = c;
    return *this;
  }

  double value(double x) const;
  struct Slope {
    double value = 0.0;
    bool at_knot = false;  // right derivative at a piecewise-linear knot
  };
  Slope derivative(double x) const;
  /// Inverse on [0, sup value); throws for non-invertible kinds.
  double inverse(double y) const;
  /// sup over x != y of (g(x) - g(y)) / (x - y): the sector bound of an
  /// activation. Infinite for superlinear power functions.
  double sector_bound() const;

  /// Checks the declared class on a sample grid; throws InputError.
  void validate() const;
  std::string describe() const;

  double a() const { return a_; }
  double k() const { return k_; }
  double r() const { return r_; }
  const std::vector<double>& knot_x() const { return xs_; }
  const std::vector<double>& knot_y() const { return ys_; }

 private:
  ScalarKind kind_ = ScalarKind::zero;
  FnClass declared_ = FnClass::nonneg_zero_at_zero;
  double a_ = 0.0, k_ = 1.0, r_ = 1.0;
  std::vector<double> xs_, ys_;
};

/// {"kind": "tanh_like", "a": 0.5, "k": 1, "class": "K"}; piecewise_linear
/// takes "knots": [[x, y], ...].
ScalarFn scalar_fn_from_json(const Json& j);
Json to_json(const ScalarFn& f);

}  // namespace ctk
