#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ctk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: wrong dimensions, non-finite entries, invalid parameters.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A theorem hypothesis does not hold for the supplied data (e.g. a
/// non-Metzler generator handed to a check that requires one).
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// An iterative routine failed to converge or an integration broke down.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Exponent of an l_p norm. Infinity is a distinct state, never a large float.
class Exponent {
 public:
  static Exponent finite(double p);
  static Exponent infinity() { return Exponent(0.0, true); }
  /// Accepts p >= 1 or +inf.
  static Exponent from_double(double p);

  bool is_infinite() const { return infinite_; }
  bool is_one() const { return !infinite_ && p_ == 1.0; }
  bool is_two() const { return !infinite_ && p_ == 2.0; }
  /// Finite exponent value; +inf when infinite.
  double value() const;
  std::string to_string() const;

  friend bool operator==(const Exponent& a, const Exponent& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.p_ == b.p_);
  }

 private:
  Exponent(double p, bool inf) : p_(p), infinite_(inf) {}
  double p_;
  bool infinite_;
};

/// Hoelder conjugate q with 1/p + 1/q = 1 and 1/inf = 0.
Exponent conjugate_exponent(Exponent p);

struct IdentityWeight {};
struct DiagonalWeight {
  Vector eta;
};
struct GeneralWeight {
  Matrix r;
  Matrix r_inv;
};
using Weight = std::variant<IdentityWeight, DiagonalWeight, GeneralWeight>;

enum class WeightKind { identity, diagonal, general };

/// Weighted l_p norm x -> ||W x||_p. Immutable after construction.
class NormSpec {
 public:
  /// Unweighted Euclidean norm.
  NormSpec() : p_(Exponent::finite(2.0)), weight_(IdentityWeight{}) {}
  static NormSpec identity(Exponent p);
  /// Diagonal weight [eta]; every eta_i must be strictly positive.
  static NormSpec diagonal(Exponent p, Vector eta);
  /// General weight R: entrywise nonnegative and invertible with
  /// condition number at most kMaxCondition.
  static NormSpec general(Exponent p, Matrix r);

  static constexpr double kMaxCondition = 1e12;

  Exponent exponent() const { return p_; }
  const Weight& weight() const { return weight_; }
  WeightKind kind() const;
  /// Dimension fixed by the weight; identity weights adapt to any dimension.
  std::optional<Index> dim() const;
  void check_dim(Index n) const;

  /// Monotonic (|x| <= |y| => ||x|| <= ||y||) holds for identity and diagonal
  /// weights. Every admissible weight is at least positively monotonic.
  bool is_monotonic() const { return kind() != WeightKind::general; }

  Vector apply(const Vector& x) const;
  Vector apply_inverse(const Vector& y) const;
  /// W A W^{-1}.
  Matrix similarity(const Matrix& a) const;
  Matrix weight_matrix(Index n) const;

  NormSpec with_exponent(Exponent p) const;
  NormSpec unweighted() const { return identity(p_); }

  std::string describe() const;

 private:
  NormSpec(Exponent p, Weight w) : p_(p), weight_(std::move(w)) {}
  Exponent p_;
  Weight weight_;
};

double lp_norm(const Vector& v, Exponent p);
double weighted_norm(const Vector& x, const NormSpec& ns);

/// Off-diagonal entries >= -tol.
bool is_metzler(const Matrix& a, double tol = 0.0);
/// All entries >= -tol.
bool is_nonnegative(const Matrix& a, double tol = 0.0);

void require_square(const Matrix& a, const char* what);
void require_finite(const Matrix& a, const char* what);
void require_finite(const Vector& v, const char* what);

/// Induced (operator) norms of the unweighted l_1 and l_inf norms.
double induced_norm_1(const Matrix& a);
double induced_norm_inf(const Matrix& a);

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns
  int sweeps = 0;
};

/// Cyclic Jacobi rotations; stops when the off-diagonal Frobenius norm drops
/// below 1e-12 times the matrix scale.
SymmetricEigen jacobi_eigen(const Matrix& s);
double max_symmetric_eigenvalue(const Matrix& s);

/// Elementwise [a]_+.
inline double positive_part(double a) { return a > 0.0 ? a : 0.0; }

}  // namespace ctk
