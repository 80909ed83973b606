#include "ctk/normcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ctk {

Exponent Exponent::finite(double p) {
  if (!std::isfinite(p) || p < 1.0) {
    throw InputError("norm exponent must satisfy p >= 1, got " + std::to_string(p));
  }
  return Exponent(p, false);
}

Exponent Exponent::from_double(double p) {
  if (std::isinf(p) && p > 0) return infinity();
  return finite(p);
}

double Exponent::value() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : p_;
}

std::string Exponent::to_string() const {
  if (infinite_) return "inf";
  std::ostringstream os;
  os << p_;
  return os.str();
}

Exponent conjugate_exponent(Exponent p) {
  if (p.is_infinite()) return Exponent::finite(1.0);
  if (p.is_one()) return Exponent::infinity();
  const double v = p.value();
  return Exponent::finite(v / (v - 1.0));
}

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw InputError(std::string(what) + ": matrix must be square");
  }
}

void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
}

NormSpec NormSpec::identity(Exponent p) { return NormSpec(p, IdentityWeight{}); }

NormSpec NormSpec::diagonal(Exponent p, Vector eta) {
  if (eta.size() == 0) throw InputError("diagonal weight must be nonempty");
  require_finite(eta, "diagonal weight");
  if ((eta.array() <= 0.0).any()) {
    throw InputError("diagonal weight entries must be strictly positive");
  }
  return NormSpec(p, DiagonalWeight{std::move(eta)});
}

NormSpec NormSpec::general(Exponent p, Matrix r) {
  require_square(r, "general weight");
  if (r.size() == 0) throw InputError("general weight must be nonempty");
  require_finite(r, "general weight");
  if (!is_nonnegative(r)) throw InputError("general weight must be entrywise nonnegative");
  Eigen::JacobiSVD<Matrix> svd(r);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || smax / smin > kMaxCondition) {
    throw InputError("general weight is singular or too ill-conditioned");
  }
  Matrix r_inv = r.fullPivLu().inverse();
  return NormSpec(p, GeneralWeight{std::move(r), std::move(r_inv)});
}

WeightKind NormSpec::kind() const {
  switch (weight_.index()) {
    case 0: return WeightKind::identity;
    case 1: return WeightKind::diagonal;
    default: return WeightKind::general;
  }
}

std::optional<Index> NormSpec::dim() const {
  if (auto d = std::get_if<DiagonalWeight>(&weight_)) return d->eta.size();
  if (auto g = std::get_if<GeneralWeight>(&weight_)) return g->r.rows();
  return std::nullopt;
}

void NormSpec::check_dim(Index n) const {
  if (auto d = dim(); d && *d != n) {
    throw InputError("dimension mismatch: norm weight has dimension " + std::to_string(*d) +
                     ", argument has " + std::to_string(n));
  }
}

Vector NormSpec::apply(const Vector& x) const {
  check_dim(x.size());
  if (auto d = std::get_if<DiagonalWeight>(&weight_)) return d->eta.cwiseProduct(x);
  if (auto g = std::get_if<GeneralWeight>(&weight_)) return g->r * x;
  return x;
}

Vector NormSpec::apply_inverse(const Vector& y) const {
  check_dim(y.size());
  if (auto d = std::get_if<DiagonalWeight>(&weight_)) return y.cwiseQuotient(d->eta);
  if (auto g = std::get_if<GeneralWeight>(&weight_)) return g->r_inv * y;
  return y;
}

Matrix NormSpec::similarity(const Matrix& a) const {
  require_square(a, "similarity");
  check_dim(a.rows());
  if (auto d = std::get_if<DiagonalWeight>(&weight_)) {
    return d->eta.asDiagonal() * a * d->eta.cwiseInverse().asDiagonal();
  }
  if (auto g = std::get_if<GeneralWeight>(&weight_)) return g->r * a * g->r_inv;
  return a;
}

Matrix NormSpec::weight_matrix(Index n) const {
  check_dim(n);
  if (auto d = std::get_if<DiagonalWeight>(&weight_)) return d->eta.asDiagonal();
  if (auto g = std::get_if<GeneralWeight>(&weight_)) return g->r;
  return Matrix::Identity(n, n);
}

NormSpec NormSpec::with_exponent(Exponent p) const { return NormSpec(p, weight_); }

std::string NormSpec::describe() const {
  std::ostringstream os;
  os << "l_" << p_.to_string();
  switch (kind()) {
    case WeightKind::identity: break;
    case WeightKind::diagonal: os << ",diag"; break;
    case WeightKind::general: os << ",general"; break;
  }
  return os.str();
}

double lp_norm(const Vector& v, Exponent p) {
  if (v.size() == 0) return 0.0;
  const double m = v.cwiseAbs().maxCoeff();
  if (p.is_infinite() || m == 0.0) return m;
  if (p.is_one()) return v.cwiseAbs().sum();
  const double e = p.value();
  double acc = 0.0;
  for (Index i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v(i)) / m, e);
  return m * std::pow(acc, 1.0 / e);
}

double weighted_norm(const Vector& x, const NormSpec& ns) {
  return lp_norm(ns.apply(x), ns.exponent());
}

bool is_metzler(const Matrix& a, double tol) {
  require_square(a, "is_metzler");
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (i != j && a(i, j) < -tol) return false;
  return true;
}

bool is_nonnegative(const Matrix& a, double tol) { return (a.array() >= -tol).all(); }

double induced_norm_1(const Matrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

double induced_norm_inf(const Matrix& a) { return a.cwiseAbs().rowwise().sum().maxCoeff(); }

SymmetricEigen jacobi_eigen(const Matrix& s) {
  require_square(s, "jacobi_eigen");
  const Index n = s.rows();
  Matrix a = 0.5 * (s + s.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double scale = std::max(1.0, a.norm());
  int sweep = 0;
  constexpr int kMaxSweeps = 100;
  auto off_norm = [&] {
    double acc = 0.0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (i != j) acc += a(i, j) * a(i, j);
    return std::sqrt(acc);
  };
  while (off_norm() > 1e-12 * scale && sweep < kMaxSweeps) {
    ++sweep;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  if (off_norm() > 1e-12 * scale) throw NumericalError("Jacobi eigensolver did not converge");

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index x, Index y) { return a(x, x) < a(y, y); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = a(src, src);
    out.vectors.col(k) = v.col(src);
  }
  out.sweeps = sweep;
  return out;
}

double max_symmetric_eigenvalue(const Matrix& s) {
  const auto eig = jacobi_eigen(s);
  return eig.values(eig.values.size() - 1);
}

}  // namespace ctk
