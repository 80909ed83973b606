#include "ctk/scalar_fn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ctk {

std::string to_string(ScalarKind k) {
  switch (k) {
    case ScalarKind::linear: return "linear";
    case ScalarKind::power: return "power";
    case ScalarKind::saturating_exponential: return "saturating_exponential";
    case ScalarKind::piecewise_linear: return "piecewise_linear";
    case ScalarKind::tanh_like: return "tanh_like";
    case ScalarKind::zero: return "zero";
    case ScalarKind::xexp: return "xexp";
  }
  return "unknown";
}

std::string to_string(FnClass c) {
  switch (c) {
    case FnClass::K: return "K";
    case FnClass::K_inf: return "K_inf";
    case FnClass::nonneg_zero_at_zero: return "nonneg_zero_at_zero";
  }
  return "unknown";
}

namespace {
void require_positive(double v, const char* what) {
  if (!(v > 0) || !std::isfinite(v)) throw InputError(std::string(what) + " must be positive and finite");
}
}  // namespace

ScalarFn ScalarFn::linear(double a) {
  require_positive(a, "linear slope");
  ScalarFn f;
  f.kind_ = ScalarKind::linear;
  f.a_ = a;
  f.declared_ = FnClass::K_inf;
  return f;
}

ScalarFn ScalarFn::power(double a, double r) {
  require_positive(a, "power coefficient");
  if (!(r >= 1.0) || !std::isfinite(r)) throw InputError("power exponent must be >= 1");
  ScalarFn f;
  f.kind_ = ScalarKind::power;
  f.a_ = a;
  f.r_ = r;
  f.declared_ = FnClass::K_inf;
  return f;
}

ScalarFn ScalarFn::saturating_exponential(double a, double k) {
  require_positive(a, "saturating_exponential amplitude");
  require_positive(k, "saturating_exponential rate");
  ScalarFn f;
  f.kind_ = ScalarKind::saturating_exponential;
  f.a_ = a;
  f.k_ = k;
  f.declared_ = FnClass::K;
  return f;
}

ScalarFn ScalarFn::piecewise_linear(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || xs.size() != ys.size()) throw InputError("piecewise_linear: need matching nonempty knots");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw InputError("piecewise_linear: non-finite knot");
    if (xs[i] <= (i ? xs[i - 1] : 0.0)) throw InputError("piecewise_linear: knots must increase from 0");
  }
  ScalarFn f;
  f.kind_ = ScalarKind::piecewise_linear;
  f.xs_ = std::move(xs);
  f.ys_ = std::move(ys);
  f.declared_ = FnClass::K;
  return f;
}

ScalarFn ScalarFn::tanh_like(double a, double k) {
  require_positive(a, "tanh_like amplitude");
  require_positive(k, "tanh_like gain");
  ScalarFn f;
  f.kind_ = ScalarKind::tanh_like;
  f.a_ = a;
  f.k_ = k;
  f.declared_ = FnClass::K;
  return f;
}

ScalarFn ScalarFn::zero() { return ScalarFn(); }

ScalarFn ScalarFn::xexp(double a, double k) {
  require_positive(a, "xexp amplitude");
  require_positive(k, "xexp rate");
  ScalarFn f;
  f.kind_ = ScalarKind::xexp;
  f.a_ = a;
  f.k_ = k;
  f.declared_ = FnClass::nonneg_zero_at_zero;
  return f;
}

double ScalarFn::value(double x) const {
  switch (kind_) {
    case ScalarKind::linear: return a_ * x;
    case ScalarKind::power: return a_ * std::copysign(std::pow(std::abs(x), r_), x);
    case ScalarKind::saturating_exponential: return -a_ * std::expm1(-k_ * x);
    case ScalarKind::tanh_like: return a_ * std::tanh(k_ * x);
    case ScalarKind::zero: return 0.0;
    case ScalarKind::xexp: return a_ * x * std::exp(-k_ * x);
    case ScalarKind::piecewise_linear: {
      double x0 = 0.0, y0 = 0.0;
      if (x <= xs_.front()) return ys_.front() / xs_.front() * x;
      for (std::size_t i = 0; i < xs_.size(); ++i) {
        if (x <= xs_[i]) return y0 + (ys_[i] - y0) * (x - x0) / (xs_[i] - x0);
        x0 = xs_[i];
        y0 = ys_[i];
      }
      const std::size_t m = xs_.size();
      const double px = m > 1 ? xs_[m - 2] : 0.0, py = m > 1 ? ys_[m - 2] : 0.0;
      return y0 + (ys_[m - 1] - py) / (xs_[m - 1] - px) * (x - x0);
    }
  }
  return 0.0;
}

ScalarFn::Slope ScalarFn::derivative(double x) const {
  switch (kind_) {
    case ScalarKind::linear: return {a_, false};
    case ScalarKind::power:
      return {r_ == 1.0 ? a_ : a_ * r_ * std::pow(std::abs(x), r_ - 1.0), false};
    case ScalarKind::saturating_exponential: return {a_ * k_ * std::exp(-k_ * x), false};
    case ScalarKind::tanh_like: {
      const double c = std::cosh(k_ * x);
      return {a_ * k_ / (c * c), false};
    }
    case ScalarKind::zero: return {0.0, false};
    case ScalarKind::xexp: return {a_ * (1.0 - k_ * x) * std::exp(-k_ * x), false};
    case ScalarKind::piecewise_linear: {
      double x0 = 0.0, y0 = 0.0;
      bool knot = x == 0.0;
      for (std::size_t i = 0; i < xs_.size(); ++i) {
        if (x == xs_[i]) knot = true;
        if (x < xs_[i] || (x < 0.0 && i == 0)) return {(ys_[i] - y0) / (xs_[i] - x0), knot};
        x0 = xs_[i];
        y0 = ys_[i];
      }
      const std::size_t m = xs_.size();
      const double px = m > 1 ? xs_[m - 2] : 0.0, py = m > 1 ? ys_[m - 2] : 0.0;
      return {(ys_[m - 1] - py) / (xs_[m - 1] - px), knot};
    }
  }
  return {0.0, false};
}

double ScalarFn::inverse(double y) const {
  if (y < 0) throw InputError("inverse: negative argument");
  switch (kind_) {
    case ScalarKind::linear: return y / a_;
    case ScalarKind::power: return std::pow(y / a_, 1.0 / r_);
    case ScalarKind::saturating_exponential:
      return y >= a_ ? std::numeric_limits<double>::infinity() : -std::log1p(-y / a_) / k_;
    case ScalarKind::tanh_like:
      return y >= a_ ? std::numeric_limits<double>::infinity() : std::atanh(y / a_) / k_;
    case ScalarKind::piecewise_linear: {
      double x0 = 0.0, y0 = 0.0;
      for (std::size_t i = 0; i < xs_.size(); ++i) {
        if (ys_[i] <= y0) throw InputError("inverse: piecewise_linear is not increasing");
        if (y <= ys_[i]) return x0 + (y - y0) * (xs_[i] - x0) / (ys_[i] - y0);
        x0 = xs_[i];
        y0 = ys_[i];
      }
      const double slope = derivative(x0 + 1.0).value;
      if (slope <= 0) return std::numeric_limits<double>::infinity();
      return x0 + (y - y0) / slope;
    }
    case ScalarKind::zero:
    case ScalarKind::xexp:
      break;
  }
  throw InputError("inverse: " + to_string(kind_) + " is not invertible");
}

double ScalarFn::sector_bound() const {
  switch (kind_) {
    case ScalarKind::linear: return a_;
    case ScalarKind::power: return r_ == 1.0 ? a_ : std::numeric_limits<double>::infinity();
    case ScalarKind::saturating_exponential: return std::numeric_limits<double>::infinity();  // slope grows for x < 0
    case ScalarKind::tanh_like: return a_ * k_;
    case ScalarKind::zero: return 0.0;
    case ScalarKind::xexp: return std::numeric_limits<double>::infinity();
    case ScalarKind::piecewise_linear: {
      double best = 0.0, x0 = 0.0, y0 = 0.0;
      for (std::size_t i = 0; i < xs_.size(); ++i) {
        best = std::max(best, (ys_[i] - y0) / (xs_[i] - x0));
        x0 = xs_[i];
        y0 = ys_[i];
      }
      return best;
    }
  }
  return 0.0;
}

void ScalarFn::validate() const {
  if (value(0.0) != 0.0) throw InputError(describe() + ": value at 0 must be 0");
  const int n = 400;
  double prev = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double x = 100.0 * std::pow(double(i) / n, 3.0);
    const double v = value(x);
    if (!std::isfinite(v)) throw InputError(describe() + ": non-finite value");
    if (declared_ == FnClass::nonneg_zero_at_zero) {
      if (v < 0) throw InputError(describe() + ": must be nonnegative on x >= 0");
    } else if (!(v > prev) && !(v == prev && std::abs(value(1e6) - v) <= 1e-12 * std::abs(v))) {
      // equal values are accepted only once the function has saturated in double precision
      throw InputError(describe() + ": class " + to_string(declared_) + " requires a strictly increasing function");
    }
    prev = v;
  }
  if (declared_ == FnClass::K_inf && !(value(1e6) >= 1e3 * value(1.0)))
    throw InputError(describe() + ": class K_inf requires an unbounded function");
}

std::string ScalarFn::describe() const {
  std::ostringstream os;
  os << to_string(kind_);
  switch (kind_) {
    case ScalarKind::linear: os << "(a=" << a_ << ")"; break;
    case ScalarKind::power: os << "(a=" << a_ << ", r=" << r_ << ")"; break;
    case ScalarKind::saturating_exponential:
    case ScalarKind::tanh_like:
    case ScalarKind::xexp: os << "(a=" << a_ << ", k=" << k_ << ")"; break;
    case ScalarKind::piecewise_linear: os << "(" << xs_.size() << " knots)"; break;
    case ScalarKind::zero: break;
  }
  return os.str();
}

ScalarFn scalar_fn_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind")) throw InputError("scalar function: expected an object with \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  auto num = [&](const char* key, double dflt) {
    if (!j.contains(key)) return dflt;
    if (!j.at(key).is_number()) throw InputError(std::string("scalar function: \"") + key + "\" must be a number");
    return j.at(key).get<double>();
  };
  ScalarFn f;
  if (kind == "linear") f = ScalarFn::linear(num("a", 1.0));
  else if (kind == "power") f = ScalarFn::power(num("a", 1.0), num("r", 1.0));
  else if (kind == "saturating_exponential") f = ScalarFn::saturating_exponential(num("a", 1.0), num("k", 1.0));
  else if (kind == "tanh_like") f = ScalarFn::tanh_like(num("a", 1.0), num("k", 1.0));
  else if (kind == "zero") f = ScalarFn::zero();
  else if (kind == "xexp") f = ScalarFn::xexp(num("a", 1.0), num("k", 1.0));
  else if (kind == "piecewise_linear") {
    std::vector<double> xs, ys;
    if (!j.contains("knots") || !j.at("knots").is_array()) throw InputError("piecewise_linear: missing knots");
    for (const auto& k : j.at("knots")) {
      if (!k.is_array() || k.size() != 2) throw InputError("piecewise_linear: knots are [x, y] pairs");
      xs.push_back(k[0].get<double>());
      ys.push_back(k[1].get<double>());
    }
    f = ScalarFn::piecewise_linear(xs, ys);
  } else {
    throw InputError("scalar function: unknown kind \"" + kind + "\"");
  }
  if (j.contains("class")) {
    const std::string c = j.at("class").get<std::string>();
    if (c == "K") f.declare(FnClass::K);
    else if (c == "K_inf") f.declare(FnClass::K_inf);
    else if (c == "nonneg_zero_at_zero") f.declare(FnClass::nonneg_zero_at_zero);
    else throw InputError("scalar function: unknown class \"" + c + "\"");
  }
  return f;
}

Json to_json(const ScalarFn& f) {
  Json j = {{"kind", to_string(f.kind())}, {"class", to_string(f.declared())}};
  switch (f.kind()) {
    case ScalarKind::linear: j["a"] = f.a(); break;
    case ScalarKind::power: j["a"] = f.a(); j["r"] = f.r(); break;
    case ScalarKind::saturating_exponential:
    case ScalarKind::tanh_like:
    case ScalarKind::xexp: j["a"] = f.a(); j["k"] = f.k(); break;
    case ScalarKind::piecewise_linear: {
      Json knots = Json::array();
      for (std::size_t i = 0; i < f.knot_x().size(); ++i) knots.push_back({f.knot_x()[i], f.knot_y()[i]});
      j["knots"] = knots;
      break;
    }
    case ScalarKind::zero: break;
  }
  return j;
}

}  // namespace ctk
