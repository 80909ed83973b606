#include "ctk/pairings.hpp"

#include <algorithm>
#include <cmath>

namespace ctk {

std::vector<Index> max_index_set(const Vector& x, double tie_tol) {
  if (x.size() == 0) throw InputError("max_index_set: empty vector");
  const double m = x.cwiseAbs().maxCoeff();
  if (m == 0.0) throw InputError("max_index_set: zero vector has no max-index set");
  std::vector<Index> out;
  const double threshold = (1.0 - tie_tol) * m;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x(i)) >= threshold) out.push_back(i);
  return out;
}

double weak_pairing(const Vector& x, const Vector& y, const NormSpec& ns, double tie_tol) {
  if (x.size() != y.size()) throw InputError("weak_pairing: dimension mismatch");
  const Vector rx = ns.apply(x);
  const Vector ry = ns.apply(y);
  const double m = ry.size() ? ry.cwiseAbs().maxCoeff() : 0.0;
  if (m == 0.0) return 0.0;
  const Exponent p = ns.exponent();
  if (p.is_infinite()) {
    double best = -std::numeric_limits<double>::infinity();
    for (Index i : max_index_set(ry, tie_tol)) best = std::max(best, ry(i) * rx(i));
    return best;
  }
  if (p.is_one()) {
    double acc = 0.0;
    for (Index i = 0; i < ry.size(); ++i) {
      if (ry(i) > 0) acc += rx(i);
      else if (ry(i) < 0) acc -= rx(i);
    }
    return ry.cwiseAbs().sum() * acc;
  }
  // Scaled by m = max|Ry| so that |u_i|^{p-1} never overflows.
  const double e = p.value();
  const Vector u = ry / m;
  double acc = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    if (u(i) == 0.0) continue;
    const double mag = std::pow(std::abs(u(i)), e - 1.0);
    acc += (u(i) > 0 ? mag : -mag) * rx(i);
  }
  return m * std::pow(lp_norm(u, p), 2.0 - e) * acc;
}

std::vector<double> HSchedule::values() const {
  std::vector<double> h;
  h.reserve(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k) h.push_back(h0 * std::ldexp(1.0, -k));
  return h;
}

namespace {

double line_intercept(std::span<const double> h, std::span<const double> q) {
  const double n = static_cast<double>(h.size());
  double sh = 0, sq = 0, shh = 0, shq = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    sh += h[i];
    sq += q[i];
    shh += h[i] * h[i];
    shq += h[i] * q[i];
  }
  const double den = n * shh - sh * sh;
  if (den == 0.0) return sq / n;
  const double slope = (n * shq - sh * sq) / den;
  return (sq - slope * sh) / n;
}

}  // namespace

LimitEstimate richardson_limit(std::span<const double> h, std::span<const double> q, int points,
                               double rel_tol) {
  if (h.size() != q.size() || h.empty()) throw InputError("richardson_limit: bad samples");
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(points), h.size());
  const std::size_t start = h.size() - k;
  LimitEstimate out;
  out.value = line_intercept(h.subspan(start, k), q.subspan(start, k));
  if (start > 0) {
    const double prev = line_intercept(h.subspan(start - 1, k), q.subspan(start - 1, k));
    out.spread = std::abs(out.value - prev);
    out.converged = out.spread <= rel_tol * std::max(1.0, std::abs(out.value));
  }
  return out;
}

namespace {

// ||r + h s||_p - ||r||_p without cancellation: per-component increments
// through log1p/expm1 while the sign of r_i is kept.
double norm_increment(const Vector& r, const Vector& s, double h, double p) {
  double base = 0.0, delta = 0.0;
  for (Index i = 0; i < r.size(); ++i) {
    const double ri = std::abs(r(i));
    base += std::pow(ri, p);
    const double step = h * s(i);
    if (ri > 0.0 && std::abs(step) < ri)
      delta += std::pow(ri, p) * std::expm1(p * std::log1p(step / r(i)));
    else
      delta += std::pow(std::abs(r(i) + step), p) - std::pow(ri, p);
  }
  return std::pow(base, 1.0 / p) * std::expm1(std::log1p(delta / base) / p);
}

}  // namespace

DeimlingResult check_deimling(const Vector& x, const Vector& y, const NormSpec& ns,
                              const HSchedule& schedule) {
  if (x.size() != y.size()) throw InputError("check_deimling: dimension mismatch");
  const double ny = weighted_norm(y, ns);
  if (ny == 0.0) throw InputError("check_deimling: y must be nonzero");
  DeimlingResult out;
  out.pairing = weak_pairing(x, y, ns);
  const double nx = weighted_norm(x, ns);
  if (nx == 0.0) {
    out.margin = -out.pairing;
    return out;
  }
  // The quotient is positively homogeneous in x, so h is scaled by ||y||/||x||.
  double scale = ny / nx;
  const Exponent p = ns.exponent();
  const bool finite_p = !p.is_infinite() && !p.is_one();
  const Vector ry = ns.apply(y), rx = ns.apply(x);
  if (finite_p) {
    // Stay inside the region where no component of R(y + h x) changes sign.
    for (Index i = 0; i < ry.size(); ++i)
      if (ry(i) != 0.0 && rx(i) != 0.0) scale = std::min(scale, std::abs(ry(i)) / std::abs(rx(i)));
  }
  std::vector<double> hs, qs;
  for (double h : schedule.values()) {
    const double hh = h * scale;
    hs.push_back(hh);
    qs.push_back((finite_p ? norm_increment(ry, rx, hh, p.value()) : weighted_norm(y + hh * x, ns) - ny) / hh);
  }
  const auto lim = richardson_limit(hs, qs, 4, 1e-7);
  out.directional_derivative = ny * lim.value;
  out.converged = lim.converged;
  out.margin = out.directional_derivative - out.pairing;
  return out;
}

void MarginReport::record(double margin, double tol, const std::function<Json()>& inputs) {
  ++samples;
  worst_margin = std::min(worst_margin, margin);
  if (margin < -tol) {
    ++failure_count;
    if (failures.size() < kMaxStoredFailures) failures.push_back({inputs ? inputs() : Json(), margin});
  }
}

Json to_json(const MarginReport& r) {
  Json failures = Json::array();
  for (const auto& f : r.failures) failures.push_back({{"inputs", f.inputs}, {"value", f.value}});
  return {{"condition", r.condition},
          {"samples", r.samples},
          {"worst_margin", std::isfinite(r.worst_margin) ? Json(r.worst_margin) : Json()},
          {"failure_count", r.failure_count},
          {"flagged", r.flagged},
          {"failures", failures}};
}

namespace {

// Piecewise-smooth structure of the norm at Rx: sign pattern, plus the
// max-index set for p = inf.
std::vector<int> norm_structure(const Vector& rx, Exponent p, double tie_tol) {
  std::vector<int> key;
  key.reserve(static_cast<std::size_t>(rx.size()) * 2);
  for (Index i = 0; i < rx.size(); ++i) key.push_back(rx(i) > 0 ? 1 : (rx(i) < 0 ? -1 : 0));
  if (p.is_infinite() && rx.cwiseAbs().maxCoeff() > 0) {
    key.push_back(-100);
    for (Index i : max_index_set(rx, tie_tol)) key.push_back(static_cast<int>(i));
  }
  return key;
}

}  // namespace

bool forward_window_smooth(const Vector& r0, const Vector& r1, const Vector& r2, const Vector& rdot,
                           double offset, Exponent p, const CurveResidualOptions& opts) {
  if (r0.cwiseAbs().maxCoeff() == 0.0) return rdot.cwiseAbs().maxCoeff() == 0.0;
  const auto k0 = norm_structure(r0, p, opts.tie_tol);
  if (k0 != norm_structure(r1, p, opts.tie_tol) || k0 != norm_structure(r2, p, opts.tie_tol)) return false;
  if (!p.is_two())
    for (Index i = 0; i < r0.size(); ++i)
      if (std::abs(r0(i)) < opts.guard * 2 * offset * std::abs(rdot(i))) return false;
  return true;
}

CurveResidualReport check_curve_norm_derivative(const Trajectory& traj, const NormSpec& ns,
                                                const CurveResidualOptions& opts) {
  CurveResidualReport out;
  const std::size_t n = traj.size();
  out.residuals.assign(n, std::numeric_limits<double>::quiet_NaN());
  if (n < 2) return out;
  const Exponent p = ns.exponent();
  auto norm = [&](const Vector& v) { return weighted_norm(v, ns); };
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Vector& x = traj.states()[k];
    const Vector& dx = traj.derivatives()[k];
    const double t = traj.times()[k];
    const Vector rx0 = ns.apply(x);
    const Vector rdx = ns.apply(dx);
    // |r|^p is not C^3 at 0 for p outside {1, 2}; keep the window short
    // relative to the time a component needs to reach 0.
    double max_offset = opts.max_offset;
    if (!p.is_infinite() && !p.is_one() && !p.is_two())
      for (Index i = 0; i < rx0.size(); ++i)
        if (rdx(i) != 0.0) max_offset = std::min(max_offset, 1e-4 * std::abs(rx0(i)) / std::abs(rdx(i)));
    if (max_offset < 1e-9) {
      ++out.excluded;
      out.excluded_times.push_back(t);
      continue;
    }
    const auto fd = forward_dini(traj, k, norm, max_offset);
    const bool exclude = !forward_window_smooth(rx0, ns.apply(traj.state_at(t + fd.offset)),
                                                ns.apply(traj.state_at(t + 2 * fd.offset)), rdx,
                                                fd.offset, p, opts);
    if (exclude) {
      ++out.excluded;
      out.excluded_times.push_back(t);
      continue;
    }
    const double residual = std::abs(norm(x) * fd.value - weak_pairing(dx, x, ns, opts.tie_tol));
    out.residuals[k] = residual;
    ++out.evaluated;
    if (residual > out.max_residual) {
      out.max_residual = residual;
      out.worst_time = t;
    }
  }
  return out;
}

Json to_json(const CurveResidualReport& r) {
  return {{"condition", "curve_norm_derivative"},
          {"samples", r.evaluated},
          {"excluded", r.excluded},
          {"worst_margin", -r.max_residual},
          {"worst_time", r.worst_time}};
}

}  // namespace ctk
