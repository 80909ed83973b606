#include "ctk/models.hpp"

#include "ctk/pairings.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ctk {

InputSignal InputSignal::constant(Vector value) {
  require_finite(value, "input");
  InputSignal u;
  u.kind_ = Kind::constant;
  u.offset_ = std::move(value);
  return u;
}

InputSignal InputSignal::sinusoidal(Vector offset, Vector amplitude, double period, double phase) {
  require_finite(offset, "input offset");
  require_finite(amplitude, "input amplitude");
  if (offset.size() != amplitude.size()) throw InputError("sinusoidal input: offset and amplitude differ in size");
  if (!(period > 0) || !std::isfinite(period)) throw InputError("sinusoidal input: period must be positive");
  InputSignal u;
  u.kind_ = Kind::sinusoidal;
  u.offset_ = std::move(offset);
  u.amplitude_ = std::move(amplitude);
  u.period_ = period;
  u.phase_ = phase;
  return u;
}

InputSignal InputSignal::piecewise_constant(std::vector<double> breakpoints, std::vector<Vector> levels) {
  if (levels.size() != breakpoints.size() + 1) throw InputError("piecewise input: need one more level than breakpoints");
  for (std::size_t k = 1; k < breakpoints.size(); ++k)
    if (!(breakpoints[k] > breakpoints[k - 1])) throw InputError("piecewise input: breakpoints must increase");
  for (const auto& l : levels) {
    require_finite(l, "input level");
    if (l.size() != levels.front().size()) throw InputError("piecewise input: levels differ in size");
  }
  InputSignal u;
  u.kind_ = Kind::piecewise_constant;
  u.offset_ = levels.front();
  u.breakpoints_ = std::move(breakpoints);
  u.levels_ = std::move(levels);
  return u;
}

Vector InputSignal::at(double t) const {
  switch (kind_) {
    case Kind::constant: return offset_;
    case Kind::sinusoidal:
      return offset_ + amplitude_ * std::sin(2 * std::numbers::pi * t / period_ + phase_);
    case Kind::piecewise_constant: {
      const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
      return levels_[static_cast<std::size_t>(it - breakpoints_.begin())];
    }
  }
  return offset_;
}

void InputSignal::validate(Index n, bool nonnegative) const {
  if (dim() != n) throw InputError("input has dimension " + std::to_string(dim()) + ", expected " + std::to_string(n));
  if (!nonnegative) return;
  const double span = kind_ == Kind::piecewise_constant && !breakpoints_.empty()
                          ? breakpoints_.back() + 1.0
                          : period_;
  for (int k = 0; k <= 200; ++k)
    if (at(span * k / 200.0).minCoeff() < 0) throw InputError("input must be nonnegative");
  for (const auto& l : levels_)
    if (l.minCoeff() < 0) throw InputError("input must be nonnegative");
  if (kind_ == Kind::sinusoidal && (offset_ - amplitude_.cwiseAbs()).minCoeff() < 0)
    throw InputError("input must be nonnegative");
}

Json to_json(const InputSignal& u) {
  switch (u.kind_) {
    case InputSignal::Kind::constant: return {{"kind", "constant"}, {"value", to_json(u.offset_)}};
    case InputSignal::Kind::sinusoidal:
      return {{"kind", "sin"},
              {"offset", to_json(u.offset_)},
              {"amplitude", to_json(u.amplitude_)},
              {"period", u.period_},
              {"phase", u.phase_}};
    case InputSignal::Kind::piecewise_constant: {
      Json levels = Json::array();
      for (const auto& l : u.levels_) levels.push_back(to_json(l));
      return {{"kind", "piecewise_constant"}, {"times", u.breakpoints_}, {"values", levels}};
    }
  }
  return nullptr;
}

InputSignal input_from_json(const Json& j, Index n) {
  if (j.is_null()) return InputSignal::constant(Vector::Zero(n));
  if (!j.is_object() || !j.contains("kind")) throw InputError("input: expected an object with \"kind\"");
  const Json& p = j.contains("params") ? j.at("params") : j;
  const std::string kind = j.at("kind").get<std::string>();
  auto vec = [&](const char* key, Vector dflt) { return p.contains(key) ? vector_from_json(p.at(key)) : dflt; };
  if (kind == "constant") return InputSignal::constant(vec("value", Vector::Zero(n)));
  if (kind == "sin" || kind == "sinusoidal")
    return InputSignal::sinusoidal(vec("offset", Vector::Zero(n)), vec("amplitude", Vector::Zero(n)),
                                   p.value("period", 2 * std::numbers::pi), p.value("phase", 0.0));
  if (kind == "piecewise_constant") {
    std::vector<Vector> levels;
    for (const auto& l : p.at("values")) levels.push_back(vector_from_json(l));
    return InputSignal::piecewise_constant(p.at("times").get<std::vector<double>>(), levels);
  }
  throw InputError("input: unknown kind \"" + kind + "\"");
}

bool is_irreducible(const Matrix& m) {
  require_square(m, "is_irreducible");
  const Index n = m.rows();
  if (n == 1) return true;
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Index> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const Index i = stack.back();
      stack.pop_back();
      for (Index j = 0; j < n; ++j) {
        const double e = transpose ? m(j, i) : m(i, j);
        if (j != i && e != 0.0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reaches_all(false) && reaches_all(true);
}

namespace {

// Dominant eigenpair of a nonnegative primitive matrix by power iteration.
Vector power_iteration(const Matrix& b, double& rho, int& iterations) {
  const Index n = b.rows();
  Vector x = Vector::Constant(n, 1.0 / double(n));
  rho = 0.0;
  int calm = 0;
  for (iterations = 1; iterations <= 100000; ++iterations) {
    Vector y = b * x;
    const double r = y.sum();
    if (!(r > 0)) throw NumericalError("power iteration: iterate collapsed to zero");
    y /= r;
    const double inc = std::abs(r - rho);
    rho = r;
    x = y;
    calm = inc < 1e-12 * std::max(1.0, std::abs(r)) ? calm + 1 : 0;
    if (calm >= 5 && (b * x - rho * x).cwiseAbs().maxCoeff() <= 1e-11 * std::max(1.0, rho)) break;
  }
  return x;
}

}  // namespace

PerronPair perron_eigpair(const Matrix& m) {
  require_square(m, "perron_eigpair");
  require_finite(m, "perron_eigpair");
  if (!is_metzler(m)) throw HypothesisError("perron_eigpair: matrix is not Metzler");
  if (!is_irreducible(m)) throw HypothesisError("perron_eigpair: matrix is reducible");
  const Index n = m.rows();
  const double s = m.diagonal().cwiseAbs().maxCoeff() + 1.0;
  const Matrix b = m + s * Matrix::Identity(n, n);
  PerronPair out;
  double rho_r = 0.0, rho_l = 0.0;
  int it_r = 0, it_l = 0;
  out.w = power_iteration(b, rho_r, it_r);
  out.v = power_iteration(b.transpose(), rho_l, it_l);
  out.lambda = rho_r - s;
  out.iterations = std::max(it_r, it_l);
  out.residual = std::max((m * out.w - out.lambda * out.w).cwiseAbs().maxCoeff(),
                          (m.transpose() * out.v - out.lambda * out.v).cwiseAbs().maxCoeff());
  if (out.residual > 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw NumericalError("perron_eigpair: slow convergence, residual " + std::to_string(out.residual));
  if (out.v.minCoeff() <= 0 || out.w.minCoeff() <= 0)
    throw NumericalError("perron_eigpair: eigenvector is not strictly positive");
  return out;
}

Vector hopfield_weights(const Vector& v, const Vector& w, Exponent p) {
  if (v.size() != w.size()) throw InputError("hopfield_weights: dimension mismatch");
  if (v.minCoeff() <= 0 || w.minCoeff() <= 0) throw InputError("hopfield_weights: eigenvectors must be positive");
  const double inv_p = p.is_infinite() ? 0.0 : 1.0 / p.value();
  const double inv_q = 1.0 - inv_p;
  Vector eta(v.size());
  for (Index i = 0; i < v.size(); ++i) eta(i) = std::pow(v(i), inv_p) / std::pow(w(i), inv_q);
  return eta / eta.maxCoeff();
}

void HopfieldNetwork::validate() const {
  const Index n = dim();
  if (n == 0) throw InputError("hopfield: empty network");
  require_finite(lambda, "Lambda");
  if (lambda.minCoeff() <= 0) throw InputError("hopfield: Lambda must be positive");
  if (t.rows() != n || t.cols() != n) throw InputError("hopfield: T has wrong shape");
  require_finite(t, "T");
  if (!is_nonnegative(t)) throw InputError("hopfield: T must be nonnegative (excitatory networks only)");
  if (static_cast<Index>(activations.size()) != n) throw InputError("hopfield: need one activation per neuron");
  for (const auto& g : activations) {
    if (g.value(0.0) != 0.0) throw InputError("hopfield: activations must vanish at 0");
    const double gb = g.sector_bound();
    if (!std::isfinite(gb)) throw InputError("hopfield: activation " + g.describe() + " has no finite sector bound");
    for (int k = -50; k < 50; ++k) {
      const double x = 0.1 * k, y = 0.1 * (k + 1) + 0.013;
      const double slope = (g.value(y) - g.value(x)) / (y - x);
      if (slope < -1e-12 || slope > gb * (1 + 1e-12))
        throw InputError("hopfield: activation " + g.describe() + " violates its sector bound");
    }
  }
  input.validate(n, true);
}

Vector HopfieldNetwork::gbar() const {
  Vector g(dim());
  for (Index i = 0; i < dim(); ++i) g(i) = activations[static_cast<std::size_t>(i)].sector_bound();
  return g;
}

Matrix HopfieldNetwork::perron_matrix() const {
  return -Matrix(lambda.asDiagonal()) + t * gbar().asDiagonal();
}

Vector HopfieldNetwork::g(const Vector& x) const {
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) out(i) = activations[static_cast<std::size_t>(i)].value(x(i));
  return out;
}

Vector HopfieldNetwork::rhs(double time, const Vector& x) const {
  return -lambda.cwiseProduct(x) + t * g(x) + input.at(time);
}

VectorField HopfieldNetwork::field() const {
  VectorField vf;
  vf.dim = dim();
  const HopfieldNetwork net = *this;
  vf.rhs = [net](double time, const Vector& x) -> Vector { return net.rhs(time, x); };
  vf.jacobian = [net](double, const Vector& x) -> Matrix {
    Vector d(x.size());
    for (Index i = 0; i < x.size(); ++i) d(i) = net.activations[static_cast<std::size_t>(i)].derivative(x(i)).value;
    return -Matrix(net.lambda.asDiagonal()) + net.t * d.asDiagonal();
  };
  vf.name = "hopfield";
  return vf;
}

HopfieldNetwork hopfield_from_json(const Json& j) {
  HopfieldNetwork net;
  if (!j.contains("Lambda") || !j.contains("T") || !j.contains("activations"))
    throw InputError("hopfield model needs \"Lambda\", \"T\" and \"activations\"");
  net.lambda = vector_from_json(j.at("Lambda"));
  net.t = matrix_from_json(j.at("T"));
  for (const auto& a : j.at("activations")) net.activations.push_back(scalar_fn_from_json(a));
  net.input = input_from_json(j.value("input", Json()), net.dim());
  net.validate();
  return net;
}

bool HopfieldCertificate::certified() const {
  return contracting && std::all_of(checks.begin(), checks.end(), [](const Certificate& c) { return c.certified(); });
}

HopfieldCertificate hopfield_certificate(const HopfieldNetwork& net, Exponent p, const HopfieldOptions& opts) {
  net.validate();
  HopfieldCertificate h;
  h.perron = perron_eigpair(net.perron_matrix());
  h.lambda = h.perron.lambda;
  if (h.lambda >= 0) {
    h.contracting = false;
    h.message = "no contraction certificate at this sector bound (Perron eigenvalue " +
                std::to_string(h.lambda) + " >= 0)";
    return h;
  }
  h.contracting = true;
  h.c = -h.lambda;
  h.eta = hopfield_weights(h.perron.v, h.perron.w, p);
  h.norm = NormSpec::diagonal(p, h.eta);
  const Box domain = opts.domain.value_or(Box::uniform(net.dim(), -5.0, 5.0));
  const auto vf = net.field();
  h.checks.push_back(check_one_sided_lipschitz(vf, h.norm, -h.c, domain, false, opts.check));
  TrajectoryOptions topts;
  topts.horizon = opts.horizon;
  topts.seed = opts.check.seed;
  h.checks.push_back(check_trajectory_contraction(vf, h.norm, -h.c, domain,
                                                  sample_pairs(domain, opts.pairs, false, opts.check.seed), topts));
  h.message = h.certified() ? "strongly contracting at rate c in the Perron-weighted norm"
                            : "rate c from the Perron eigenvalue was refuted by sampling";
  return h;
}

Json to_json(const HopfieldCertificate& h) {
  Json checks = Json::array();
  for (const auto& c : h.checks) checks.push_back(to_json(c));
  Json j = {{"contracting", h.contracting}, {"lambda", h.lambda}, {"message", h.message},
            {"perron_v", to_json(h.perron.v)}, {"perron_w", to_json(h.perron.w)},
            {"certified", h.certified()}, {"checks", checks}};
  if (h.contracting) {
    j["c"] = h.c;
    j["eta"] = to_json(h.eta);
    j["norm"] = to_json(h.norm);
  }
  return j;
}

EquilibriumResult hopfield_equilibrium(const HopfieldNetwork& net, const HopfieldCertificate& cert,
                                       const std::vector<Vector>& initial_states, double horizon,
                                       double increase_tol) {
  if (!cert.contracting) throw HypothesisError("hopfield_equilibrium: no contraction certificate");
  if (!net.input.is_constant()) throw InputError("hopfield_equilibrium: input must be constant");
  const Index n = net.dim();
  const auto vf = net.field();
  EquilibriumResult out;
  out.settle_time = 50.0 / cert.c;
  const auto settle = flow(vf, 0.0, Vector::Zero(n), out.settle_time);
  if (!settle.ok()) throw NumericalError("hopfield_equilibrium: " + settle.message);
  Vector x = settle.final_state();
  // Damped Newton with a finite-difference Jacobian.
  VectorField fd = vf;
  fd.jacobian = nullptr;
  auto resid = [&](const Vector& z) { return net.rhs(0.0, z); };
  Vector f = resid(x);
  for (out.newton_iterations = 0; out.newton_iterations < 50; ++out.newton_iterations) {
    if (f.cwiseAbs().maxCoeff() <= 1e-14) break;
    const Vector step = fd.jacobian_at(0.0, x).fullPivLu().solve(-f);
    double damp = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k, damp *= 0.5) {
      const Vector xn = x + damp * step;
      const Vector fn = resid(xn);
      if (fn.cwiseAbs().maxCoeff() < f.cwiseAbs().maxCoeff()) {
        x = xn;
        f = fn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  out.x_star = x;
  out.residual = f.cwiseAbs().maxCoeff();
  if (out.residual > 1e-10) throw NumericalError("hopfield_equilibrium: Newton polish stalled at residual " +
                                                 std::to_string(out.residual));
  std::vector<Vector> starts = initial_states;
  if (starts.empty()) {
    starts.push_back(Vector::Constant(n, 1.0));
    starts.push_back(Vector::Constant(n, -1.0));
  }
  for (const auto& x0 : starts) {
    const auto traj = flow(vf, 0.0, x0, horizon > 0 ? horizon : out.settle_time);
    if (!traj.ok()) throw NumericalError("hopfield_equilibrium: " + traj.message);
    double prev_d = weighted_norm(traj.states()[0] - out.x_star, cert.norm);
    double prev_f = weighted_norm(traj.derivatives()[0], cert.norm);
    for (std::size_t k = 1; k < traj.size(); ++k) {
      const double d = weighted_norm(traj.states()[k] - out.x_star, cert.norm);
      const double fv = weighted_norm(traj.derivatives()[k], cert.norm);
      out.max_increase_distance = std::max(out.max_increase_distance, d - prev_d);
      out.max_increase_vector_field = std::max(out.max_increase_vector_field, fv - prev_f);
      prev_d = d;
      prev_f = fv;
    }
    out.limits.push_back(traj.final_state());
  }
  out.lyapunov_nonincreasing =
      out.max_increase_distance <= increase_tol && out.max_increase_vector_field <= increase_tol;
  return out;
}

void SeparableSystem::validate() const {
  const Index n = dim();
  if (n == 0) throw InputError("separable system: no dissipation terms");
  if (static_cast<Index>(gamma.size()) != n) throw InputError("separable system: coupling table has wrong size");
  for (const auto& a : alpha) a.validate();
  for (Index i = 0; i < n; ++i) {
    const auto& row = gamma[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != n) throw InputError("separable system: coupling table has wrong size");
    if (row[static_cast<std::size_t>(i)]) throw InputError("separable system: diagonal couplings are not allowed");
    for (const auto& g : row) {
      if (!g) continue;
      if (flavor == Flavor::monotone && g->declared() == FnClass::nonneg_zero_at_zero)
        throw InputError("separable system: coupling " + g->describe() +
                         " is not class K; only the positive flavor accepts it");
      g->validate();
    }
  }
  input.validate(n, true);
}

Vector SeparableSystem::dissipation(const Vector& x) const {
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) out(i) = alpha[static_cast<std::size_t>(i)].value(x(i));
  return out;
}

Vector SeparableSystem::interaction(const Vector& x) const {
  Vector out = Vector::Zero(x.size());
  for (Index i = 0; i < x.size(); ++i)
    for (Index j = 0; j < x.size(); ++j)
      if (const auto& g = gamma[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) out(i) += g->value(x(j));
  return out;
}

StructureMatrix separable_structure_matrix(const SeparableSystem& sys, const Vector& x) {
  const Index n = sys.dim();
  if (x.size() != n) throw InputError("structure matrix: dimension mismatch");
  StructureMatrix s;
  s.m = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto d = sys.alpha[static_cast<std::size_t>(i)].derivative(x(i));
    s.m(i, i) = -d.value;
    s.at_knot = s.at_knot || d.at_knot;
    for (Index j = 0; j < n; ++j) {
      if (const auto& g = sys.gamma[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
        const auto dg = g->derivative(x(j));
        s.m(i, j) = dg.value;
        s.at_knot = s.at_knot || dg.at_knot;
      }
    }
  }
  return s;
}

VectorField SeparableSystem::field() const {
  VectorField vf;
  vf.dim = dim();
  const SeparableSystem sys = *this;
  vf.rhs = [sys](double t, const Vector& x) -> Vector {
    return -sys.dissipation(x) + sys.interaction(x) + sys.input.at(t);
  };
  vf.jacobian = [sys](double, const Vector& x) -> Matrix { return separable_structure_matrix(sys, x).m; };
  vf.name = flavor == Flavor::monotone ? "separable_monotone" : "separable_positive";
  return vf;
}

namespace {

std::vector<std::vector<std::optional<ScalarFn>>> coupling_table(const Json& j, Index n) {
  std::vector<std::vector<std::optional<ScalarFn>>> table(static_cast<std::size_t>(n),
                                                          std::vector<std::optional<ScalarFn>>(static_cast<std::size_t>(n)));
  if (j.is_null()) return table;
  for (const auto& e : j) {
    const Index i = e.at("i").get<Index>(), k = e.at("j").get<Index>();
    if (i < 0 || i >= n || k < 0 || k >= n) throw InputError("coupling index out of range");
    table[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = scalar_fn_from_json(e.at("fn"));
  }
  return table;
}

}  // namespace

SeparableSystem separable_from_json(const Json& j) {
  SeparableSystem sys;
  const std::string type = j.value("type", "separable_monotone");
  sys.flavor = type == "separable_positive" ? Flavor::positive : Flavor::monotone;
  if (!j.contains("alpha")) throw InputError("separable model needs \"alpha\"");
  for (const auto& a : j.at("alpha")) sys.alpha.push_back(scalar_fn_from_json(a));
  sys.gamma = coupling_table(j.value("couplings", Json()), sys.dim());
  sys.input = input_from_json(j.value("input", Json()), sys.dim());
  sys.validate();
  return sys;
}

SeparableReport separable_contraction(const SeparableSystem& sys, const NormSpec& ns, double c, const Box& domain,
                                      const CheckOptions& opts) {
  sys.validate();
  ns.check_dim(sys.dim());
  if ((domain.lo.array() < 0).any()) throw InputError("separable check needs a domain inside the nonnegative orthant");
  const bool mono = sys.flavor == Flavor::monotone;
  SeparableReport r;
  auto base = [&](const char* id) {
    Certificate cert;
    cert.condition = id;
    cert.rate = c;
    cert.decay_rate = true;
    cert.norm = ns;
    cert.domain = domain;
    cert.seed = opts.seed;
    cert.tolerance = opts.tol * std::max(1.0, std::abs(c));
    return cert;
  };
  r.dissipation = base(mono ? condition::separable_incremental : condition::separable_positive);
  auto margin_pair = [sys, ns, c](const Vector& x, const Vector& y) {
    const Vector d = x - y;
    const double nd = weighted_norm(d, ns);
    if (nd == 0.0) return std::numeric_limits<double>::infinity();
    const double lhs = -weak_pairing(-sys.dissipation(x) + sys.dissipation(y), d, ns);
    const double rhs = weak_pairing(sys.interaction(x) - sys.interaction(y), d, ns);
    return (lhs - rhs) / (nd * nd) - c;
  };
  if (mono) {
    for (const auto& ps : ordered_pair_samples(domain, opts))
      r.dissipation.record(margin_pair(ps.x, ps.y), [&] { return Witness{ps.x, ps.y, ps.t, std::nullopt, 0.0}; });
    r.dissipation.reevaluate = [margin_pair](const Witness& w) { return margin_pair(w.x, *w.y); };
  } else {
    const Vector zero = Vector::Zero(sys.dim());
    for (const auto& [x, t] : orthant_point_samples(domain, opts))
      r.dissipation.record(margin_pair(x, zero), [&] { return Witness{x, std::nullopt, t, std::nullopt, 0.0}; });
    r.dissipation.reevaluate = [margin_pair, zero](const Witness& w) { return margin_pair(w.x, zero); };
  }

  r.structure = base(mono ? condition::separable_structure : condition::separable_positive_structure);
  auto margin_structure = [sys, ns, c, mono, sampler = opts.sampler](const Vector& x) {
    const Matrix m = separable_structure_matrix(sys, x).m;
    return -c - (mono ? matrix_measure(m, ns, sampler).value : conic_measure(m, ns, sampler).value);
  };
  bool knots = false;
  for (const auto& [x, t] : orthant_point_samples(domain, opts)) {
    knots = knots || separable_structure_matrix(sys, x).at_knot;
    r.structure.record(margin_structure(x), [&] { return Witness{x, std::nullopt, t, std::nullopt, 0.0}; });
  }
  r.structure.reevaluate = [margin_structure](const Witness& w) { return margin_structure(w.x); };
  if (knots) r.structure.notes.push_back("one-sided derivatives used at piecewise-linear knots");
  if (r.structure.certified() && !r.dissipation.certified())
    r.notes.push_back("structure condition passed but the dissipation inequality failed at a sample");
  return r;
}

}  // namespace ctk
