#include "ctk/models.hpp"

#include "ctk/pairings.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ctk {

namespace {

const ScalarFn* coupling_at(const ComparisonSpec& s, Index i, Index j) {
  if (s.gamma.empty()) return nullptr;
  const auto& g = s.gamma[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return g ? &*g : nullptr;
}

void check_index(Index i, Index n, const char* what) {
  if (i < 0 || i >= n) throw InputError(std::string(what) + ": index out of range");
}

}  // namespace

void ComparisonSpec::validate() const {
  const Index n = dim();
  if (n == 0) throw InputError("comparison system: no subsystems");
  if (static_cast<Index>(storage_lower.size()) != n || static_cast<Index>(input_gain.size()) != n)
    throw InputError("comparison system: storage and input gains need one entry per subsystem");
  if (!storage_upper.empty() && static_cast<Index>(storage_upper.size()) != n)
    throw InputError("comparison system: storage_upper needs one entry per subsystem");
  if (!gamma.empty()) {
    if (static_cast<Index>(gamma.size()) != n) throw InputError("comparison system: coupling table has wrong size");
    for (Index i = 0; i < n; ++i) {
      if (static_cast<Index>(gamma[static_cast<std::size_t>(i)].size()) != n)
        throw InputError("comparison system: coupling table has wrong size");
      if (coupling_at(*this, i, i)) throw InputError("comparison system: diagonal couplings are not allowed");
    }
  }
  for (const auto& f : storage_lower) {
    if (f.declared() != FnClass::K_inf) throw InputError("comparison system: storage bounds must be class K_inf");
    f.validate();
  }
  for (const auto& f : storage_upper) f.validate();
  for (const auto& f : input_gain) {
    if (f.kind() != ScalarKind::zero && f.declared() == FnClass::nonneg_zero_at_zero)
      throw InputError("comparison system: input gains must be class K");
    if (f.kind() != ScalarKind::zero) f.validate();
  }
  if (mode == Mode::matrosov) {
    if (!couplings.empty() || !bilinear.empty())
      throw InputError("comparison system: signed couplings and bilinear terms need general mode");
    for (const auto& a : alpha) {
      if (a.declared() != FnClass::K_inf) throw InputError("comparison system: dissipation " + a.describe() +
                                                           " must be class K_inf");
      a.validate();
    }
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (const ScalarFn* g = coupling_at(*this, i, j)) {
          if (g->declared() == FnClass::nonneg_zero_at_zero)
            throw InputError("comparison system: gain " + g->describe() + " must be class K");
          g->validate();
        }
  } else {
    for (const auto& a : alpha)
      if (a.value(0.0) != 0.0) throw InputError("comparison system: dissipation terms must vanish at 0");
    for (const auto& c : couplings) {
      check_index(c.i, n, "coupling");
      check_index(c.j, n, "coupling");
      if (!std::isfinite(c.coef)) throw InputError("coupling: non-finite coefficient");
      if (c.fn.value(0.0) != 0.0) throw InputError("coupling: function must vanish at 0");
    }
    for (const auto& b : bilinear) {
      check_index(b.i, n, "bilinear term");
      check_index(b.j, n, "bilinear term");
      check_index(b.k, n, "bilinear term");
      if (!std::isfinite(b.coef)) throw InputError("bilinear term: non-finite coefficient");
    }
    if (drift(Vector::Zero(n)).cwiseAbs().maxCoeff() > 1e-10)
      throw InputError("comparison system: g(0) must vanish");
  }
  input.validate(n, false);
}

Vector ComparisonSpec::dissipation(const Vector& v) const {
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out(i) = alpha[static_cast<std::size_t>(i)].value(v(i));
  return out;
}

Vector ComparisonSpec::interaction(const Vector& v) const {
  const Index n = v.size();
  Vector out = Vector::Zero(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (const ScalarFn* g = coupling_at(*this, i, j)) out(i) += g->value(v(j));
  for (const auto& c : couplings) out(c.i) += c.coef * c.fn.value(v(c.j));
  for (const auto& b : bilinear) out(b.i) += b.coef * v(b.j) * v(b.k);
  return out;
}

Vector ComparisonSpec::drift(const Vector& v) const { return -dissipation(v) + interaction(v); }

Matrix ComparisonSpec::drift_jacobian(const Vector& v) const {
  const Index n = v.size();
  Matrix j = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    j(i, i) -= alpha[static_cast<std::size_t>(i)].derivative(v(i)).value;
    for (Index k = 0; k < n; ++k)
      if (const ScalarFn* g = coupling_at(*this, i, k)) j(i, k) += g->derivative(v(k)).value;
  }
  for (const auto& c : couplings) j(c.i, c.j) += c.coef * c.fn.derivative(v(c.j)).value;
  for (const auto& b : bilinear) {
    j(b.i, b.j) += b.coef * v(b.k);
    j(b.i, b.k) += b.coef * v(b.j);
  }
  return j;
}

Vector ComparisonSpec::gain(const Vector& u) const {
  Vector out(u.size());
  for (Index i = 0; i < u.size(); ++i) out(i) = input_gain[static_cast<std::size_t>(i)].value(std::abs(u(i)));
  return out;
}

VectorField ComparisonSpec::drift_field() const {
  VectorField vf;
  vf.dim = dim();
  const ComparisonSpec spec = *this;
  vf.rhs = [spec](double, const Vector& v) -> Vector { return spec.drift(v); };
  vf.jacobian = [spec](double, const Vector& v) -> Matrix { return spec.drift_jacobian(v); };
  vf.name = "comparison_drift";
  return vf;
}

VectorField ComparisonSpec::field() const {
  VectorField vf = drift_field();
  const ComparisonSpec spec = *this;
  vf.rhs = [spec](double t, const Vector& v) -> Vector { return spec.drift(v) + spec.gain(spec.input.at(t)); };
  vf.name = "comparison";
  return vf;
}

ComparisonSpec comparison_from_json(const Json& j) {
  ComparisonSpec s;
  const std::string mode = j.value("mode", "matrosov");
  if (mode == "matrosov") s.mode = ComparisonSpec::Mode::matrosov;
  else if (mode == "general") s.mode = ComparisonSpec::Mode::general;
  else throw InputError("comparison: unknown mode \"" + mode + "\"");
  if (!j.contains("alpha")) throw InputError("comparison model needs \"alpha\"");
  for (const auto& a : j.at("alpha")) s.alpha.push_back(scalar_fn_from_json(a));
  const Index n = s.dim();
  auto fn_list = [&](const char* key, std::vector<ScalarFn>& out) {
    if (!j.contains(key)) {
      out.assign(static_cast<std::size_t>(n), ScalarFn::linear(1.0));
      return;
    }
    for (const auto& f : j.at(key)) out.push_back(scalar_fn_from_json(f));
  };
  fn_list("storage_lower", s.storage_lower);
  fn_list("input_gain", s.input_gain);
  if (j.contains("storage_upper"))
    for (const auto& f : j.at("storage_upper")) s.storage_upper.push_back(scalar_fn_from_json(f));
  if (s.mode == ComparisonSpec::Mode::matrosov) {
    if (j.contains("bilinear")) throw InputError("comparison: bilinear terms need \"mode\": \"general\"");
    s.gamma.assign(static_cast<std::size_t>(n), std::vector<std::optional<ScalarFn>>(static_cast<std::size_t>(n)));
    for (const auto& e : j.value("couplings", Json::array())) {
      const Index i = e.at("i").get<Index>(), k = e.at("j").get<Index>();
      check_index(i, n, "coupling");
      check_index(k, n, "coupling");
      if (e.contains("coef")) throw InputError("coupling: \"coef\" is only accepted in general mode");
      s.gamma[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = scalar_fn_from_json(e.at("fn"));
    }
  } else {
    for (const auto& e : j.value("couplings", Json::array()))
      s.couplings.push_back(Coupling{e.at("i").get<Index>(), e.at("j").get<Index>(), e.value("coef", 1.0),
                                     scalar_fn_from_json(e.at("fn"))});
    for (const auto& e : j.value("bilinear", Json::array()))
      s.bilinear.push_back(Bilinear{e.at("i").get<Index>(), e.at("j").get<Index>(), e.at("k").get<Index>(),
                                    e.at("coef").get<double>()});
  }
  s.input = input_from_json(j.value("input", Json()), n);
  s.validate();
  return s;
}

Certificate matrosov_certify(const ComparisonSpec& spec, const NormSpec& ns, double c, const Box& domain,
                             const CheckOptions& opts) {
  if (spec.mode != ComparisonSpec::Mode::matrosov)
    throw InputError("matrosov_certify: needs a comparison system with class K gains");
  spec.validate();
  ns.check_dim(spec.dim());
  domain.validate();
  if (domain.dim() != spec.dim()) throw InputError("matrosov_certify: domain dimension mismatch");
  if ((domain.lo.array() < 0).any()) throw InputError("matrosov_certify: domain must lie in the nonnegative orthant");
  Certificate cert;
  cert.condition = condition::comparison_small_gain;
  cert.rate = c;
  cert.decay_rate = true;
  cert.norm = ns;
  cert.domain = domain;
  cert.seed = opts.seed;
  cert.tolerance = opts.tol * std::max(1.0, std::abs(c));
  auto margin = [spec, ns, c](const Vector& v, const Vector& w) {
    const Vector d = v - w;
    const double nd = weighted_norm(d, ns);
    if (nd == 0.0) return std::numeric_limits<double>::infinity();
    const double lhs = -weak_pairing(-spec.dissipation(v) + spec.dissipation(w), d, ns);
    const double rhs = weak_pairing(spec.interaction(v) - spec.interaction(w), d, ns);
    return (lhs - rhs) / (nd * nd) - c;
  };
  for (const auto& ps : ordered_pair_samples(domain, opts))
    cert.record(margin(ps.x, ps.y), [&] { return Witness{ps.x, ps.y, ps.t, std::nullopt, 0.0}; });
  cert.reevaluate = [margin](const Witness& w) { return margin(w.x, *w.y); };
  if (cert.certified()) {
    const auto osl = check_one_sided_lipschitz(spec.drift_field(), ns, -c, domain, true, opts);
    cert.evidence["comparison_drift"] = to_json(osl);
    if (!osl.certified())
      cert.notes.push_back("dissipation inequality held but the drift one-sided Lipschitz check failed");
  }
  return cert;
}

Vector iss_constants(const NormSpec& ns, Index n, std::uint64_t seed) {
  ns.check_dim(n);
  switch (ns.kind()) {
    case WeightKind::identity: return Vector::Ones(n);
    case WeightKind::diagonal: return std::get<DiagonalWeight>(ns.weight()).eta.cwiseInverse();
    case WeightKind::general: break;
  }
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  Vector l = Vector::Zero(n);
  auto visit = [&](const Vector& v) {
    const double nv = weighted_norm(v, ns);
    for (Index i = 0; i < n; ++i) l(i) = std::max(l(i), v(i) / nv);
  };
  for (Index i = 0; i < n; ++i) visit(Vector::Unit(n, i));
  visit(Vector::Constant(n, 1.0 / double(n)));
  for (int k = 0; k < 4000; ++k) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = expo(rng);
    visit(v / v.sum());
  }
  return 10.0 * l;
}

IssReport iss_envelope(const ComparisonSpec& spec, const NormSpec& ns, double c, const Vector& l,
                       const std::vector<double>& times, const std::vector<Vector>& v_trace,
                       const std::vector<Vector>& gain_trace, const std::vector<Vector>& state_norms,
                       const Certificate* cert, const IssOptions& opts) {
  const Index n = spec.dim();
  if (!(c > 0) || !std::isfinite(c)) throw InputError("iss_envelope: rate c must be positive");
  if (l.size() != n) throw InputError("iss_envelope: L has wrong dimension");
  if (times.empty() || v_trace.size() != times.size() || gain_trace.size() != times.size() ||
      state_norms.size() != times.size())
    throw InputError("iss_envelope: traces must share the time grid");
  IssReport r;
  if (opts.require_certificate) {
    if (!cert) throw HypothesisError("iss_envelope: no certificate supplied for rate c");
    if (!cert->certified()) throw HypothesisError("iss_envelope: certificate " + cert->condition + " was refuted");
    const bool pairing_form = cert->condition == condition::interconnection_pairing ||
                              cert->condition == condition::interconnection_average_jacobian;
    const bool rate_form = cert->condition == condition::comparison_small_gain;
    if (!pairing_form && !rate_form)
      throw HypothesisError("iss_envelope: certificate " + cert->condition + " does not cover the comparison system");
    const double certified = pairing_form ? -cert->rate : cert->rate;
    if (c > certified * (1 + 1e-12))
      throw HypothesisError("iss_envelope: rate " + std::to_string(c) + " exceeds the certified rate " +
                            std::to_string(certified));
  } else {
    r.notes.push_back("certificate requirement disabled: falsification run");
  }
  r.c = c;
  r.l = l;
  r.times = times;
  r.state_norms = state_norms;
  const double t0 = times.front();
  const double v0 = weighted_norm(v_trace.front(), ns);
  double gain_max = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    gain_max = std::max(gain_max, weighted_norm(gain_trace[k], ns));
    const double decay = std::exp(-c * (times[k] - t0));
    const double bound = decay * v0 + (1 - decay) / c * gain_max;
    const double vn = weighted_norm(v_trace[k], ns);
    r.v_norms.push_back(vn);
    r.v_bounds.push_back(bound);
    if (bound > 0) r.worst_intermediate_ratio = std::max(r.worst_intermediate_ratio, vn / bound);
    if (vn > bound * (1 + opts.rel_tol) + opts.abs_tol) ++r.intermediate_violations;
    Vector env(n);
    for (Index i = 0; i < n; ++i) env(i) = spec.storage_lower[static_cast<std::size_t>(i)].inverse(l(i) * bound);
    for (Index i = 0; i < n; ++i) {
      const double x = state_norms[k](i);
      if (env(i) > 0 && x / env(i) > r.worst_envelope_ratio) {
        r.worst_envelope_ratio = x / env(i);
        r.worst_time = times[k];
      }
      if (x > env(i) * (1 + opts.rel_tol) + opts.abs_tol) ++r.envelope_violations;
    }
    r.envelopes.push_back(env);
  }
  return r;
}

Json to_json(const IssReport& r) {
  Json env = Json::array(), norms = Json::array();
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    env.push_back(to_json(r.envelopes[k]));
    norms.push_back(to_json(r.state_norms[k]));
  }
  return {{"c", r.c},
          {"L", to_json(r.l)},
          {"passed", r.passed()},
          {"envelope_violations", r.envelope_violations},
          {"intermediate_violations", r.intermediate_violations},
          {"worst_envelope_ratio", r.worst_envelope_ratio},
          {"worst_intermediate_ratio", r.worst_intermediate_ratio},
          {"worst_time", r.worst_time},
          {"notes", r.notes},
          {"times", r.times},
          {"envelopes", env},
          {"state_norms", norms},
          {"v_norms", r.v_norms},
          {"v_bounds", r.v_bounds}};
}

IssPlant comparison_plant(const ComparisonSpec& spec) {
  IssPlant p;
  p.field = spec.field();
  p.storage = [](const Vector& x) -> Vector { return x; };
  p.state_norms = [](const Vector& x) -> Vector { return x.cwiseAbs(); };
  const InputSignal u = spec.input;
  p.input = [u](double t) -> Vector { return u.at(t); };
  return p;
}

void LinearInterconnection::validate() const {
  const Index n = k.size();
  if (n == 0) throw InputError("linear interconnection: empty");
  require_finite(k, "k");
  if (k.minCoeff() <= 0) throw InputError("linear interconnection: k must be positive");
  if (d.rows() != n || d.cols() != n) throw InputError("linear interconnection: D has wrong shape");
  require_finite(d, "D");
  if (d.diagonal().cwiseAbs().maxCoeff() != 0.0) throw InputError("linear interconnection: D must have zero diagonal");
  if (!(eps > 0) || !(eps_u > 0)) throw InputError("linear interconnection: eps and eps_u must be positive");
  input.validate(n, false);
}

ComparisonSpec LinearInterconnection::comparison() const {
  validate();
  const Index n = k.size();
  ComparisonSpec s;
  s.mode = ComparisonSpec::Mode::matrosov;
  s.gamma.assign(static_cast<std::size_t>(n), std::vector<std::optional<ScalarFn>>(static_cast<std::size_t>(n)));
  for (Index i = 0; i < n; ++i) {
    const double slope = 2 * k(i) - eps * d.row(i).cwiseAbs().sum() - eps_u;
    if (!(slope > 0))
      throw HypothesisError("linear interconnection: Young weights leave no dissipation in subsystem " +
                            std::to_string(i));
    s.alpha.push_back(ScalarFn::linear(slope));
    s.storage_lower.push_back(ScalarFn::power(1.0, 2.0));
    s.storage_upper.push_back(ScalarFn::power(1.0, 2.0));
    s.input_gain.push_back(ScalarFn::power(1.0 / eps_u, 2.0));
    for (Index j = 0; j < n; ++j)
      if (j != i && d(i, j) != 0.0)
        s.gamma[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = ScalarFn::linear(std::abs(d(i, j)) / eps);
  }
  s.input = input;
  s.validate();
  return s;
}

IssPlant LinearInterconnection::plant() const {
  validate();
  IssPlant p;
  const Matrix a = -Matrix(k.asDiagonal()) + d;
  const InputSignal u = input;
  p.field = linear_field(a);
  p.field.rhs = [a, u](double t, const Vector& x) -> Vector { return a * x + u.at(t); };
  p.field.name = "linear_interconnection";
  p.storage = [](const Vector& x) -> Vector { return x.cwiseProduct(x); };
  p.state_norms = [](const Vector& x) -> Vector { return x.cwiseAbs(); };
  p.input = [u](double t) -> Vector { return u.at(t); };
  return p;
}

LinearInterconnection linear_interconnection_from_json(const Json& j) {
  if (!j.contains("k") || !j.contains("D")) throw InputError("linear_interconnection model needs \"k\" and \"D\"");
  LinearInterconnection li;
  li.k = vector_from_json(j.at("k"));
  li.d = matrix_from_json(j.at("D"));
  li.eps = j.value("eps", 1.0);
  li.eps_u = j.value("eps_u", 0.1);
  li.input = input_from_json(j.value("input", Json()), li.k.size());
  li.validate();
  return li;
}

IssReport simulate_iss(const ComparisonSpec& spec, const IssPlant& plant, const Vector& x0, double horizon,
                       const NormSpec& ns, double c, const Certificate* cert, const IssOptions& opts,
                       const StepControl& step) {
  if (!(horizon > 0)) throw InputError("simulate_iss: horizon must be positive");
  StepControl ctrl = step;
  ctrl.h_max = std::min(ctrl.h_max, horizon / 2000.0);
  const auto traj = flow(plant.field, 0.0, x0, horizon, ctrl);
  if (!traj.ok()) throw NumericalError("simulate_iss: " + traj.message);
  std::vector<Vector> v, g, s;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    v.push_back(plant.storage(traj.states()[k]));
    g.push_back(spec.gain(plant.input(traj.times()[k])));
    s.push_back(plant.state_norms(traj.states()[k]));
  }
  return iss_envelope(spec, ns, c, iss_constants(ns, spec.dim(), 1), traj.times(), v, g, s, cert, opts);
}

InterconnectionReport interconnection_certify(const ComparisonSpec& spec, const NormSpec& ns, double c,
                                              const Box& domain, const CheckOptions& opts) {
  spec.validate();
  const VectorField vf = spec.drift_field();
  InterconnectionReport r;
  auto rename = [&vf](Certificate cert, const char* id) {
    const Certificate original = cert;
    cert.condition = id;
    cert.reevaluate = [original, vf](const Witness&) { return reevaluate_witness(original, vf); };
    return cert;
  };
  r.pairing = rename(check_equilibrium_contraction(vf, ns, -c, domain, opts, 0.0), condition::interconnection_pairing);
  if (vf.jacobian) {
    r.jacobian = rename(check_factored_conic(vf, ns, -c, domain, opts), condition::interconnection_average_jacobian);
    r.consistent = !(r.jacobian->certified() && !r.pairing.certified());
    if (!r.consistent)
      r.pairing.notes.push_back("average-Jacobian condition passed but the pairing condition failed");
  }
  return r;
}

Json to_json(const InterconnectionReport& r) {
  Json j = {{"pairing", to_json(r.pairing)}, {"consistent", r.consistent}};
  if (r.jacobian) j["average_jacobian"] = to_json(*r.jacobian);
  return j;
}

}  // namespace ctk
