#include "ctk/certify.hpp"

#include "ctk/pairings.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ctk {

std::string to_string(Verdict v) {
  return v == Verdict::certified_at_samples ? "certified_at_samples" : "refuted";
}

void Certificate::record(double margin, const std::function<Witness()>& make_witness) {
  ++samples;
  if (!(margin < worst_margin)) return;
  worst_margin = margin;
  if (margin < -tolerance) {
    verdict = Verdict::refuted;
    witness = make_witness();
    witness->value = margin;
  }
}

Json to_json(const Certificate& c) {
  Json j = {{"condition_id", c.condition},
            {c.decay_rate ? "c" : "b", c.rate},
            {"norm", to_json(c.norm)},
            {"domain", c.domain ? to_json(*c.domain) : Json()},
            {"n_samples", c.samples},
            {"worst_margin", std::isfinite(c.worst_margin) ? Json(c.worst_margin) : Json()},
            {"verdict", to_string(c.verdict)},
            {"seed", c.seed},
            {"tolerance", c.tolerance}};
  if (c.witness) {
    Json w = {{"x", to_json(c.witness->x)}, {"t", c.witness->t}, {"value", c.witness->value}};
    if (c.witness->y) w["y"] = to_json(*c.witness->y);
    if (c.witness->s) w["s"] = *c.witness->s;
    j["witness"] = w;
  }
  if (!c.notes.empty()) j["notes"] = c.notes;
  if (!c.evidence.empty()) j["evidence"] = c.evidence;
  return j;
}

namespace {

Vector dirichlet(Index n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  Vector d(n);
  for (Index i = 0; i < n; ++i) d(i) = e(rng);
  return d / d.sum();
}

// Largest lambda with y + lambda d inside the box (d >= 0, d != 0).
double room_along(const Box& box, const Vector& y, const Vector& d) {
  double lam = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < d.size(); ++i)
    if (d(i) > 0) lam = std::min(lam, (box.hi(i) - y(i)) / d(i));
  return lam;
}

void require_domain(const Box& domain, Index n) {
  domain.validate();
  if (domain.dim() != n) throw InputError("domain dimension does not match the vector field");
}

Certificate make_cert(const char* id, double b, const NormSpec& ns, std::optional<Box> domain,
                      std::uint64_t seed, double tol) {
  Certificate c;
  c.condition = id;
  c.rate = b;
  c.norm = ns;
  c.domain = std::move(domain);
  c.seed = seed;
  c.tolerance = tol;
  return c;
}

std::vector<Vector> base_points(const Box& domain, const CheckOptions& opts, std::size_t random_count,
                                std::mt19937_64& rng) {
  std::vector<Vector> pts;
  for (const auto& f : opts.focus_points)
    if (f.size() == domain.dim() && domain.contains(f, 1e-12)) pts.push_back(f);
  pts.push_back(domain.lo);
  for (std::size_t k = 0; k < random_count; ++k) pts.push_back(domain.sample(rng));
  return pts;
}

double sample_time(const CheckOptions& opts, std::mt19937_64& rng) {
  if (opts.t1 <= opts.t0) return opts.t0;
  std::uniform_real_distribution<double> u(opts.t0, opts.t1);
  return u(rng);
}

double osl_margin(const VectorField& vf, const NormSpec& ns, double b, double t, const Vector& x,
                  const Vector& y) {
  const Vector d = x - y;
  const double nd = weighted_norm(d, ns);
  if (nd == 0.0) return std::numeric_limits<double>::infinity();
  return b - weak_pairing(vf(t, x) - vf(t, y), d, ns) / (nd * nd);
}

struct ScanResult {
  double margin = std::numeric_limits<double>::infinity();
  double s = 0.0;
  double t = 0.0;
};

// Delta(t) <= m (1 + rel) e^{b (t - s)} Delta(s) + floor for all s <= t, in
// O(N) through the running minimum of log Delta(s) - b s. The margin is the
// slack normalized by max(Delta(0), floor).
ScanResult scan_exponential_bound(const std::vector<double>& t, const std::vector<double>& delta, double b,
                                  double m, double rel, double floor) {
  ScanResult r;
  double best_log = std::numeric_limits<double>::infinity();
  double best_s = t.empty() ? 0.0 : t.front();
  const double scale = delta.empty() ? 1.0 : std::max(delta.front(), floor);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double lg = delta[k] > 0 ? std::log(delta[k]) - b * t[k] : -std::numeric_limits<double>::infinity();
    if (lg < best_log) {
      best_log = lg;
      best_s = t[k];
    }
    const double bound = std::isfinite(best_log) ? m * (1.0 + rel) * std::exp(b * t[k] + best_log) : 0.0;
    const double margin = (bound + floor - delta[k]) / scale;
    if (margin < r.margin) {
      r.margin = margin;
      r.s = best_s;
      r.t = t[k];
    }
  }
  return r;
}

double pair_distance(const Vector& z, const NormSpec& ns) {
  return weighted_norm(top_half(z) - bottom_half(z), ns);
}

std::size_t node_at(const Trajectory& traj, double t) {
  const auto& ts = traj.times();
  auto it = std::lower_bound(ts.begin(), ts.end(), t - 1e-12 * std::max(1.0, std::abs(t)));
  if (it == ts.end()) return ts.size() - 1;
  return static_cast<std::size_t>(it - ts.begin());
}

// Forward Dini margin (b Delta - D+Delta) / Delta at node k of a trajectory of
// z, with Delta = ||dist(z)||; nullopt when the window is not smooth or
// Delta is below `min_delta`.
std::optional<double> dini_margin(const Trajectory& traj, std::size_t k, const NormSpec& ns, double b,
                                  bool paired, double min_delta) {
  auto diff = [paired](const Vector& z) -> Vector { return paired ? Vector(top_half(z) - bottom_half(z)) : z; };
  const Vector d0 = diff(traj.states()[k]);
  const double delta = weighted_norm(d0, ns);
  if (delta <= min_delta) return std::nullopt;
  const auto fd = forward_dini(traj, k, [&](const Vector& z) { return weighted_norm(diff(z), ns); });
  const double tk = traj.times()[k];
  if (!forward_window_smooth(ns.apply(d0), ns.apply(diff(traj.state_at(tk + fd.offset))),
                             ns.apply(diff(traj.state_at(tk + 2 * fd.offset))),
                             ns.apply(diff(traj.derivatives()[k])), fd.offset, ns.exponent()))
    return std::nullopt;
  return (b * delta - fd.value) / delta;
}

double l1_margin(const VectorField& vf, const Vector& eta, double b, double t, const Vector& x,
                 const std::optional<Vector>& y) {
  const Vector d = y ? Vector(x - *y) : x;
  const double s = eta.dot(d);
  if (s <= 0) return std::numeric_limits<double>::infinity();
  const Vector df = y ? Vector(vf(t, x) - vf(t, *y)) : vf(t, x);
  return (b * s - eta.dot(df)) / s;
}

double linf_margin(const VectorField& vf, const Vector& eta, double b, double t, const Vector& x,
                   const std::optional<Vector>& y) {
  double worst = std::numeric_limits<double>::infinity();
  if (y) {
    const Vector d = x - *y;
    const double c = (d.array() / eta.array()).maxCoeff();
    if (c <= 0) return worst;
    const Vector df = vf(t, x) - vf(t, *y);
    for (Index i = 0; i < x.size(); ++i) worst = std::min(worst, (b * c * eta(i) - df(i)) / (c * eta(i)));
    return worst;
  }
  const Vector scaled = x.array() / eta.array();
  if (scaled.cwiseAbs().maxCoeff() == 0.0) return worst;
  const Vector f = vf(t, x);
  for (Index i : max_index_set(scaled)) worst = std::min(worst, (b * x(i) - f(i)) / x(i));
  return worst;
}

double equilibrium_margin(const VectorField& vf, const NormSpec& ns, double b, double t, const Vector& x) {
  const double nx = weighted_norm(x, ns);
  if (nx == 0.0) return std::numeric_limits<double>::infinity();
  return b - weak_pairing(vf(t, x), x, ns) / (nx * nx);
}

double min_offdiagonal(const Matrix& a) {
  double m = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (i != j) m = std::min(m, a(i, j));
  return a.rows() > 1 ? m : 0.0;
}

// Grid plus random points of the domain.
std::vector<Vector> sweep_points(const Box& domain, const CheckOptions& opts, std::mt19937_64& rng) {
  const Index n = domain.dim();
  std::vector<Vector> pts;
  for (const auto& f : opts.focus_points)
    if (f.size() == n) pts.push_back(f);
  int g = 2;
  while (std::pow(g + 1, double(n)) <= double(opts.samples) / 2 && g < 9) ++g;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  while (true) {
    Vector x(n);
    for (Index i = 0; i < n; ++i)
      x(i) = domain.lo(i) + (domain.hi(i) - domain.lo(i)) * idx[static_cast<std::size_t>(i)] / double(g - 1);
    pts.push_back(x);
    Index k = 0;
    while (k < n && ++idx[static_cast<std::size_t>(k)] == g) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == n) break;
  }
  while (pts.size() < opts.samples) pts.push_back(domain.sample(rng));
  return pts;
}

Certificate jacobian_sweep(const VectorField& vf, const Box& domain, const NormSpec& ns, std::optional<double> b,
                           const CheckOptions& opts, bool assert_monotone) {
  require_domain(domain, vf.dim);
  ns.check_dim(vf.dim);
  auto cert = make_cert(condition::jacobian_conic_measure, b.value_or(0.0), ns, domain, opts.seed,
                        opts.tol * std::max(1.0, std::abs(b.value_or(0.0))));
  std::mt19937_64 rng(opts.seed);
  double best = -std::numeric_limits<double>::infinity();
  Vector argmax = domain.lo;
  double argmax_t = opts.t0;
  bool inexact = false;
  std::size_t points = 0;
  for (const auto& x : sweep_points(domain, opts, rng)) {
    ++points;
    const double t = sample_time(opts, rng);
    const Matrix j = vf.jacobian_at(t, x);
    const double jscale = std::max(1.0, j.cwiseAbs().maxCoeff());
    if (assert_monotone && !is_metzler(j, 1e-9 * jscale)) {
      cert.evidence["mode"] = "metzler_precheck";
      cert.record(min_offdiagonal(j), [&] { return Witness{x, std::nullopt, t, std::nullopt, 0.0}; });
      continue;
    }
    const auto mu = conic_measure(j, ns, opts.sampler);
    if (mu.bound != Bound::exact) inexact = true;
    if (mu.value > best) {
      best = mu.value;
      argmax = x;
      argmax_t = t;
    }
    if (b) cert.record(*b - mu.value, [&] { return Witness{x, std::nullopt, t, std::nullopt, 0.0}; });
  }
  if (!b) {
    cert.samples = points;
    cert.rate = best;
    cert.worst_margin = 0.0;
    cert.tolerance = opts.tol * std::max(1.0, std::abs(best));
  }
  cert.evidence["max_conic_measure"] = best;
  cert.evidence["argmax"] = to_json(argmax);
  cert.evidence["argmax_t"] = argmax_t;
  if (inexact) cert.notes.push_back("some conic measures are bounds or estimates, not exact values");
  return cert;
}

}  // namespace

std::vector<PairSample> ordered_pair_samples(
    const Box& domain, const CheckOptions& opts,
    const std::function<std::vector<Vector>(const Vector&, double)>& extra_dirs) {
  require_domain(domain, domain.dim());
  const Index n = domain.dim();
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  const double scales[] = {1e-3, 1e-1, 1.0};
  const std::size_t per_base = 3 * static_cast<std::size_t>(n + 3);
  std::vector<PairSample> out;
  for (const auto& y : base_points(domain, opts, std::max<std::size_t>(1, opts.samples / per_base), rng)) {
    const double t = sample_time(opts, rng);
    std::vector<Vector> dirs;
    for (Index i = 0; i < n; ++i) dirs.push_back(Vector::Unit(n, i));
    dirs.push_back(Vector::Ones(n));
    dirs.push_back(dirichlet(n, rng));
    if (extra_dirs)
      for (auto& d : extra_dirs(y, t)) dirs.push_back(std::move(d));
    for (const auto& d : dirs) {
      if (d.size() != n || d.maxCoeff() <= 0 || d.minCoeff() < 0) continue;
      const double room = room_along(domain, y, d);
      if (!(room > 0) || !std::isfinite(room)) continue;
      for (double s : scales) out.push_back({y + s * u(rng) * room * d, y, t});
    }
  }
  return out;
}

std::vector<std::pair<Vector, double>> orthant_point_samples(const Box& domain, const CheckOptions& opts) {
  require_domain(domain, domain.dim());
  if ((domain.lo.array() < 0).any()) throw InputError("domain must lie inside the nonnegative orthant");
  const Index n = domain.dim();
  std::mt19937_64 rng(opts.seed);
  auto pts = base_points(domain, opts, opts.samples, rng);
  const double scales[] = {1e-3, 1e-1, 1.0};
  for (Index i = 0; i < n; ++i)
    for (double s : scales) pts.push_back(domain.lo + s * (domain.hi(i) - domain.lo(i)) * Vector::Unit(n, i));
  for (int k = 0; k < 30; ++k) {
    const Vector d = dirichlet(n, rng);
    const double room = room_along(domain, domain.lo, d);
    if (room > 0 && std::isfinite(room)) pts.push_back(domain.lo + scales[k % 3] * room * d);
  }
  std::vector<std::pair<Vector, double>> out;
  for (auto& x : pts) {
    const double t = sample_time(opts, rng);
    out.emplace_back(std::move(x), t);
  }
  return out;
}

Certificate certify_jacobian_conic(const VectorField& vf, const Box& domain, const NormSpec& ns,
                                   const CheckOptions& opts, bool assert_monotone) {
  return jacobian_sweep(vf, domain, ns, std::nullopt, opts, assert_monotone);
}

Certificate check_jacobian_conic(const VectorField& vf, const Box& domain, const NormSpec& ns, double b,
                                 const CheckOptions& opts) {
  return jacobian_sweep(vf, domain, ns, b, opts, false);
}

Certificate check_one_sided_lipschitz(const VectorField& vf, const NormSpec& ns, double b, const Box& domain,
                                      bool ordered_only, const CheckOptions& opts) {
  require_domain(domain, vf.dim);
  ns.check_dim(vf.dim);
  const Index n = vf.dim;
  auto cert = make_cert(ordered_only ? condition::ordered_one_sided_lipschitz : condition::one_sided_lipschitz, b,
                        ns, domain, opts.seed, opts.tol * std::max(1.0, std::abs(b)));
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  const double scales[] = {1e-3, 1e-1, 1.0};
  auto eval = [&](const Vector& x, const Vector& y, double t) {
    cert.record(osl_margin(vf, ns, b, t, x, y), [&] { return Witness{x, y, t, std::nullopt, 0.0}; });
  };
  if (ordered_only) {
    auto dirs = [&](const Vector& y, double t) {
      std::vector<Vector> out;
      if (ns.kind() == WeightKind::diagonal) out.push_back(std::get<DiagonalWeight>(ns.weight()).eta.cwiseInverse());
      // Direction where the conic measure of the local Jacobian is attained.
      auto sampler = opts.sampler;
      sampler.seed = opts.seed ^ std::hash<double>{}(y.sum() + t);
      const auto sup = conic_measure_wp_sup(vf.jacobian_at(t, y), ns, sampler);
      if (sup.maximizer) out.push_back(*sup.maximizer);
      return out;
    };
    for (const auto& ps : ordered_pair_samples(domain, opts, dirs)) eval(ps.x, ps.y, ps.t);
  } else {
    std::normal_distribution<double> g(0.0, 1.0);
    for (std::size_t k = 0; k < opts.samples; ++k) {
      const double t = sample_time(opts, rng);
      const Vector y = domain.sample(rng);
      Vector x;
      if (k % 2 == 0) {
        x = domain.sample(rng);
      } else {
        Vector d(n);
        for (Index i = 0; i < n; ++i) d(i) = g(rng);
        const double s = scales[(k / 2) % 3] * domain.width().maxCoeff();
        x = (y + s * d / d.cwiseAbs().maxCoeff()).cwiseMax(domain.lo).cwiseMin(domain.hi);
      }
      eval(x, y, t);
    }
  }
  return cert;
}

std::vector<std::pair<Vector, Vector>> sample_pairs(const Box& domain, std::size_t count, bool ordered,
                                                    std::uint64_t seed) {
  domain.validate();
  std::mt19937_64 rng(seed);
  std::vector<std::pair<Vector, Vector>> pairs;
  while (pairs.size() < count) {
    Vector a = domain.sample(rng);
    Vector b = domain.sample(rng);
    if (ordered) {
      Vector hi = a.cwiseMax(b);
      Vector lo = a.cwiseMin(b);
      a = hi;
      b = lo;
    }
    if ((a - b).cwiseAbs().maxCoeff() > 0) pairs.emplace_back(a, b);
  }
  return pairs;
}

NormEquivalence norm_equivalence(const NormSpec& ns, Index n) {
  ns.check_dim(n);
  NormEquivalence e;
  if (ns.is_monotonic()) return e;
  const auto& g = std::get<GeneralWeight>(ns.weight());
  const Exponent p = ns.exponent();
  const Exponent q = conjugate_exponent(p);
  // ||v||_inf <= M2 ||R v||_p with M2 the largest dual norm of a row of R^{-1}.
  e.m2 = 0.0;
  for (Index i = 0; i < n; ++i) e.m2 = std::max(e.m2, lp_norm(g.r_inv.row(i).transpose(), q));
  // M1 = 1 / max_{||v||_inf = 1} ||R v||_p, attained at a sign vertex.
  double top = 0.0;
  if (n <= 16) {
    Vector v(n);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      for (Index i = 0; i < n; ++i) v(i) = (mask >> i) & 1 ? 1.0 : -1.0;
      top = std::max(top, lp_norm(g.r * v, p));
    }
  } else {
    std::mt19937_64 rng(7);
    Vector v(n);
    for (int k = 0; k < 100000; ++k) {
      for (Index i = 0; i < n; ++i) v(i) = (rng() & 1) ? 1.0 : -1.0;
      top = std::max(top, lp_norm(g.r * v, p));
    }
  }
  e.m1 = 1.0 / top;
  e.m = (e.m2 / e.m1) * (e.m2 / e.m1);
  return e;
}

Certificate check_trajectory_contraction(const VectorField& vf, const NormSpec& ns, double b, const Box& domain,
                                         const std::vector<std::pair<Vector, Vector>>& pairs,
                                         const TrajectoryOptions& opts, std::optional<double> m) {
  require_domain(domain, vf.dim);
  ns.check_dim(vf.dim);
  const double mm = m.value_or(norm_equivalence(ns, vf.dim).m);
  auto cert = make_cert(condition::trajectory_contraction, b, ns, domain, opts.seed, 0.0);
  cert.evidence = {{"M", mm}, {"rel_tol", opts.rel_tol}, {"abs_floor", opts.abs_floor},
                   {"horizon", opts.horizon}, {"pairs", pairs.size()}};
  const auto pair_field = stack_pair(vf);
  std::size_t points = 0;
  for (const auto& [x0, y0] : pairs) {
    if (!domain.contains(x0, 1e-12) || !domain.contains(y0, 1e-12))
      throw InputError("trajectory check: initial pair lies outside the domain box");
    const auto traj = flow(pair_field, 0.0, stack(x0, y0), opts.horizon, opts.step);
    if (!traj.ok()) throw NumericalError("trajectory check: " + traj.message);
    std::vector<double> delta;
    delta.reserve(traj.size());
    for (const auto& z : traj.states()) delta.push_back(pair_distance(z, ns));
    points += traj.size();
    const auto scan = scan_exponential_bound(traj.times(), delta, b, mm, opts.rel_tol, opts.abs_floor);
    cert.record(scan.margin, [&] { return Witness{x0, y0, scan.t, scan.s, 0.0}; });
  }
  cert.samples = pairs.size();
  cert.evidence["grid_points"] = points;
  if (mm != 1.0) cert.notes.push_back("non-monotonic norm: overshoot constant M from norm equivalence");
  return cert;
}

Certificate check_dini_contraction(const VectorField& vf, const NormSpec& ns, double b,
                                   const std::vector<std::pair<Vector, Vector>>& pairs,
                                   const TrajectoryOptions& opts, double tol) {
  ns.check_dim(vf.dim);
  auto cert = make_cert(condition::dini_contraction, b, ns, std::nullopt, opts.seed, tol * std::max(1.0, std::abs(b)));
  const double min_delta = 100.0 * opts.abs_floor;
  cert.evidence = {{"horizon", opts.horizon}, {"min_distance", min_delta}, {"pairs", pairs.size()}};
  const auto pair_field = stack_pair(vf);
  std::size_t excluded = 0;
  for (const auto& [x0, y0] : pairs) {
    const auto traj = flow(pair_field, 0.0, stack(x0, y0), opts.horizon, opts.step);
    if (!traj.ok()) throw NumericalError("Dini check: " + traj.message);
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
      const auto margin = dini_margin(traj, k, ns, b, true, min_delta);
      if (!margin) {
        ++excluded;
        continue;
      }
      const double t = traj.times()[k];
      cert.record(*margin, [&] { return Witness{x0, y0, t, std::nullopt, 0.0}; });
    }
  }
  cert.evidence["excluded_steps"] = excluded;
  return cert;
}

Certificate check_l1_eta(const VectorField& vf, const Vector& eta, double b, bool monotone, const Box& domain,
                         const CheckOptions& opts) {
  require_domain(domain, vf.dim);
  const auto ns = NormSpec::diagonal(Exponent::finite(1.0), eta);
  auto cert = make_cert(monotone ? condition::l1_eta_incremental : condition::l1_eta_positive, b, ns, domain,
                        opts.seed, opts.tol * std::max(1.0, std::abs(b)));
  cert.evidence = {{"eta", to_json(eta)}};
  if (!monotone && (domain.lo.array() < 0).any())
    throw InputError("positive-mode check needs a domain inside the nonnegative orthant");
  for (const auto& ps : ordered_pair_samples(domain, opts)) {
    // Positive mode: x itself is the sample, measured from the origin.
    const std::optional<Vector> yy = monotone ? std::optional<Vector>(ps.y) : std::nullopt;
    cert.record(l1_margin(vf, eta, b, ps.t, ps.x, yy), [&] { return Witness{ps.x, yy, ps.t, std::nullopt, 0.0}; });
  }
  return cert;
}

Certificate check_linf_eta(const VectorField& vf, const Vector& eta, double b, bool monotone, const Box& domain,
                           const CheckOptions& opts) {
  require_domain(domain, vf.dim);
  const auto ns = NormSpec::diagonal(Exponent::infinity(), eta.cwiseInverse());
  auto cert = make_cert(monotone ? condition::linf_eta_incremental : condition::linf_eta_positive, b, ns, domain,
                        opts.seed, opts.tol * std::max(1.0, std::abs(b)));
  cert.evidence = {{"eta", to_json(eta)}};
  const Index n = vf.dim;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  const double scales[] = {1e-3, 1e-1, 1.0};
  if (!monotone && (domain.lo.array() < 0).any())
    throw InputError("positive-mode check needs a domain inside the nonnegative orthant");
  if (monotone) {
    for (const auto& y : base_points(domain, opts, std::max<std::size_t>(1, opts.samples / 3), rng)) {
      const double t = sample_time(opts, rng);
      const double room = room_along(domain, y, eta);
      if (!(room > 0) || !std::isfinite(room)) continue;
      for (double s : scales) {
        const Vector x = y + s * u(rng) * room * eta;
        cert.record(linf_margin(vf, eta, b, t, x, y), [&] { return Witness{x, y, t, std::nullopt, 0.0}; });
      }
    }
  } else {
    auto pts = base_points(domain, opts, opts.samples, rng);
    // Points on the eta ray tie every index; single axes isolate one.
    const double ray = room_along(domain, domain.lo, eta);
    if (ray > 0 && std::isfinite(ray))
      for (double s : scales) pts.push_back(domain.lo + s * ray * eta);
    for (Index i = 0; i < n; ++i) {
      const Vector d = Vector::Unit(n, i);
      const double room = room_along(domain, domain.lo, d);
      if (room > 0 && std::isfinite(room)) pts.push_back(domain.lo + 0.5 * room * d);
    }
    for (const auto& x : pts) {
      const double t = sample_time(opts, rng);
      cert.record(linf_margin(vf, eta, b, t, x, std::nullopt), [&] { return Witness{x, std::nullopt, t, std::nullopt, 0.0}; });
    }
  }
  return cert;
}

void require_origin_equilibrium(const VectorField& vf, double t0, double t1, double tol) {
  const Vector zero = Vector::Zero(vf.dim);
  for (int k = 0; k <= 10; ++k) {
    const double t = t0 + (t1 - t0) * k / 10.0;
    if (vf(t, zero).cwiseAbs().maxCoeff() > tol)
      throw InputError("the origin is not an equilibrium; shift coordinates to the equilibrium first");
  }
}

Certificate check_equilibrium_contraction(const VectorField& vf, const NormSpec& ns, double b, const Box& domain,
                                          const CheckOptions& opts, double companion_horizon) {
  require_domain(domain, vf.dim);
  ns.check_dim(vf.dim);
  if ((domain.lo.array() < 0).any())
    throw InputError("equilibrium check needs a domain inside the nonnegative orthant");
  require_origin_equilibrium(vf, opts.t0, opts.t1);
  auto cert = make_cert(condition::equilibrium_pairing, b, ns, domain, opts.seed, opts.tol * std::max(1.0, std::abs(b)));
  for (const auto& [x, t] : orthant_point_samples(domain, opts))
    cert.record(equilibrium_margin(vf, ns, b, t, x), [&] { return Witness{x, std::nullopt, t, std::nullopt, 0.0}; });
  if (companion_horizon > 0) {
    std::mt19937_64 rng(opts.seed + 1);
    std::vector<Vector> starts;
    for (int k = 0; k < 5; ++k) starts.push_back(domain.sample(rng));
    TrajectoryOptions topts;
    topts.horizon = companion_horizon;
    const auto companion = check_equilibrium_trajectory(vf, ns, b, starts, topts);
    cert.evidence["companion"] = to_json(companion);
    if (companion.certified() != cert.certified())
      cert.notes.push_back("pairing condition and trajectory bound disagree at the sampled points");
  }
  return cert;
}

Certificate check_equilibrium_trajectory(const VectorField& vf, const NormSpec& ns, double b,
                                         const std::vector<Vector>& initial_states, const TrajectoryOptions& opts) {
  ns.check_dim(vf.dim);
  auto cert = make_cert(condition::equilibrium_trajectory, b, ns, std::nullopt, opts.seed, 0.0);
  cert.evidence = {{"M", 1.0}, {"rel_tol", opts.rel_tol}, {"abs_floor", opts.abs_floor}, {"horizon", opts.horizon}};
  for (const auto& x0 : initial_states) {
    const auto traj = flow(vf, 0.0, x0, opts.horizon, opts.step);
    if (!traj.ok()) throw NumericalError("equilibrium trajectory check: " + traj.message);
    std::vector<double> nrm;
    for (const auto& x : traj.states()) nrm.push_back(weighted_norm(x, ns));
    const auto scan = scan_exponential_bound(traj.times(), nrm, b, 1.0, opts.rel_tol, opts.abs_floor);
    cert.record(scan.margin, [&] { return Witness{x0, std::nullopt, scan.t, scan.s, 0.0}; });
  }
  return cert;
}

Certificate check_equilibrium_dini(const VectorField& vf, const NormSpec& ns, double b,
                                   const std::vector<Vector>& initial_states, const TrajectoryOptions& opts,
                                   double tol) {
  ns.check_dim(vf.dim);
  auto cert = make_cert(condition::equilibrium_dini, b, ns, std::nullopt, opts.seed, tol * std::max(1.0, std::abs(b)));
  const double min_delta = 100.0 * opts.abs_floor;
  cert.evidence = {{"horizon", opts.horizon}, {"min_distance", min_delta}};
  for (const auto& x0 : initial_states) {
    const auto traj = flow(vf, 0.0, x0, opts.horizon, opts.step);
    if (!traj.ok()) throw NumericalError("equilibrium Dini check: " + traj.message);
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
      const auto margin = dini_margin(traj, k, ns, b, false, min_delta);
      if (!margin) continue;
      const double t = traj.times()[k];
      cert.record(*margin, [&] { return Witness{x0, std::nullopt, t, std::nullopt, 0.0}; });
    }
  }
  return cert;
}

Certificate check_factored_conic(const VectorField& vf, const NormSpec& ns, double b, const Box& domain,
                                 const CheckOptions& opts) {
  require_domain(domain, vf.dim);
  ns.check_dim(vf.dim);
  if ((domain.lo.array() < 0).any())
    throw InputError("factored check needs a domain inside the nonnegative orthant");
  const double residual = factorization_residual(vf, domain, opts.t0, opts.t1, 50, opts.seed);
  if (residual > 1e-8)
    throw HypothesisError("factorization does not reproduce f(t,x) = A(t,x) x (residual " +
                          std::to_string(residual) + ")");
  auto cert = make_cert(condition::factored_conic, b, ns, domain, opts.seed, opts.tol * std::max(1.0, std::abs(b)));
  cert.evidence = {{"factorization", vf.factorization ? "supplied" : "average_jacobian"},
                   {"factorization_residual", residual}};
  std::mt19937_64 rng(opts.seed);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& x : sweep_points(domain, opts, rng)) {
    const double t = sample_time(opts, rng);
    const double mu = conic_measure(vf.factor_at(t, x), ns, opts.sampler).value;
    best = std::max(best, mu);
    cert.record(b - mu, [&] { return Witness{x, std::nullopt, t, std::nullopt, 0.0}; });
  }
  cert.evidence["max_conic_measure"] = best;
  return cert;
}

double reevaluate_witness(const Certificate& cert, const VectorField& vf, const TrajectoryOptions& traj_opts) {
  if (!cert.witness) throw InputError("certificate carries no witness");
  const auto& w = *cert.witness;
  if (cert.reevaluate) return cert.reevaluate(w);
  const std::string& id = cert.condition;
  const double b = cert.rate;
  auto eta_of = [&] { return vector_from_json(cert.evidence.at("eta")); };
  if (id == condition::jacobian_conic_measure) {
    const Matrix j = vf.jacobian_at(w.t, w.x);
    if (cert.evidence.value("mode", "") == "metzler_precheck" && !is_metzler(j)) return min_offdiagonal(j);
    return b - conic_measure(j, cert.norm).value;
  }
  if (id == condition::ordered_one_sided_lipschitz || id == condition::one_sided_lipschitz)
    return osl_margin(vf, cert.norm, b, w.t, w.x, *w.y);
  if (id == condition::l1_eta_incremental || id == condition::l1_eta_positive)
    return l1_margin(vf, eta_of(), b, w.t, w.x, w.y);
  if (id == condition::linf_eta_incremental || id == condition::linf_eta_positive)
    return linf_margin(vf, eta_of(), b, w.t, w.x, w.y);
  if (id == condition::equilibrium_pairing) return equilibrium_margin(vf, cert.norm, b, w.t, w.x);
  if (id == condition::factored_conic) return b - conic_measure(vf.factor_at(w.t, w.x), cert.norm).value;
  TrajectoryOptions opts = traj_opts;
  opts.horizon = cert.evidence.value("horizon", opts.horizon);
  if (id == condition::trajectory_contraction || id == condition::equilibrium_trajectory) {
    const bool paired = id == condition::trajectory_contraction;
    const auto traj = paired ? flow(stack_pair(vf), 0.0, stack(w.x, *w.y), opts.horizon, opts.step)
                             : flow(vf, 0.0, w.x, opts.horizon, opts.step);
    auto dist = [&](std::size_t k) {
      return paired ? pair_distance(traj.states()[k], cert.norm) : weighted_norm(traj.states()[k], cert.norm);
    };
    const double m = cert.evidence.at("M").get<double>();
    const double rel = cert.evidence.at("rel_tol").get<double>();
    const double floor = cert.evidence.at("abs_floor").get<double>();
    const double scale = std::max(dist(0), floor);
    const double ds = dist(node_at(traj, *w.s));
    const double dt = dist(node_at(traj, w.t));
    return (m * (1.0 + rel) * std::exp(b * (w.t - *w.s)) * ds + floor - dt) / scale;
  }
  if (id == condition::dini_contraction || id == condition::equilibrium_dini) {
    const bool paired = id == condition::dini_contraction;
    const auto traj = paired ? flow(stack_pair(vf), 0.0, stack(w.x, *w.y), opts.horizon, opts.step)
                             : flow(vf, 0.0, w.x, opts.horizon, opts.step);
    const auto margin = dini_margin(traj, node_at(traj, w.t), cert.norm, b, paired, 0.0);
    if (!margin) throw NumericalError("witness window is no longer smooth");
    return *margin;
  }
  throw InputError("no re-evaluation rule for condition " + id);
}

bool witness_reproduces(const Certificate& cert, const VectorField& vf, const TrajectoryOptions& traj_opts) {
  if (!cert.witness) return false;
  const double fresh = reevaluate_witness(cert, vf, traj_opts);
  return fresh < 0.0 && std::abs(fresh - cert.witness->value) <= 2.0 * std::max(cert.tolerance, 1e-12);
}

}  // namespace ctk
