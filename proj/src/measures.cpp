#include "ctk/measures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

namespace ctk {

namespace testing {
namespace {
std::atomic<double> g_mutation{0.0};
}
void set_closed_form_mutation(double offset) { g_mutation.store(offset); }
double closed_form_mutation() { return g_mutation.load(); }
}  // namespace testing

std::string to_string(MeasureMethod m) {
  switch (m) {
    case MeasureMethod::closed_form: return "closed_form";
    case MeasureMethod::similarity: return "similarity";
    case MeasureMethod::similarity_upper_bound: return "similarity_upper_bound";
    case MeasureMethod::wp_sup: return "wp_sup";
    case MeasureMethod::limit_oracle: return "limit_oracle";
  }
  return "unknown";
}

std::string to_string(Bound b) {
  switch (b) {
    case Bound::exact: return "exact";
    case Bound::lower: return "lower";
    case Bound::upper: return "upper";
    case Bound::estimate: return "estimate";
  }
  return "unknown";
}

Json to_json(const MeasureResult& r) {
  Json j = {{"value", r.value},
            {"method", to_string(r.method)},
            {"bound", to_string(r.bound)},
            {"norm", to_json(r.norm)},
            {"samples", r.evidence.samples}};
  if (!r.evidence.h_values.empty()) {
    j["h"] = r.evidence.h_values;
    j["quotients"] = r.evidence.quotients;
    j["nonmonotone_in_h"] = r.evidence.nonmonotone_in_h;
    j["extrapolation_converged"] = r.evidence.extrapolation_converged;
  }
  if (r.maximizer) j["maximizer"] = to_json(*r.maximizer);
  return j;
}

double measure_1(const Matrix& a) {
  require_square(a, "measure_1");
  double best = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < a.cols(); ++j)
    best = std::max(best, a(j, j) + a.col(j).cwiseAbs().sum() - std::abs(a(j, j)));
  return best;
}

double measure_inf(const Matrix& a) {
  require_square(a, "measure_inf");
  double best = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < a.rows(); ++i)
    best = std::max(best, a(i, i) + a.row(i).cwiseAbs().sum() - std::abs(a(i, i)));
  return best;
}

double measure_2(const Matrix& a) {
  require_square(a, "measure_2");
  return max_symmetric_eigenvalue(0.5 * (a + a.transpose()));
}

double conic_measure_1(const Matrix& a) {
  require_square(a, "conic_measure_1");
  double best = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < a.cols(); ++j) {
    double s = a(j, j);
    for (Index i = 0; i < a.rows(); ++i)
      if (i != j) s += positive_part(a(i, j));
    best = std::max(best, s);
  }
  return best + testing::closed_form_mutation();
}

double conic_measure_inf(const Matrix& a) {
  require_square(a, "conic_measure_inf");
  double best = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < a.rows(); ++i) {
    double s = a(i, i);
    for (Index j = 0; j < a.cols(); ++j)
      if (j != i) s += positive_part(a(i, j));
    best = std::max(best, s);
  }
  return best + testing::closed_form_mutation();
}

namespace {

using Objective = std::function<double(const Vector&)>;

struct Candidate {
  double value;
  Vector x;
};

std::vector<Vector> seed_points(Index n, const SamplerOptions& opts, bool orthant,
                                const std::vector<Vector>& warm) {
  std::mt19937_64 rng(opts.seed);
  std::vector<Vector> pts;
  pts.reserve(static_cast<std::size_t>(opts.dirichlet + 2 * n + 1) + warm.size());
  for (const auto& w : warm)
    if (w.size() == n) pts.push_back(w);
  std::exponential_distribution<double> expo(1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < opts.dirichlet; ++k) {
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = orthant ? expo(rng) : gauss(rng);
    pts.push_back(x);
  }
  for (Index i = 0; i < n; ++i) {
    pts.push_back(Vector::Unit(n, i));
    if (!orthant) pts.push_back(-Vector::Unit(n, i));
  }
  pts.push_back(Vector::Ones(n));
  // Vertices of the unit l_inf ball: {0,1}^n on the orthant, {-1,0,1}^n
  // otherwise, while the count stays small.
  if (orthant && n <= 10) {
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
      Vector v(n);
      for (Index i = 0; i < n; ++i) v(i) = (mask >> i) & 1u ? 1.0 : 0.0;
      pts.push_back(v);
    }
  } else if (!orthant && n <= 6) {
    int total = 1;
    for (Index i = 0; i < n; ++i) total *= 3;
    for (int code = 1; code < total; ++code) {
      Vector v(n);
      int c = code;
      for (Index i = 0; i < n; ++i, c /= 3) v(i) = double(c % 3) - 1.0;
      pts.push_back(v);
    }
  }
  return pts;
}

// The same vertices pulled back through the weight, x = W^{-1} v, keeping
// those that stay admissible.
void add_weighted_vertices(std::vector<Vector>& pts, const NormSpec& ns, Index n, bool orthant) {
  if (ns.kind() == WeightKind::identity) return;
  const std::size_t count = pts.size();
  for (std::size_t k = 0; k < count; ++k) {
    const Vector& v = pts[k];
    if (v.cwiseAbs().maxCoeff() != 1.0 || (v.array() != v.array().round()).any()) continue;
    const Vector x = ns.apply_inverse(v);
    if (x.size() == n && (!orthant || x.minCoeff() >= 0.0)) pts.push_back(x);
  }
}

// Coordinate pattern search; the objectives here are homogeneous of degree 0
// so the iterate is renormalized to max|x| = 1 after every sweep.
Candidate hill_climb(const Objective& f, Candidate c, int iters, bool orthant, std::size_t& evals) {
  const Index n = c.x.size();
  double step = 0.25;
  auto normalize = [](Vector& x) {
    const double m = x.cwiseAbs().maxCoeff();
    if (m > 0) x /= m;
  };
  normalize(c.x);
  std::vector<double> trial;
  for (int it = 0; it < iters && step > 1e-14; ++it) {
    bool improved = false;
    for (Index i = 0; i < n; ++i) {
      const double xi = c.x(i);
      trial = {0.5 * xi, 2.0 * xi, 0.0, 1.0, xi + step, xi - step};
      if (!orthant) trial.push_back(-1.0);
      if (xi == 0.0) {
        trial.push_back(1e-8);
        if (!orthant) trial.push_back(-1e-8);
      }
      double best_v = c.value;
      double best_t = xi;
      for (double t : trial) {
        if (orthant && t < 0) t = 0.0;
        if (t == xi) continue;
        c.x(i) = t;
        const double v = f(c.x);
        ++evals;
        if (v > best_v) {
          best_v = v;
          best_t = t;
        }
      }
      c.x(i) = best_t;
      if (best_v > c.value) {
        c.value = best_v;
        improved = true;
      }
    }
    normalize(c.x);
    if (!improved) step *= 0.5;
  }
  return c;
}

// Best value over the seed points followed by hill-climbing from the top
// `starts`. The reduction is a max, so the result does not depend on the
// evaluation order.
Candidate maximize(const Objective& f, const std::vector<Vector>& pts, const SamplerOptions& opts,
                   bool orthant, std::size_t& evals, std::vector<Candidate>* top_out = nullptr) {
  std::vector<Candidate> scored;
  scored.reserve(pts.size());
  for (const auto& x : pts) {
    const double v = f(x);
    ++evals;
    if (std::isfinite(v)) scored.push_back({v, x});
  }
  if (scored.empty()) throw NumericalError("sampler: objective is not finite at any sample");
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, opts.starts)), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
  scored.resize(k);
  Candidate best = scored.front();
  for (auto& c : scored) {
    c = hill_climb(f, c, opts.hill_climb_iters, orthant, evals);
    if (c.value > best.value) best = c;
  }
  if (top_out) *top_out = std::move(scored);
  return best;
}

MeasureResult limit_oracle(const Matrix& a, const NormSpec& ns, const HSchedule& schedule,
                           const SamplerOptions& opts, bool orthant) {
  require_square(a, "limit_oracle");
  require_finite(a, "limit_oracle");
  ns.check_dim(a.rows());
  const Index n = a.rows();
  const double cutoff = 1e-6 * std::max(1.0, induced_norm_inf(a));
  std::vector<double> hs;
  for (double h : schedule.values())
    if (h >= cutoff) hs.push_back(h);
  if (hs.size() < 4) throw InputError("limit_oracle: h schedule leaves fewer than 4 usable steps");

  MeasureResult out;
  out.method = MeasureMethod::limit_oracle;
  out.bound = Bound::estimate;
  out.norm = ns;
  auto seeds = seed_points(n, opts, orthant, {});
  add_weighted_vertices(seeds, ns, n, orthant);
  std::vector<Candidate> carried;
  Vector maximizer = Vector::Ones(n);
  for (double h : hs) {
    const Matrix m = Matrix::Identity(n, n) + h * a;
    Objective f = [&](const Vector& x) {
      const double nx = weighted_norm(x, ns);
      if (nx == 0.0) return -std::numeric_limits<double>::infinity();
      return (weighted_norm(m * x, ns) / nx - 1.0) / h;
    };
    std::vector<Vector> pts = seeds;
    for (const auto& c : carried) pts.push_back(c.x);
    std::vector<Candidate> top;
    const Candidate best = maximize(f, pts, opts, orthant, out.evidence.samples, &top);
    carried = std::move(top);
    out.evidence.h_values.push_back(h);
    out.evidence.quotients.push_back(best.value);
    maximizer = best.x;
  }
  const auto& q = out.evidence.quotients;
  for (std::size_t k = 1; k < q.size(); ++k)
    if (q[k] > q[k - 1] + 1e-9 * std::max(1.0, std::abs(q[k - 1]))) out.evidence.nonmonotone_in_h = true;
  const auto lim = richardson_limit(out.evidence.h_values, q, 4, 1e-4);
  out.value = lim.value;
  out.evidence.extrapolation_converged = lim.converged;
  out.maximizer = maximizer;
  return out;
}

MeasureResult exact(double v, MeasureMethod m, const NormSpec& ns) {
  MeasureResult r;
  r.value = v;
  r.method = m;
  r.bound = Bound::exact;
  r.norm = ns;
  return r;
}

}  // namespace

MeasureResult matrix_measure(const Matrix& a, const NormSpec& ns, const SamplerOptions& sampler) {
  require_square(a, "matrix_measure");
  require_finite(a, "matrix_measure");
  ns.check_dim(a.rows());
  const Exponent p = ns.exponent();
  const MeasureMethod m =
      ns.kind() == WeightKind::general ? MeasureMethod::similarity : MeasureMethod::closed_form;
  if (p.is_one()) return exact(measure_1(ns.similarity(a)), m, ns);
  if (p.is_infinite()) return exact(measure_inf(ns.similarity(a)), m, ns);
  if (p.is_two()) return exact(measure_2(ns.similarity(a)), m, ns);
  return measure_limit_oracle(a, ns, {}, sampler);
}

MeasureResult conic_measure(const Matrix& a, const NormSpec& ns, const SamplerOptions& sampler) {
  require_square(a, "conic_measure");
  require_finite(a, "conic_measure");
  ns.check_dim(a.rows());
  const Exponent p = ns.exponent();
  switch (ns.kind()) {
    case WeightKind::identity:
      if (p.is_one()) return exact(conic_measure_1(a), MeasureMethod::closed_form, ns);
      if (p.is_infinite()) return exact(conic_measure_inf(a), MeasureMethod::closed_form, ns);
      if (is_metzler(a)) return matrix_measure(a, ns, sampler);
      return conic_measure_wp_sup(a, ns, sampler);
    case WeightKind::diagonal: {
      auto r = conic_measure(ns.similarity(a), ns.unweighted(), sampler);
      r.norm = ns;
      if (r.maximizer) r.maximizer = ns.apply_inverse(*r.maximizer);
      return r;
    }
    case WeightKind::general: {
      auto r = conic_measure(ns.similarity(a), ns.unweighted(), sampler);
      r.norm = ns;
      r.method = MeasureMethod::similarity_upper_bound;
      r.bound = r.bound == Bound::exact ? Bound::upper : Bound::estimate;
      r.maximizer.reset();
      return r;
    }
  }
  throw InputError("conic_measure: unknown weight");
}

MeasureResult conic_measure_wp_sup(const Matrix& a, const NormSpec& ns, const SamplerOptions& sampler,
                                   const std::vector<Vector>& warm_starts) {
  require_square(a, "conic_measure_wp_sup");
  require_finite(a, "conic_measure_wp_sup");
  ns.check_dim(a.rows());
  Objective f = [&](const Vector& x) {
    const double nx = weighted_norm(x, ns);
    if (nx == 0.0) return -std::numeric_limits<double>::infinity();
    return weak_pairing(a * x, x, ns) / (nx * nx);
  };
  MeasureResult out;
  out.method = MeasureMethod::wp_sup;
  out.bound = Bound::lower;
  out.norm = ns;
  auto seeds = seed_points(a.rows(), sampler, true, warm_starts);
  add_weighted_vertices(seeds, ns, a.rows(), true);
  const auto best = maximize(f, seeds, sampler, true,
                             out.evidence.samples);
  out.value = best.value;
  out.maximizer = best.x;
  return out;
}

MeasureResult conic_measure_limit_oracle(const Matrix& a, const NormSpec& ns, const HSchedule& schedule,
                                         const SamplerOptions& sampler) {
  return limit_oracle(a, ns, schedule, sampler, true);
}

MeasureResult measure_limit_oracle(const Matrix& a, const NormSpec& ns, const HSchedule& schedule,
                                   const SamplerOptions& sampler) {
  return limit_oracle(a, ns, schedule, sampler, false);
}

MetzlerWeightedMeasures metzler_weighted_measures(const Matrix& a, const Vector& eta) {
  require_square(a, "metzler_weighted_measures");
  require_finite(a, "metzler_weighted_measures");
  if (eta.size() != a.rows()) throw InputError("metzler_weighted_measures: eta has wrong dimension");
  if ((eta.array() <= 0.0).any()) throw InputError("metzler_weighted_measures: eta must be positive");
  if (!is_metzler(a)) throw HypothesisError("metzler_weighted_measures: matrix is not Metzler");
  MetzlerWeightedMeasures out;
  const Vector left = a.transpose() * eta;
  const Vector right = a * eta;
  out.mu1_eta = (left.array() / eta.array()).maxCoeff();
  out.mu_inf_eta_inv = (right.array() / eta.array()).maxCoeff();
  out.mu2_eta = measure_2(eta.asDiagonal() * a * eta.cwiseInverse().asDiagonal());
  const Vector s = eta.cwiseSqrt().cwiseInverse();
  const Matrix e = eta.asDiagonal();
  out.mu2_lmi_literal =
      max_symmetric_eigenvalue(s.asDiagonal() * (e * a + a.transpose() * e) * s.asDiagonal());
  return out;
}

}  // namespace ctk
