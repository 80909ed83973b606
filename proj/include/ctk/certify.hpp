#pragma once

#include "ctk/json_io.hpp"
#include "ctk/measures.hpp"
#include "ctk/normcore.hpp"
#include "ctk/odesim.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ctk {

/// Condition identifiers carried by certificates.
namespace condition {
inline constexpr const char* jacobian_conic_measure = "monotone.jacobian_conic_measure";
inline constexpr const char* ordered_one_sided_lipschitz = "monotone.one_sided_lipschitz";
inline constexpr const char* one_sided_lipschitz = "contraction.one_sided_lipschitz";
inline constexpr const char* dini_contraction = "monotone.dini_contraction";
inline constexpr const char* trajectory_contraction = "monotone.trajectory_contraction";
inline constexpr const char* l1_eta_incremental = "monotone.l1_eta";
inline constexpr const char* linf_eta_incremental = "monotone.linf_eta";
inline constexpr const char* l1_eta_positive = "positive.l1_eta";
inline constexpr const char* linf_eta_positive = "positive.linf_eta";
inline constexpr const char* equilibrium_pairing = "positive.equilibrium_pairing";
inline constexpr const char* equilibrium_dini = "positive.equilibrium_dini";
inline constexpr const char* equilibrium_trajectory = "positive.equilibrium_trajectory";
inline constexpr const char* factored_conic = "positive.factored_conic";
}  // namespace condition

enum class Verdict { certified_at_samples, refuted };
std::string to_string(Verdict v);

/// Concrete point at which a condition fails. For trajectory conditions x and
/// y are the initial states and s <= t the offending times.
struct Witness {
  Vector x;
  std::optional<Vector> y;
  double t = 0.0;
  std::optional<double> s;
  double value = 0.0;  // margin at the witness (negative)
};

struct Certificate {
  std::string condition;
  double rate = 0.0;
  /// The rate is a decay rate c (written as "c") rather than a bound b.
  bool decay_rate = false;
  NormSpec norm;
  std::optional<Box> domain;
  std::size_t samples = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  Verdict verdict = Verdict::certified_at_samples;
  std::optional<Witness> witness;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  std::vector<std::string> notes;
  Json evidence = Json::object();
  /// Optional re-evaluation rule for the witness; checks defined outside this
  /// module set it, the built-in conditions are dispatched by id.
  std::function<double(const Witness&)> reevaluate;

  bool certified() const { return verdict == Verdict::certified_at_samples; }
  /// Folds one margin evaluation in; the worst violation below -tolerance
  /// seen so far is kept as the witness.
  void record(double margin, const std::function<Witness()>& make_witness);
};
Json to_json(const Certificate& c);

struct CheckOptions {
  std::uint64_t seed = 1;
  std::size_t samples = 1000;
  double t0 = 0.0;  // time window for sampled (t, x)
  double t1 = 1.0;
  double tol = 1e-7;
  /// Extra base points always included (e.g. the argmax of an earlier sweep).
  std::vector<Vector> focus_points;
  SamplerOptions sampler{1, 200, 30, 4};
};

/// Sweep of mu+(J(t, x)) over a grid plus random points of the domain.
/// `rate` is the estimate b-hat (the max). When `assert_monotone` is set, a
/// non-Metzler Jacobian sample refutes the certificate.
Certificate certify_jacobian_conic(const VectorField& vf, const Box& domain, const NormSpec& ns,
                                   const CheckOptions& opts = {}, bool assert_monotone = true);
/// Same sweep against a claimed rate b: margin b - mu+(J(t, x)).
Certificate check_jacobian_conic(const VectorField& vf, const Box& domain, const NormSpec& ns, double b,
                                 const CheckOptions& opts = {});

/// Normalized margin b - [[f(x) - f(y), x - y]] / ||x - y||^2 over sampled
/// pairs; ordered_only restricts to x >= y.
Certificate check_one_sided_lipschitz(const VectorField& vf, const NormSpec& ns, double b, const Box& domain,
                                      bool ordered_only, const CheckOptions& opts = {});

/// A sampled ordered pair x >= y at time t.
struct PairSample {
  Vector x;
  Vector y;
  double t = 0.0;
};
/// Base points y (focus points, the lower corner, random points) with
/// offsets x = y + s d along axes, the all-ones and a Dirichlet direction and
/// any `extra_dirs(y, t)`, at scales 1e-3, 1e-1, 1 of the room left in the box.
std::vector<PairSample> ordered_pair_samples(
    const Box& domain, const CheckOptions& opts,
    const std::function<std::vector<Vector>(const Vector&, double)>& extra_dirs = {});
/// Points x >= 0 of the domain (which must lie in the orthant): random
/// points, scaled axes and Dirichlet rays from the lower corner.
std::vector<std::pair<Vector, double>> orthant_point_samples(const Box& domain, const CheckOptions& opts);

/// Pairs (x0, y0) in the domain; ordered pairs satisfy x0 >= y0.
std::vector<std::pair<Vector, Vector>> sample_pairs(const Box& domain, std::size_t count, bool ordered,
                                                    std::uint64_t seed);

/// Constants M1 ||v|| <= ||v||_inf <= M2 ||v|| and M = (M2 / M1)^2; M = 1
/// for monotonic norms.
struct NormEquivalence {
  double m1 = 1.0;
  double m2 = 1.0;
  double m = 1.0;
};
NormEquivalence norm_equivalence(const NormSpec& ns, Index n);

struct TrajectoryOptions {
  double horizon = 10.0;
  StepControl step;
  double rel_tol = 1e-5;
  /// Absolute slack for distances at the integrator's accuracy.
  double abs_floor = 1e-8;
  std::uint64_t seed = 0;  // recorded only
};

/// Delta(t) <= M e^{b (t - s)} Delta(s) (1 + rel_tol) for all grid pairs s <= t,
/// Delta the distance between the two flows. M defaults to the norm
/// equivalence constant. Pairs must lie inside `domain`.
Certificate check_trajectory_contraction(const VectorField& vf, const NormSpec& ns, double b, const Box& domain,
                                         const std::vector<std::pair<Vector, Vector>>& pairs,
                                         const TrajectoryOptions& opts = {},
                                         std::optional<double> m = std::nullopt);

/// D+ Delta(t) <= b Delta(t) at accepted steps via one-sided differences,
/// skipping windows that straddle a non-smooth point of the norm.
Certificate check_dini_contraction(const VectorField& vf, const NormSpec& ns, double b,
                                   const std::vector<std::pair<Vector, Vector>>& pairs,
                                   const TrajectoryOptions& opts = {}, double tol = 1e-5);

/// l1 with weights eta. Monotone: eta^T (f(x) - f(y)) <= b eta^T (x - y) for
/// x >= y. Positive: eta^T f(x) <= b eta^T x for x >= 0.
Certificate check_l1_eta(const VectorField& vf, const Vector& eta, double b, bool monotone, const Box& domain,
                         const CheckOptions& opts = {});
/// l_inf with weights eta^{-1}. Monotone: f(y + c eta) - f(y) <= b c eta for
/// c > 0. Positive: f_i(x) <= b x_i on the max-index set of [eta]^{-1} x.
Certificate check_linf_eta(const VectorField& vf, const Vector& eta, double b, bool monotone, const Box& domain,
                           const CheckOptions& opts = {});

/// b ||x||^2 - [[f(t, x), x]] >= 0 (normalized) for x >= 0 in the domain.
/// Requires f(t, 0) = 0; the companion trajectory check is attached as
/// evidence when `companion_horizon` > 0.
Certificate check_equilibrium_contraction(const VectorField& vf, const NormSpec& ns, double b, const Box& domain,
                                          const CheckOptions& opts = {}, double companion_horizon = 5.0);
/// ||phi(t)|| <= e^{b (t - s)} ||phi(s)|| for s <= t along simulated flows.
Certificate check_equilibrium_trajectory(const VectorField& vf, const NormSpec& ns, double b,
                                         const std::vector<Vector>& initial_states,
                                         const TrajectoryOptions& opts = {});
/// D+ ||phi(t)|| <= b ||phi(t)||.
Certificate check_equilibrium_dini(const VectorField& vf, const NormSpec& ns, double b,
                                   const std::vector<Vector>& initial_states, const TrajectoryOptions& opts = {},
                                   double tol = 1e-5);
/// mu+(A(t, x)) <= b over samples x >= 0, A the supplied factorization or the
/// average Jacobian.
Certificate check_factored_conic(const VectorField& vf, const NormSpec& ns, double b, const Box& domain,
                                 const CheckOptions& opts = {});

/// Re-evaluates the witness of a refuted certificate; returns the fresh margin.
double reevaluate_witness(const Certificate& cert, const VectorField& vf,
                          const TrajectoryOptions& traj_opts = {});
/// The fresh margin is a violation and within 2 tol of the recorded one.
bool witness_reproduces(const Certificate& cert, const VectorField& vf, const TrajectoryOptions& traj_opts = {});

/// Throws InputError when ||f(t, 0)|| > tol on sampled t.
void require_origin_equilibrium(const VectorField& vf, double t0, double t1, double tol = 1e-10);

}  // namespace ctk
