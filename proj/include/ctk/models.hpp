#pragma once

#include "ctk/certify.hpp"
#include "ctk/json_io.hpp"
#include "ctk/normcore.hpp"
#include "ctk/odesim.hpp"
#include "ctk/scalar_fn.hpp"

#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace ctk {

/// Time-varying input from a small catalog:
///   constant            u(t) = offset
///   sinusoidal          u(t) = offset + amplitude sin(2 pi t / period + phase)
///   piecewise_constant  u(t) = levels[k] for breakpoints[k-1] <= t < breakpoints[k]
class InputSignal {
 public:
  enum class Kind { constant, sinusoidal, piecewise_constant };

  InputSignal() = default;
  static InputSignal constant(Vector value);
  static InputSignal sinusoidal(Vector offset, Vector amplitude, double period = 2 * std::numbers::pi,
                                double phase = 0.0);
  /// `levels` has one more entry than `breakpoints`.
  static InputSignal piecewise_constant(std::vector<double> breakpoints, std::vector<Vector> levels);

  Kind kind() const { return kind_; }
  Index dim() const { return offset_.size(); }
  bool is_constant() const { return kind_ == Kind::constant; }
  double period() const { return period_; }
  Vector at(double t) const;
  /// Dimension check and, when requested, u(t) >= 0 on a sample grid.
  void validate(Index n, bool nonnegative) const;

  friend Json to_json(const InputSignal& u);

 private:
  Kind kind_ = Kind::constant;
  Vector offset_;
  Vector amplitude_;
  double period_ = 2 * std::numbers::pi;
  double phase_ = 0.0;
  std::vector<double> breakpoints_;
  std::vector<Vector> levels_;
};
/// {"kind": "constant", "value": [...]},
/// {"kind": "sin", "offset": [...], "amplitude": [...], "period": p, "phase": f},
/// {"kind": "piecewise_constant", "times": [...], "values": [[...], ...]};
/// the parameters may also sit under "params". Null gives u = 0.
InputSignal input_from_json(const Json& j, Index n);

/// Perron eigenpair of an irreducible Metzler matrix: M^T v = lambda v and
/// M w = lambda w with v, w > 0 and ||v||_1 = ||w||_1 = 1.
struct PerronPair {
  double lambda = 0.0;
  Vector v;
  Vector w;
  int iterations = 0;
  double residual = 0.0;
};
/// Strong connectivity of the graph of nonzero off-diagonal entries.
bool is_irreducible(const Matrix& m);
PerronPair perron_eigpair(const Matrix& m);

/// eta_i = v_i^{1/p} / w_i^{1/q}, 1/p + 1/q = 1, scaled so that max_i eta_i = 1.
Vector hopfield_weights(const Vector& v, const Vector& w, Exponent p);

/// x' = -Lambda x + T g(x) + I(t) with Lambda > 0 diagonal, T >= 0 and
/// nondecreasing activations g_i(0) = 0.
struct HopfieldNetwork {
  Vector lambda;
  Matrix t;
  std::vector<ScalarFn> activations;
  InputSignal input;

  Index dim() const { return lambda.size(); }
  void validate() const;
  /// Sector bounds taken from the catalog entries.
  Vector gbar() const;
  /// -Lambda + T diag(gbar).
  Matrix perron_matrix() const;
  Vector g(const Vector& x) const;
  /// F_H(x) at time t.
  Vector rhs(double t, const Vector& x) const;
  VectorField field() const;
};
HopfieldNetwork hopfield_from_json(const Json& j);

struct HopfieldOptions {
  std::optional<Box> domain;  // default [-5, 5]^n
  std::size_t pairs = 6;
  double horizon = 10.0;
  CheckOptions check;
};

struct HopfieldCertificate {
  bool contracting = false;  // lambda < 0
  double lambda = 0.0;
  double c = 0.0;
  Vector eta;
  NormSpec norm;
  PerronPair perron;
  std::vector<Certificate> checks;
  std::string message;
  bool certified() const;
};
HopfieldCertificate hopfield_certificate(const HopfieldNetwork& net, Exponent p, const HopfieldOptions& opts = {});
Json to_json(const HopfieldCertificate& h);

struct EquilibriumResult {
  Vector x_star;
  double residual = 0.0;
  int newton_iterations = 0;
  double settle_time = 0.0;
  /// Largest one-step increase of ||x - x*|| and ||F_H(x)|| along the
  /// simulated trajectories.
  double max_increase_distance = 0.0;
  double max_increase_vector_field = 0.0;
  bool lyapunov_nonincreasing = true;
  std::vector<Vector> limits;  // endpoints of the simulated trajectories
};
/// Integrates to t = 50/c, then damped Newton (backtracking by halves) on
/// F_H(x) = 0. Requires a constant input and a contracting network. The
/// Lyapunov traces run over `horizon` (0 means 50/c).
EquilibriumResult hopfield_equilibrium(const HopfieldNetwork& net, const HopfieldCertificate& cert,
                                       const std::vector<Vector>& initial_states = {}, double horizon = 0.0,
                                       double increase_tol = 1e-7);

enum class Flavor { monotone, positive };

/// x_i' = -alpha_i(x_i) + sum_{j != i} gamma_ij(x_j) + u_i(t). In the
/// monotone flavor the couplings are class K; in the positive flavor they are
/// only nonnegative with value 0 at 0.
struct SeparableSystem {
  Flavor flavor = Flavor::monotone;
  std::vector<ScalarFn> alpha;
  std::vector<std::vector<std::optional<ScalarFn>>> gamma;
  InputSignal input;

  Index dim() const { return static_cast<Index>(alpha.size()); }
  void validate() const;
  Vector dissipation(const Vector& x) const;
  Vector interaction(const Vector& x) const;
  VectorField field() const;
};
SeparableSystem separable_from_json(const Json& j);

struct StructureMatrix {
  Matrix m;
  bool at_knot = false;
};
/// -alpha_i'(x_i) on the diagonal, gamma_ij'(x_j) off it.
StructureMatrix separable_structure_matrix(const SeparableSystem& sys, const Vector& x);

namespace condition {
inline constexpr const char* separable_incremental = "separable_monotone.incremental_dissipation";
inline constexpr const char* separable_structure = "separable_monotone.structure_measure";
inline constexpr const char* separable_positive = "separable_positive.dissipation";
inline constexpr const char* separable_positive_structure = "separable_positive.structure_conic_measure";
inline constexpr const char* comparison_small_gain = "comparison.incremental_small_gain";
inline constexpr const char* interconnection_pairing = "interconnection.pairing_dissipation";
inline constexpr const char* interconnection_average_jacobian = "interconnection.average_jacobian";
}  // namespace condition

struct SeparableReport {
  Certificate dissipation;  // pairing form
  Certificate structure;    // measure of the structure matrix <= -c
  std::vector<std::string> notes;
};
SeparableReport separable_contraction(const SeparableSystem& sys, const NormSpec& ns, double c, const Box& domain,
                                      const CheckOptions& opts = {});

/// Coupling coef * fn(v_j) entering row i.
struct Coupling {
  Index i = 0;
  Index j = 0;
  double coef = 1.0;
  ScalarFn fn;
};
/// coef * v_j * v_k entering row i.
struct Bilinear {
  Index i = 0;
  Index j = 0;
  Index k = 0;
  double coef = 0.0;
};

/// Comparison system v' = g(v) + gamma_u(u). In matrosov mode
/// g(v) = -A(v) + Gamma(v) with class K gains; in general mode g is built
/// from dissipation terms, signed couplings and bilinear terms and only
/// g(0) = 0 is required. storage_lower bounds V_i from below by
/// storage_lower_i(|x_i|).
struct ComparisonSpec {
  enum class Mode { matrosov, general };
  Mode mode = Mode::matrosov;
  std::vector<ScalarFn> alpha;
  std::vector<ScalarFn> storage_lower;
  std::vector<ScalarFn> storage_upper;
  std::vector<std::vector<std::optional<ScalarFn>>> gamma;
  std::vector<ScalarFn> input_gain;
  std::vector<Coupling> couplings;
  std::vector<Bilinear> bilinear;
  InputSignal input;

  Index dim() const { return static_cast<Index>(alpha.size()); }
  void validate() const;
  Vector dissipation(const Vector& v) const;
  Vector interaction(const Vector& v) const;  // Gamma(v) or the signed/bilinear part
  Vector drift(const Vector& v) const;        // g(v)
  Matrix drift_jacobian(const Vector& v) const;
  Vector gain(const Vector& u) const;         // gamma_u(u)
  /// v' = g(v) + gamma_u(u(t)).
  VectorField field() const;
  /// v' = g(v).
  VectorField drift_field() const;
};
ComparisonSpec comparison_from_json(const Json& j);

/// Ordered-pair check of
///   -[[-A(v) + A(w), v - w]] >= [[Gamma(v) - Gamma(w), v - w]] + c ||v - w||^2
/// for v >= w >= 0. On success the evidence carries the one-sided Lipschitz
/// certificate of the comparison drift at rate -c.
Certificate matrosov_certify(const ComparisonSpec& spec, const NormSpec& ns, double c, const Box& domain,
                             const CheckOptions& opts = {});

/// L_i with V_i <= L_i ||V|| for V >= 0: 1 for the identity weight, 1/eta_i
/// for a diagonal weight, and ten times a sampled maximum for general R.
Vector iss_constants(const NormSpec& ns, Index n, std::uint64_t seed = 1);

struct IssOptions {
  double rel_tol = 1e-5;
  double abs_tol = 1e-12;
  /// Refuse unless a certificate at rate >= c is supplied. Turned off only for
  /// deliberate falsification runs.
  bool require_certificate = true;
};

struct IssReport {
  double c = 0.0;
  Vector l;
  std::vector<double> times;
  std::vector<Vector> envelopes;
  std::vector<Vector> state_norms;
  std::vector<double> v_norms;
  std::vector<double> v_bounds;
  double worst_envelope_ratio = 0.0;
  double worst_intermediate_ratio = 0.0;
  double worst_time = 0.0;
  std::size_t envelope_violations = 0;
  std::size_t intermediate_violations = 0;
  std::vector<std::string> notes;
  bool passed() const { return envelope_violations == 0 && intermediate_violations == 0; }
};
/// Envelope lower_i^{-1}(L_i e^{-ct} ||V0|| + L_i (1 - e^{-ct})/c max_{s<=t} ||gamma_u(u(s))||)
/// against the state norms, plus the intermediate bound on ||V(t)||.
IssReport iss_envelope(const ComparisonSpec& spec, const NormSpec& ns, double c, const Vector& l,
                       const std::vector<double>& times, const std::vector<Vector>& v_trace,
                       const std::vector<Vector>& gain_trace, const std::vector<Vector>& state_norms,
                       const Certificate* cert, const IssOptions& opts = {});
Json to_json(const IssReport& r);

/// Plant whose storage functions satisfy the comparison inequality.
struct IssPlant {
  VectorField field;
  std::function<Vector(const Vector&)> storage;      // V(x)
  std::function<Vector(const Vector&)> state_norms;  // |x_i| per subsystem
  std::function<Vector(double)> input;               // u(t)
};
/// The comparison system itself as plant, V_i = x_i on the nonnegative orthant.
IssPlant comparison_plant(const ComparisonSpec& spec);

/// x' = -K x + D x + u with V_i = x_i^2. Young's inequality with weights eps
/// (couplings) and eps_u (input) gives the comparison system
///   alpha_i(v) = (2 k_i - eps sum_j |d_ij| - eps_u) v,
///   gamma_ij(v) = |d_ij| v / eps,  gamma_iu(u) = u^2 / eps_u.
struct LinearInterconnection {
  Vector k;
  Matrix d;
  InputSignal input;
  double eps = 1.0;
  double eps_u = 0.1;

  void validate() const;
  ComparisonSpec comparison() const;
  IssPlant plant() const;
};
LinearInterconnection linear_interconnection_from_json(const Json& j);

/// Simulates the plant from x0 and evaluates the envelope.
IssReport simulate_iss(const ComparisonSpec& spec, const IssPlant& plant, const Vector& x0, double horizon,
                       const NormSpec& ns, double c, const Certificate* cert, const IssOptions& opts = {},
                       const StepControl& step = {});

struct InterconnectionReport {
  Certificate pairing;                  // [[g(x), x]] <= -c ||x||^2
  std::optional<Certificate> jacobian;  // mu+(average Jacobian) <= -c
  bool consistent = true;               // jacobian pass implies pairing pass
};
InterconnectionReport interconnection_certify(const ComparisonSpec& spec, const NormSpec& ns, double c,
                                              const Box& domain, const CheckOptions& opts = {});
Json to_json(const InterconnectionReport& r);

}  // namespace ctk
