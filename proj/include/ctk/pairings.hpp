#pragma once

#include "ctk/json_io.hpp"
#include "ctk/normcore.hpp"
#include "ctk/trajectory.hpp"

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ctk {

inline constexpr double kTieTolerance = 1e-9;

/// Positions attaining max_i |x_i| up to a relative tie tolerance:
/// |x_i| >= (1 - tie_tol) * max|x|. Throws for the zero vector.
std::vector<Index> max_index_set(const Vector& x, double tie_tol = kTieTolerance);

/// Weak pairing [[x, y]] compatible with the weighted l_p norm of `ns`:
///
///   p in (1,inf):  ||y||^{2-p} (Ry o |Ry|^{p-2})^T Rx
///   p = 1:         ||Ry||_1 sign(Ry)^T Rx
///   p = inf:       max_{i in I(Ry)} (Ry)_i (Rx)_i
///
/// [[x, 0]] is defined as 0 for every p. For 1 < p < 2 the singular factor
/// |Ry_i|^{p-2} at Ry_i = 0 contributes 0 (its limit as y_i -> 0). The p = inf
/// maximum runs over the tie-tolerant max-index set.
double weak_pairing(const Vector& x, const Vector& y, const NormSpec& ns,
                    double tie_tol = kTieTolerance);

/// Geometric step schedule h0 * 2^{-k}, k = 0..levels-1.
struct HSchedule {
  double h0 = 1e-2;
  int levels = 13;
  std::vector<double> values() const;
};

/// Extrapolates q(h) to h -> 0 by a least-squares line through the last
/// `points` samples (order-1 Richardson). `converged` compares against the
/// same fit shifted one sample towards larger h.
struct LimitEstimate {
  double value = 0.0;
  double spread = 0.0;
  bool converged = true;
};
LimitEstimate richardson_limit(std::span<const double> h, std::span<const double> q,
                               int points = 4, double rel_tol = 1e-6);

struct DeimlingResult {
  double directional_derivative = 0.0;  // ||y|| * lim (||y+hx|| - ||y||)/h
  double pairing = 0.0;
  double margin = 0.0;                  // directional_derivative - pairing
  bool converged = true;
};

/// Numerical check of [[x, y]] <= ||y|| lim_{h->0+} (||y + h x|| - ||y||)/h.
DeimlingResult check_deimling(const Vector& x, const Vector& y, const NormSpec& ns,
                              const HSchedule& schedule = {});

struct MarginFailure {
  Json inputs;
  double value = 0.0;
};

/// Aggregate of many margin evaluations; a margin below -tol is a failure.
struct MarginReport {
  std::string condition;
  std::size_t samples = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::vector<MarginFailure> failures;
  std::size_t failure_count = 0;
  std::size_t flagged = 0;

  static constexpr std::size_t kMaxStoredFailures = 20;

  void record(double margin, double tol, const std::function<Json()>& inputs);
  bool passed() const { return failure_count == 0; }
};
Json to_json(const MarginReport& r);

struct CurveResidualOptions {
  double tie_tol = kTieTolerance;
  double max_offset = 1e-4;
  double guard = 10.0;
};

/// Residual | ||x|| D+||x|| - [[xdot, x]] | at accepted nodes. Nodes whose
/// forward-difference window crosses a change of the max-index set (p = inf)
/// or a sign change / near-zero component (p != 2) are excluded, since the
/// identity only holds for almost every t. For p outside {1, 2, inf} the
/// offset is also capped at 1e-4 |Rx_i| / |Rx'_i|.
struct CurveResidualReport {
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
  double max_residual = 0.0;
  double worst_time = 0.0;
  std::vector<double> residuals;  // per node; NaN when excluded or last node
  std::vector<double> excluded_times;
};
/// True when a forward-difference window [t, t + 2d] stays on one smooth
/// piece of the norm: r0, r1, r2 are R x at t, t + d, t + 2d and rdot is
/// R x' at t.
bool forward_window_smooth(const Vector& r0, const Vector& r1, const Vector& r2, const Vector& rdot,
                           double offset, Exponent p, const CurveResidualOptions& opts = {});

CurveResidualReport check_curve_norm_derivative(const Trajectory& traj, const NormSpec& ns,
                                                const CurveResidualOptions& opts = {});
Json to_json(const CurveResidualReport& r);

}  // namespace ctk
