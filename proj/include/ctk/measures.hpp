#pragma once

#include "ctk/json_io.hpp"
#include "ctk/normcore.hpp"
#include "ctk/pairings.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ctk {

enum class MeasureMethod { closed_form, similarity, similarity_upper_bound, wp_sup, limit_oracle };
/// How `value` relates to the true measure.
enum class Bound { exact, lower, upper, estimate };

std::string to_string(MeasureMethod m);
std::string to_string(Bound b);

struct MeasureEvidence {
  std::size_t samples = 0;
  std::vector<double> h_values;
  std::vector<double> quotients;  // sup quotient per h (oracle only)
  bool nonmonotone_in_h = false;
  bool extrapolation_converged = true;
};

struct MeasureResult {
  double value = 0.0;
  MeasureMethod method = MeasureMethod::closed_form;
  Bound bound = Bound::exact;
  NormSpec norm;
  MeasureEvidence evidence;
  std::optional<Vector> maximizer;  // sampled maximizer (wp_sup, oracle)
};
Json to_json(const MeasureResult& r);

/// Sampler for the orthant suprema: Dirichlet draws on the simplex, the
/// coordinate axes, the all-ones vector and any warm starts, followed by
/// coordinate hill-climbing from the best few points.
struct SamplerOptions {
  std::uint64_t seed = 1;
  int dirichlet = 2000;
  int hill_climb_iters = 50;
  int starts = 10;
};

/// Closed forms for unweighted norms.
double measure_1(const Matrix& a);    // max_j a_jj + sum_{i!=j} |a_ij|
double measure_inf(const Matrix& a);  // max_i a_ii + sum_{j!=i} |a_ij|
double measure_2(const Matrix& a);    // lambda_max((A + A^T)/2)
double conic_measure_1(const Matrix& a);    // max_j a_jj + sum_{i!=j} [a_ij]_+
double conic_measure_inf(const Matrix& a);  // max_i a_ii + sum_{j!=i} [a_ij]_+

/// mu(A) = lim_{h->0+} (||I + hA|| - 1)/h. Closed forms for p in {1, 2, inf}
/// (after the similarity W A W^{-1}); other exponents use the whole-space
/// limit oracle.
MeasureResult matrix_measure(const Matrix& a, const NormSpec& ns, const SamplerOptions& sampler = {});

/// mu+(A): the same limit with the supremum restricted to x >= 0.
MeasureResult conic_measure(const Matrix& a, const NormSpec& ns, const SamplerOptions& sampler = {});

/// sup_{x >= 0, x != 0} [[Ax, x]] / ||x||^2 over samples. A lower bound.
MeasureResult conic_measure_wp_sup(const Matrix& a, const NormSpec& ns,
                                   const SamplerOptions& sampler = {},
                                   const std::vector<Vector>& warm_starts = {});

/// Definitional estimate: for each h, sup_{x >= 0} (||(I+hA)x||/||x|| - 1)/h
/// over samples, then a linear extrapolation to h = 0.
MeasureResult conic_measure_limit_oracle(const Matrix& a, const NormSpec& ns,
                                         const HSchedule& schedule = {},
                                         const SamplerOptions& sampler = {});
/// Whole-space counterpart of the oracle (estimate of mu).
MeasureResult measure_limit_oracle(const Matrix& a, const NormSpec& ns,
                                   const HSchedule& schedule = {},
                                   const SamplerOptions& sampler = {});

/// Measures of a Metzler matrix under the Perron-type diagonal weights.
struct MetzlerWeightedMeasures {
  double mu1_eta = 0.0;         // ||[eta] x||_1:      max_j (eta^T A)_j / eta_j
  double mu_inf_eta_inv = 0.0;  // ||[eta]^-1 x||_inf: max_i (A eta)_i / eta_i
  double mu2_eta = 0.0;         // ||[eta] x||_2:      lambda_max(sym([eta] A [eta]^-1))
  /// min{c : [eta]A + A^T[eta] <= c[eta]}. Equals 2 mu for the norm
  /// ||[eta]^{1/2} x||_2, so it is not mu2_eta in general.
  double mu2_lmi_literal = 0.0;
};
MetzlerWeightedMeasures metzler_weighted_measures(const Matrix& a, const Vector& eta);

namespace testing {
/// Adds `offset` to every orthant closed form. Used by the self-test to
/// confirm that a corrupted formula is caught; 0 disables.
void set_closed_form_mutation(double offset);
double closed_form_mutation();
}  // namespace testing

}  // namespace ctk
