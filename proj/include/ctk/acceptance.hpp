#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ctk::acceptance {

struct Options {
  bool quick = false;      // reduced sample counts
  double mutation = 0.0;   // offset injected into the closed-form measures
  std::uint64_t seed = 1;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

CriterionResult reproduce_counterexample(const Options& opts);
CriterionResult closed_forms_vs_oracle(const Options& opts);
CriterionResult conic_measure_properties(const Options& opts);
CriterionResult conic_coppel(const Options& opts);
CriterionResult monotone_equivalence(const Options& opts);
CriterionResult hopfield_desk_example(const Options& opts);
CriterionResult hopfield_entrainment(const Options& opts);
CriterionResult comparison_iss(const Options& opts);
CriterionResult nonmonotone_interconnection(const Options& opts);
CriterionResult pairing_axioms(const Options& opts);

/// Runs every criterion in order. The mutation offset is active only for
/// the duration of the call.
std::vector<CriterionResult> run_all(const Options& opts);

/// "[PASS] 3 name (1.2 s): detail"
std::string format_line(const CriterionResult& r);

}  // namespace ctk::acceptance
