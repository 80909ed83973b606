#pragma once

#include "ctk/normcore.hpp"

#include <functional>
#include <string>
#include <vector>

namespace ctk {

enum class FlowStatus { ok, step_underflow, max_steps };

/// Accepted integrator steps (strictly increasing times) with states and
/// right-hand-side values at each node. Between nodes the trajectory is the
/// cubic Hermite interpolant of (state, derivative), which is C^1.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(Index dim) : dim_(dim) {}

  void push(double t, Vector x, Vector dx);

  Index dim() const { return dim_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }

  const std::vector<double>& times() const { return times_; }
  const std::vector<Vector>& states() const { return states_; }
  const std::vector<Vector>& derivatives() const { return derivatives_; }
  const Vector& final_state() const { return states_.back(); }

  /// Dense output; t is clamped to the covered interval.
  Vector state_at(double t) const;
  Vector derivative_at(double t) const;

  /// Index k of the step [t_k, t_{k+1}] containing t.
  std::size_t segment_of(double t) const;

  FlowStatus status = FlowStatus::ok;
  std::string message;
  bool ok() const { return status == FlowStatus::ok; }

 private:
  Index dim_ = 0;
  std::vector<double> times_;
  std::vector<Vector> states_;
  std::vector<Vector> derivatives_;
};

/// One-sided second-order forward difference of s -> g(state(s)) at node k,
/// taken inside the step [t_k, t_{k+1}] on the dense output. Returns the
/// estimate and the offset used.
struct ForwardDifference {
  double value = 0.0;
  double offset = 0.0;
};
ForwardDifference forward_dini(const Trajectory& traj, std::size_t k,
                               const std::function<double(const Vector&)>& g,
                               double max_offset = 1e-4);

}  // namespace ctk
