#include "ctk/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace ctk {

void Trajectory::push(double t, Vector x, Vector dx) {
  if (dim_ == 0) dim_ = x.size();
  if (x.size() != dim_ || dx.size() != dim_) throw InputError("trajectory: dimension mismatch");
  if (!times_.empty() && !(t > times_.back())) throw InputError("trajectory: times must increase");
  times_.push_back(t);
  states_.push_back(std::move(x));
  derivatives_.push_back(std::move(dx));
}

std::size_t Trajectory::segment_of(double t) const {
  if (times_.size() < 2) return 0;
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  return std::min(k, times_.size() - 2);
}

Vector Trajectory::state_at(double t) const {
  if (times_.empty()) throw InputError("trajectory: empty");
  if (times_.size() == 1 || t <= times_.front()) return states_.front();
  if (t >= times_.back()) return states_.back();
  const std::size_t k = segment_of(t);
  const double h = times_[k + 1] - times_[k];
  const double s = (t - times_[k]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * states_[k] + h10 * h * derivatives_[k] + h01 * states_[k + 1] +
         h11 * h * derivatives_[k + 1];
}

Vector Trajectory::derivative_at(double t) const {
  if (times_.empty()) throw InputError("trajectory: empty");
  if (times_.size() == 1 || t <= times_.front()) return derivatives_.front();
  if (t >= times_.back()) return derivatives_.back();
  const std::size_t k = segment_of(t);
  const double h = times_[k + 1] - times_[k];
  const double s = (t - times_[k]) / h;
  const double d00 = 6 * s * s - 6 * s;
  const double d10 = 3 * s * s - 4 * s + 1;
  const double d01 = -6 * s * s + 6 * s;
  const double d11 = 3 * s * s - 2 * s;
  return (d00 / h) * states_[k] + d10 * derivatives_[k] + (d01 / h) * states_[k + 1] +
         d11 * derivatives_[k + 1];
}

ForwardDifference forward_dini(const Trajectory& traj, std::size_t k,
                               const std::function<double(const Vector&)>& g, double max_offset) {
  const auto& t = traj.times();
  if (k + 1 >= t.size()) throw InputError("forward_dini: node has no forward step");
  const double h = t[k + 1] - t[k];
  const double d = std::min(max_offset, h / 4.0);
  const double g0 = g(traj.states()[k]);
  const double g1 = g(traj.state_at(t[k] + d));
  const double g2 = g(traj.state_at(t[k] + 2 * d));
  return {(-3.0 * g0 + 4.0 * g1 - g2) / (2.0 * d), d};
}

}  // namespace ctk
