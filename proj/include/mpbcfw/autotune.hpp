#ifndef MPBCFW_AUTOTUNE_HPP
#define MPBCFW_AUTOTUNE_HPP

#include <algorithm>

namespace mpbcfw {

/// Progress of the current outer iteration, as seen after an approximate pass.
/// Times are in seconds on the solver's clock; the iteration start is taken
/// before its exact pass.
struct IterationProgress {
  double iter_start_bound = 0.0;
  double iter_start_time = 0.0;
  double last_pass_gain = 0.0;
  double last_pass_duration = 0.0;
};

/// Durations below this are clamped before dividing.
inline constexpr double kMinDuration = 1e-9;

/// Keep making approximate passes while the last pass raised the dual bound
/// faster (per unit time) than the iteration has on average so far.
inline bool should_continue_approx(const IterationProgress& p, double now, double current_bound) {
  const double elapsed = now - p.iter_start_time;
  if (elapsed < kMinDuration) return true;
  if (!(p.last_pass_gain > 0.0)) return false;
  const double last_slope = p.last_pass_gain / std::max(p.last_pass_duration, kMinDuration);
  const double iteration_slope = (current_bound - p.iter_start_bound) / elapsed;
  return last_slope > iteration_slope;
}

}  // namespace mpbcfw

#endif  // MPBCFW_AUTOTUNE_HPP
