#ifndef MPBCFW_AVERAGING_HPP
#define MPBCFW_AVERAGING_HPP

#include "mpbcfw/plane.hpp"

#include <cstddef>
#include <stdexcept>

namespace mpbcfw {

/// Weighted running average (2 / (k (k+1))) sum_t t phi^(t) of a plane
/// sequence, updated in O(d) per sample.
template <typename Scalar>
class IterateAverage {
 public:
  std::size_t count() const { return count_; }
  bool empty() const { return count_ == 0; }
  const Plane<Scalar>& value() const {
    if (empty()) throw std::logic_error("IterateAverage: no samples");
    return avg_;
  }

  void add(const Plane<Scalar>& p) {
    if (count_ == 0) {
      avg_ = p;
    } else {
      const auto k = static_cast<Scalar>(count_);
      avg_ = interpolate(avg_, p, Scalar(2) / (k + Scalar(2)));
    }
    ++count_;
  }

 private:
  Plane<Scalar> avg_;
  std::size_t count_ = 0;
};

enum class CallKind { Exact, Approx };

/// Separate averages over iterates produced by exact and by approximate
/// oracle calls.
template <typename Scalar>
struct AveragingState {
  IterateAverage<Scalar> exact;
  IterateAverage<Scalar> approx;
};

template <typename Scalar>
void average_update(AveragingState<Scalar>& avg, const Plane<Scalar>& aggregate, CallKind which) {
  (which == CallKind::Exact ? avg.exact : avg.approx).add(aggregate);
}

/// The point of the segment between the two averages with the best dual bound.
template <typename Scalar>
Plane<Scalar> best_average(const AveragingState<Scalar>& avg, Scalar lambda) {
  if (avg.exact.empty() && avg.approx.empty()) throw std::logic_error("best_average: both averages are empty");
  if (avg.approx.empty()) return avg.exact.value();
  if (avg.exact.empty()) return avg.approx.value();
  const auto& a = avg.exact.value();
  const auto& b = avg.approx.value();
  return interpolate(a, b, line_search_gamma(a, b, a, lambda));
}

using AveragingStateD = AveragingState<double>;

}  // namespace mpbcfw

#endif  // MPBCFW_AVERAGING_HPP
