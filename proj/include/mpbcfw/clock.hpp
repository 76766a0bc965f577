#ifndef MPBCFW_CLOCK_HPP
#define MPBCFW_CLOCK_HPP

#include <chrono>

namespace mpbcfw {

/// Monotonic time source in seconds. The solver reports its oracle work
/// through the charge_* hooks so simulated clocks can model oracle cost.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;
  virtual void charge_exact_call() {}
  virtual void charge_approx_update() {}
};

class SteadyClock final : public Clock {
 public:
  SteadyClock() : start_(std::chrono::steady_clock::now()) {}
  double now() const override {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Deterministic clock: time advances only by the configured charges.
class SimulatedClock final : public Clock {
 public:
  SimulatedClock(double exact_call_cost, double approx_update_cost)
      : exact_cost_(exact_call_cost), approx_cost_(approx_update_cost) {}

  double now() const override { return time_; }
  void charge_exact_call() override { time_ += exact_cost_; }
  void charge_approx_update() override { time_ += approx_cost_; }
  void advance(double seconds) { time_ += seconds; }

 private:
  double exact_cost_;
  double approx_cost_;
  double time_ = 0.0;
};

}  // namespace mpbcfw

#endif  // MPBCFW_CLOCK_HPP
