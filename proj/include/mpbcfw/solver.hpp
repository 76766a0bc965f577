#ifndef MPBCFW_SOLVER_HPP
#define MPBCFW_SOLVER_HPP

#include "mpbcfw/averaging.hpp"
#include "mpbcfw/clock.hpp"
#include "mpbcfw/dual_state.hpp"
#include "mpbcfw/oracle.hpp"
#include "mpbcfw/trace.hpp"
#include "mpbcfw/working_set.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mpbcfw {

enum class Algorithm { FW, BCFW, BCFWAvg, MPBCFW, MPBCFWAvg };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

inline bool is_multi_plane(Algorithm a) { return a == Algorithm::MPBCFW || a == Algorithm::MPBCFWAvg; }
inline bool is_averaged(Algorithm a) { return a == Algorithm::BCFWAvg || a == Algorithm::MPBCFWAvg; }

/// How many approximate passes follow each exact pass.
struct ApproxPolicy {
  enum class Kind { Auto, Fixed };
  Kind kind = Kind::Auto;
  std::size_t passes = 0;  // Fixed only

  static ApproxPolicy automatic() { return {}; }
  static ApproxPolicy fixed(std::size_t k) { return {Kind::Fixed, k}; }
  /// "auto" or "fixed:K".
  static ApproxPolicy parse(const std::string& text);
};

struct StoppingRule {
  std::optional<double> gap_tolerance;
  std::optional<std::size_t> max_iterations;
  std::optional<double> time_budget_seconds;
};

struct SolverConfig {
  Algorithm algorithm = Algorithm::MPBCFW;
  /// Regularization constant; 1/n when unset.
  std::optional<double> lambda;
  std::size_t cache_capacity = 1000;     // N
  std::size_t max_approx_passes = 1000;  // M
  std::size_t inactivity = 10;           // T, in outer iterations
  ApproxPolicy approx_policy;
  std::uint64_t seed = 0;
  StoppingRule stopping;
  /// Evaluate the primal every k outer iterations; 0 disables it.
  std::size_t primal_every = 1;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

/// Observation of a single block (or, for FW, full) update.
struct BlockUpdate {
  CallKind kind = CallKind::Exact;
  /// Updated example; empty for a full FW step.
  std::optional<std::size_t> block;
  double gamma = 0.0;
  double dual_before = 0.0;
  double dual_after = 0.0;
  std::size_t exact_calls = 0;
  std::size_t approx_calls = 0;
  std::size_t iteration = 0;
  /// Label behind the new plane (exact argmax or working-set winner); empty
  /// for a full FW step.
  Label label;
};

struct ApproxPassResult {
  double gain = 0.0;
  double duration = 0.0;
  std::size_t updates = 0;
};

struct TrainResult {
  VectorD weights;
  double lambda = 0.0;
  std::vector<TraceRecord> trace;
  std::size_t iterations = 0;
  std::size_t exact_calls = 0;
  std::size_t approx_calls = 0;
  std::size_t primal_calls = 0;
  double final_dual = 0.0;
  std::optional<double> final_primal;
};

/// FW / BCFW / MP-BCFW training state for one dataset.
///
/// The step functions are public so that tests can drive a run pass by pass;
/// train() runs the full loop configured by SolverConfig. Every dual update
/// uses the closed-form line search, so the dual bound never decreases.
class Trainer {
 public:
  using Observer = std::function<void(const BlockUpdate&)>;

  Trainer(const StructuredTask& task, SolverConfig config, Clock& clock);

  const SolverConfig& config() const { return config_; }
  const DualStateD& state() const { return state_; }
  const AveragingStateD& averages() const { return averages_; }
  const WorkingSet& working_set(std::size_t i) const { return working_sets_.at(i); }
  WorkingSet& mutable_working_set(std::size_t i) { return working_sets_.at(i); }
  double lambda() const { return state_.lambda(); }
  double dual() const { return state_.dual(); }
  std::size_t iteration() const { return iteration_; }
  std::size_t exact_calls() const { return exact_calls_; }
  std::size_t approx_calls() const { return approx_calls_; }
  std::size_t primal_calls() const { return primal_calls_; }
  std::size_t autotune_queries() const { return autotune_queries_; }
  double mean_working_set_size() const;

  void set_observer(Observer obs) { observer_ = std::move(obs); }

  /// Starts outer iteration k+1; stamps issued from here on carry k+1.
  void begin_iteration();
  /// Runs the inactivity eviction over every working set.
  void end_iteration();

  /// One Frank-Wolfe step over the whole dual (n exact oracle calls).
  void fw_iteration();
  /// One BCFW pass in a fresh random order; no plane caching.
  void bcfw_pass();
  /// BCFW pass that also caches every oracle plane in its working set.
  void exact_pass();
  /// One pass of block updates against the cached planes; examples with an
  /// empty working set are skipped. No exact oracle calls.
  ApproxPassResult approx_pass();

  /// Plane whose weights are reported: the aggregate, or the best iterate
  /// average for averaged variants.
  PlaneD output_plane() const;
  VectorD output_weights() const { return weights_of(output_plane(), lambda()); }

  /// Exact primal objective at w; its oracle calls are counted separately.
  double primal(const VectorD& w);

  TrainResult train();

 private:
  void exact_block(std::size_t i, bool cache);
  std::vector<std::size_t> permutation();
  bool any_working_set_nonempty() const;
  void notify(const BlockUpdate& u) const {
    if (observer_) observer_(u);
  }

  const StructuredTask& task_;
  SolverConfig config_;
  Clock& clock_;
  DualStateD state_;
  AveragingStateD averages_;
  std::vector<WorkingSet> working_sets_;
  std::mt19937_64 rng_;
  Observer observer_;

  std::size_t iteration_ = 0;
  std::size_t exact_calls_ = 0;
  std::size_t approx_calls_ = 0;
  std::size_t primal_calls_ = 0;
  std::size_t autotune_queries_ = 0;
};

/// Convenience wrapper: train with the given clock.
TrainResult train(const StructuredTask& task, const SolverConfig& config, Clock& clock);

}  // namespace mpbcfw

#endif  // MPBCFW_SOLVER_HPP
