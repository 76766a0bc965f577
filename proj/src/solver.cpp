#include "mpbcfw/solver.hpp"

#include "mpbcfw/autotune.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mpbcfw {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::FW:
      return "fw";
    case Algorithm::BCFW:
      return "bcfw";
    case Algorithm::BCFWAvg:
      return "bcfw-avg";
    case Algorithm::MPBCFW:
      return "mp-bcfw";
    case Algorithm::MPBCFWAvg:
      return "mp-bcfw-avg";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  for (auto a : {Algorithm::FW, Algorithm::BCFW, Algorithm::BCFWAvg, Algorithm::MPBCFW, Algorithm::MPBCFWAvg})
    if (to_string(a) == name) return a;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

ApproxPolicy ApproxPolicy::parse(const std::string& text) {
  if (text == "auto") return automatic();
  const std::string prefix = "fixed:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string digits = text.substr(prefix.size());
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
      return fixed(std::stoull(digits));
  }
  throw std::invalid_argument("approx policy must be 'auto' or 'fixed:K', got '" + text + "'");
}

void SolverConfig::validate() const {
  if (lambda && !(*lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (inactivity < 1) throw std::invalid_argument("inactivity horizon T must be at least 1");
  if (!stopping.gap_tolerance && !stopping.max_iterations && !stopping.time_budget_seconds)
    throw std::invalid_argument("at least one stopping criterion is required");
  if (stopping.gap_tolerance && primal_every == 0)
    throw std::invalid_argument("a gap tolerance needs primal evaluation (primal_every > 0)");
  if (stopping.gap_tolerance && !(*stopping.gap_tolerance >= 0.0))
    throw std::invalid_argument("gap tolerance must be non-negative");
  if (stopping.time_budget_seconds && !(*stopping.time_budget_seconds > 0.0))
    throw std::invalid_argument("time budget must be positive");
}

namespace {

double resolve_lambda(const SolverConfig& config, const StructuredTask& task) {
  config.validate();
  return config.lambda ? *config.lambda : 1.0 / static_cast<double>(task.size());
}

}  // namespace

Trainer::Trainer(const StructuredTask& task, SolverConfig config, Clock& clock)
    : task_(task),
      config_(std::move(config)),
      clock_(clock),
      state_(task.size(), task.dim(), resolve_lambda(config_, task)),
      working_sets_(task.size(), WorkingSet(is_multi_plane(config_.algorithm) ? config_.cache_capacity : 0)),
      rng_(config_.seed) {}

double Trainer::mean_working_set_size() const {
  std::size_t total = 0;
  for (const auto& ws : working_sets_) total += ws.size();
  return static_cast<double>(total) / static_cast<double>(working_sets_.size());
}

void Trainer::begin_iteration() { ++iteration_; }

void Trainer::end_iteration() {
  for (auto& ws : working_sets_) ws.evict_inactive(iteration_, config_.inactivity);
}

std::vector<std::size_t> Trainer::permutation() {
  std::vector<std::size_t> order(task_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng_);
  return order;
}

bool Trainer::any_working_set_nonempty() const {
  return std::any_of(working_sets_.begin(), working_sets_.end(), [](const WorkingSet& ws) { return !ws.empty(); });
}

void Trainer::fw_iteration() {
  const std::size_t n = task_.size();
  const VectorD w = state_.weights();
  std::vector<PlaneD> corners;
  corners.reserve(n);
  PlaneD corner_sum = PlaneD::Zero(task_.dim());
  for (std::size_t i = 0; i < n; ++i) {
    corners.push_back(task_.max_oracle(i, w, n).plane);
    corner_sum += corners.back();
    clock_.charge_exact_call();
    ++exact_calls_;
  }
  const double before = state_.dual();
  const double gamma = line_search_gamma(state_.aggregate(), corner_sum, state_.aggregate(), lambda());
  state_.apply_full_update(corners, gamma);
  average_update(averages_, state_.aggregate(), CallKind::Exact);
  notify({CallKind::Exact, std::nullopt, gamma, before, state_.dual(), exact_calls_, approx_calls_, iteration_, {}});
}

void Trainer::exact_block(std::size_t i, bool cache) {
  const VectorD w = state_.weights();
  OracleResult r = task_.max_oracle(i, w, task_.size());
  clock_.charge_exact_call();
  ++exact_calls_;
  const double before = state_.dual();
  const double gamma = line_search_gamma(state_.block(i), r.plane, state_.aggregate(), lambda());
  state_.apply_block_update(i, r.plane, gamma);
  average_update(averages_, state_.aggregate(), CallKind::Exact);
  if (cache) working_sets_[i].insert(r.plane, r.label, iteration_);
  notify({CallKind::Exact, i, gamma, before, state_.dual(), exact_calls_, approx_calls_, iteration_, r.label});
}

void Trainer::bcfw_pass() {
  for (std::size_t i : permutation()) exact_block(i, false);
}

void Trainer::exact_pass() {
  for (std::size_t i : permutation()) exact_block(i, true);
}

ApproxPassResult Trainer::approx_pass() {
  ApproxPassResult out;
  if (!any_working_set_nonempty()) return out;
  const double start_bound = state_.dual();
  const double start_time = clock_.now();
  for (std::size_t i : permutation()) {
    WorkingSet& ws = working_sets_[i];
    if (ws.empty()) continue;
    const VectorD w = state_.weights();
    const std::size_t k = ws.argmax(w);
    ws.touch(k, iteration_);
    const PlaneD candidate = ws[k].plane;
    const double before = state_.dual();
    const double gamma = line_search_gamma(state_.block(i), candidate, state_.aggregate(), lambda());
    state_.apply_block_update(i, candidate, gamma);
    clock_.charge_approx_update();
    ++approx_calls_;
    ++out.updates;
    average_update(averages_, state_.aggregate(), CallKind::Approx);
    notify({CallKind::Approx, i, gamma, before, state_.dual(), exact_calls_, approx_calls_, iteration_, ws[k].label});
    ws.evict_inactive(iteration_, config_.inactivity);
  }
  out.gain = state_.dual() - start_bound;
  out.duration = clock_.now() - start_time;
  return out;
}

PlaneD Trainer::output_plane() const {
  if (is_averaged(config_.algorithm) && !(averages_.exact.empty() && averages_.approx.empty()))
    return best_average(averages_, lambda());
  return state_.aggregate();
}

double Trainer::primal(const VectorD& w) {
  primal_calls_ += task_.size();
  return primal_objective(task_, w, lambda());
}

TrainResult Trainer::train() {
  const bool multi_plane = is_multi_plane(config_.algorithm);
  const bool averaged = is_averaged(config_.algorithm);
  const auto& stop = config_.stopping;

  TrainResult result;
  result.lambda = lambda();
  const double start = clock_.now();
  double excluded = 0.0;
  auto elapsed = [&] { return clock_.now() - start - excluded; };
  auto out_of_time = [&] { return stop.time_budget_seconds && elapsed() >= *stop.time_budget_seconds; };

  auto record = [&](PassKind kind, std::size_t approx_passes) {
    TraceRecord r;
    r.iter = iteration_;
    r.pass_kind = kind;
    r.exact_calls = exact_calls_;
    r.approx_calls = approx_calls_;
    r.elapsed_ms = elapsed() * 1000.0;
    r.dual = state_.dual();
    if (averaged) r.dual_avg = dual_bound(output_plane(), lambda());
    r.mean_ws_size = mean_working_set_size();
    r.approx_passes_this_iter = approx_passes;
    result.trace.push_back(r);
  };

  std::size_t approx_cap = config_.max_approx_passes;
  if (config_.approx_policy.kind == ApproxPolicy::Kind::Fixed)
    approx_cap = std::min(config_.approx_policy.passes, config_.max_approx_passes);

  while (true) {
    begin_iteration();
    const double iter_start_bound = state_.dual();
    const double iter_start_time = clock_.now();

    if (config_.algorithm == Algorithm::FW) {
      fw_iteration();
    } else if (multi_plane) {
      exact_pass();
    } else {
      bcfw_pass();
    }
    record(PassKind::Exact, 0);

    if (multi_plane) {
      std::size_t done = 0;
      while (done < approx_cap && any_working_set_nonempty() && !out_of_time()) {
        const ApproxPassResult pass = approx_pass();
        ++done;
        record(PassKind::Approx, done);
        if (config_.approx_policy.kind == ApproxPolicy::Kind::Auto) {
          ++autotune_queries_;
          const IterationProgress progress{iter_start_bound, iter_start_time, pass.gain, pass.duration};
          if (!should_continue_approx(progress, clock_.now(), state_.dual())) break;
        }
      }
    }
    end_iteration();

    const bool last_by_count = stop.max_iterations && iteration_ >= *stop.max_iterations;
    const bool last_by_time = out_of_time();
    const bool evaluate_now =
        config_.primal_every > 0 && (iteration_ % config_.primal_every == 0 || last_by_count || last_by_time);

    bool converged = false;
    if (evaluate_now) {
      const double t0 = clock_.now();
      TraceRecord& r = result.trace.back();
      r.primal = primal(state_.weights());
      r.gap = *r.primal - r.dual;
      result.final_primal = r.primal;
      if (averaged) {
        r.primal_avg = primal(output_weights());
        r.gap_avg = *r.primal_avg - *r.dual_avg;
        result.final_primal = r.primal_avg;
      }
      excluded += clock_.now() - t0;
      if (stop.gap_tolerance)
        converged = *r.gap <= *stop.gap_tolerance || (r.gap_avg && *r.gap_avg <= *stop.gap_tolerance);
    }

    if (converged || last_by_count || last_by_time) break;
  }

  result.weights = output_weights();
  result.iterations = iteration_;
  result.exact_calls = exact_calls_;
  result.approx_calls = approx_calls_;
  result.primal_calls = primal_calls_;
  result.final_dual = averaged ? dual_bound(output_plane(), lambda()) : state_.dual();
  return result;
}

TrainResult train(const StructuredTask& task, const SolverConfig& config, Clock& clock) {
  Trainer trainer(task, config, clock);
  return trainer.train();
}

}  // namespace mpbcfw
