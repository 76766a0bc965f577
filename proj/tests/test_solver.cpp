#include "doctest.h"

#include "mpbcfw/data.hpp"
#include "mpbcfw/solver.hpp"
#include "test_util.hpp"

#include <map>

using namespace mpbcfw;
using mpbcfw::testing::grid_best_dual;
using mpbcfw::testing::random_plane;
using mpbcfw::testing::random_vector;
using mpbcfw::testing::relative_slack;
using mpbcfw::testing::SingletonTask;

namespace {

SolverConfig config_for(Algorithm a, std::size_t iterations, std::uint64_t seed = 0) {
  SolverConfig c;
  c.algorithm = a;
  c.seed = seed;
  c.stopping.max_iterations = iterations;
  return c;
}

MulticlassTask toy_multiclass(std::size_t n = 20, std::uint64_t seed = 1) {
  MulticlassGenParams p;
  p.n = n;
  return generate_multiclass(p, seed);
}

ChainTask small_chain(std::uint64_t seed = 2) {
  ChainGenParams p;
  p.n = 6;
  p.length = 3;
  return generate_chain(p, seed);
}

BinaryPottsTask small_potts(std::uint64_t seed = 3) {
  GridGenParams p;
  p.n = 5;
  p.height = 2;
  p.width = 3;
  return generate_binary_potts(p, seed);
}

std::vector<double> trace_duals(const TrainResult& r) {
  std::vector<double> out;
  for (const auto& rec : r.trace) out.push_back(rec.dual);
  return out;
}

}  // namespace

TEST_CASE("configuration validation") {
  SolverConfig c;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.stopping.max_iterations = 1;
  CHECK_NOTHROW(c.validate());
  c.inactivity = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.inactivity = 1;
  c.lambda = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.lambda.reset();
  c.stopping.gap_tolerance = 1e-3;
  c.primal_every = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  CHECK(algorithm_from_string("mp-bcfw-avg") == Algorithm::MPBCFWAvg);
  CHECK_THROWS_AS(algorithm_from_string("sgd"), std::invalid_argument);
  CHECK(ApproxPolicy::parse("fixed:7").passes == 7);
  CHECK(ApproxPolicy::parse("auto").kind == ApproxPolicy::Kind::Auto);
  CHECK_THROWS_AS(ApproxPolicy::parse("fixed:"), std::invalid_argument);
  CHECK_THROWS_AS(ApproxPolicy::parse("fixed:-1"), std::invalid_argument);

  const auto task = toy_multiclass(4);
  SimulatedClock clock(1, 1);
  CHECK_THROWS_AS(Trainer(task, SolverConfig{}, clock), std::invalid_argument);
}

TEST_CASE("Frank-Wolfe") {
  SUBCASE("optimal truth is a fixed point") {
    SingletonTask task;
    SimulatedClock clock(1, 1);
    Trainer t(task, config_for(Algorithm::FW, 1), clock);
    t.begin_iteration();
    t.fw_iteration();
    CHECK(t.state().aggregate() == PlaneD::Zero(2));
    CHECK(t.dual() == 0.0);
    CHECK(t.exact_calls() == 1);
  }
  SUBCASE("one example: a single step lands on the segment optimum") {
    const auto task = toy_multiclass(1, 5);
    SimulatedClock clock(1, 1);
    Trainer t(task, config_for(Algorithm::FW, 1), clock);
    const auto r = task.max_oracle(0, VectorD::Zero(task.dim()), 1);
    const PlaneD zero = PlaneD::Zero(task.dim());
    t.begin_iteration();
    t.fw_iteration();
    CHECK(t.dual() >= grid_best_dual(zero, r.plane, zero, t.lambda()) - 1e-10);
  }
  SUBCASE("one example: FW and BCFW coincide") {
    const auto task = toy_multiclass(1, 6);
    SimulatedClock c1(1, 1), c2(1, 1);
    const auto fw = train(task, config_for(Algorithm::FW, 10), c1);
    const auto bc = train(task, config_for(Algorithm::BCFW, 10), c2);
    CHECK(trace_duals(fw) == trace_duals(bc));
  }
  SUBCASE("n calls per iteration and a non-decreasing bound") {
    const auto task = toy_multiclass(3, 7);
    SimulatedClock clock(1, 1);
    Trainer t(task, config_for(Algorithm::FW, 50), clock);
    double last = t.dual();
    for (int k = 0; k < 50; ++k) {
      t.begin_iteration();
      t.fw_iteration();
      CHECK(t.dual() >= last - relative_slack(last));
      last = t.dual();
    }
    CHECK(t.exact_calls() == 150);
  }
}

TEST_CASE("BCFW") {
  const auto task = toy_multiclass();
  SUBCASE("fixed seed is bit-reproducible") {
    SimulatedClock c1(1, 1), c2(1, 1);
    const auto a = train(task, config_for(Algorithm::BCFW, 20, 9), c1);
    const auto b = train(task, config_for(Algorithm::BCFW, 20, 9), c2);
    CHECK(trace_duals(a) == trace_duals(b));
    CHECK(a.weights == b.weights);
    SimulatedClock c3(1, 1);
    const auto c = train(task, config_for(Algorithm::BCFW, 20, 10), c3);
    CHECK(trace_duals(a) != trace_duals(c));
  }
  SUBCASE("reaches a 1e-6 duality gap within 200 passes") {
    SimulatedClock clock(1, 1);
    auto config = config_for(Algorithm::BCFW, 200, 1);
    config.stopping.gap_tolerance = 1e-6;
    const auto r = train(task, config, clock);
    REQUIRE(r.trace.back().gap);
    CHECK(*r.trace.back().gap < 1e-6);
    CHECK(r.iterations <= 200);
    CHECK(r.exact_calls == r.iterations * task.size());
  }
}

TEST_CASE("MP-BCFW with no cache and no approximate passes is BCFW") {
  const auto mc = toy_multiclass();
  const auto chain = small_chain();
  const auto potts = small_potts();
  for (const StructuredTask* task : std::vector<const StructuredTask*>{&mc, &chain, &potts}) {
    for (std::uint64_t seed : {0u, 1u, 2u}) {
      auto mp = config_for(Algorithm::MPBCFW, 15, seed);
      mp.cache_capacity = 0;
      mp.max_approx_passes = 0;
      SimulatedClock c1(1, 1), c2(1, 1);
      const auto a = train(*task, mp, c1);
      const auto b = train(*task, config_for(Algorithm::BCFW, 15, seed), c2);
      CHECK(trace_duals(a) == trace_duals(b));
      CHECK(a.approx_calls == 0);
    }
  }
}

TEST_CASE("exact pass caching") {
  SUBCASE("capacity one keeps the latest oracle plane") {
    const auto task = toy_multiclass(6, 3);
    auto config = config_for(Algorithm::MPBCFW, 5);
    config.cache_capacity = 1;
    SimulatedClock clock(1, 1);
    Trainer t(task, config, clock);
    t.set_observer([&](const BlockUpdate& u) {
      const WorkingSet& ws = t.working_set(*u.block);
      REQUIRE(ws.size() == 1);
      CHECK(ws[0].label == u.label);
      CHECK(ws[0].plane == task.plane_for(*u.block, u.label, task.size()));
      CHECK(ws[0].last_active == t.iteration());
    });
    for (int k = 0; k < 5; ++k) {
      t.begin_iteration();
      t.exact_pass();
    }
  }
  SUBCASE("a repeated plane is stored once with a refreshed stamp") {
    MulticlassTask task(2, 1, {{(VectorD(1) << 1.0).finished(), 0}});
    auto config = config_for(Algorithm::MPBCFW, 6);
    SimulatedClock clock(1, 1);
    Trainer t(task, config, clock);
    std::map<Label, std::size_t> seen;
    t.set_observer([&](const BlockUpdate& u) { seen[u.label] = u.iteration; });
    for (int k = 0; k < 6; ++k) {
      t.begin_iteration();
      t.exact_pass();
      const WorkingSet& ws = t.working_set(0);
      CHECK(ws.size() == seen.size());
      for (const auto& e : ws.entries()) CHECK(e.last_active == seen.at(e.label));
    }
    CHECK(seen.size() < 6);
  }
  SUBCASE("working set unit behavior") {
    WorkingSet ws(2);
    const PlaneD a = PlaneD::Zero(2);
    const PlaneD b(VectorD::Ones(2), 1.0);
    const PlaneD c(-VectorD::Ones(2), 0.5);
    CHECK(ws.insert(a, {0}, 1));
    CHECK(ws.insert(a, {0}, 3));
    CHECK(ws.size() == 1);
    CHECK(ws[0].last_active == 3);
    ws.insert(b, {1}, 3);
    ws.insert(c, {2}, 4);
    // a and b tie on last activity; a was inserted first and goes.
    REQUIRE(ws.size() == 2);
    CHECK(ws[0].label == Label{1});
    CHECK(ws[1].label == Label{2});
    CHECK(ws.argmax(VectorD::Zero(2)) == 0);
    CHECK(ws.evict_inactive(13, 10) == 1);
    CHECK(ws.size() == 1);
    CHECK(ws[0].label == Label{2});

    WorkingSet none(0);
    CHECK_FALSE(none.insert(a, {0}, 1));
    CHECK(none.empty());
  }
}

TEST_CASE("approximate pass") {
  const auto task = toy_multiclass(8, 4);
  auto config = config_for(Algorithm::MPBCFW, 3, 5);
  SUBCASE("empty working sets change nothing") {
    SimulatedClock clock(1, 1);
    Trainer t(task, config, clock);
    t.begin_iteration();
    const auto r = t.approx_pass();
    CHECK(r.gain == 0.0);
    CHECK(r.updates == 0);
    CHECK(t.approx_calls() == 0);
    CHECK(t.state().aggregate() == PlaneD::Zero(task.dim()));
  }
  SUBCASE("singleton sets holding the current blocks give zero steps") {
    SimulatedClock clock(1, 1);
    Trainer t(task, config, clock);
    t.begin_iteration();
    for (std::size_t i = 0; i < task.size(); ++i)
      t.mutable_working_set(i).insert(t.state().block(i), task.truth(i), 1);
    std::vector<double> gammas;
    t.set_observer([&](const BlockUpdate& u) { gammas.push_back(u.gamma); });
    const auto r = t.approx_pass();
    CHECK(r.gain == 0.0);
    CHECK(gammas == std::vector<double>(task.size(), 0.0));
    CHECK(t.exact_calls() == 0);
  }
  SUBCASE("matches a grid-search block solver") {
    SimulatedClock clock(1, 1);
    Trainer t(task, config, clock);
    t.begin_iteration();
    t.exact_pass();
    std::mt19937_64 rng(17);
    for (std::size_t i = 0; i < task.size(); ++i)
      while (t.working_set(i).size() < 3)
        t.mutable_working_set(i).insert(task.plane_for(i, {static_cast<int>(rng() % 3)}, task.size()), {0}, 1);

    DualStateD ref = t.state();
    std::vector<WorkingSet> sets;
    for (std::size_t i = 0; i < task.size(); ++i) sets.push_back(t.working_set(i));
    std::vector<std::size_t> order;
    t.set_observer([&](const BlockUpdate& u) { order.push_back(*u.block); });
    const std::size_t calls_before = t.exact_calls();
    const auto r = t.approx_pass();
    CHECK(t.exact_calls() == calls_before);
    CHECK(r.updates == task.size());
    CHECK(r.gain >= -1e-12);

    for (std::size_t i : order) {
      const PlaneD& cand = sets[i][sets[i].argmax(ref.weights())].plane;
      const PlaneD old = ref.block(i);
      const int points = 10001;
      double best_gamma = 0.0, best = -INFINITY;
      for (int k = 0; k < points; ++k) {
        const double g = static_cast<double>(k) / (points - 1);
        const double f = dual_bound(ref.aggregate() - old + interpolate(old, cand, g), ref.lambda());
        if (f > best) best = f, best_gamma = g;
      }
      ref.apply_block_update(i, cand, best_gamma);
    }
    CHECK(t.dual() >= ref.dual() - 1e-12);
    CHECK(t.dual() - ref.dual() <= 1e-6 * std::max(1.0, std::abs(ref.dual())));
  }
}

TEST_CASE("iterate averaging") {
  std::mt19937_64 rng(23);
  SUBCASE("first two samples") {
    IterateAverage<double> avg;
    const PlaneD p1 = random_plane(3, rng), p2 = random_plane(3, rng);
    avg.add(p1);
    CHECK(avg.value() == p1);
    avg.add(p2);
    const PlaneD expect = p1 * (1.0 / 3.0) + p2 * (2.0 / 3.0);
    CHECK((avg.value().star - expect.star).norm() <= 1e-15 * expect.star.norm() + 1e-15);
    CHECK(avg.value().offset == doctest::Approx(expect.offset).epsilon(1e-15));
  }
  SUBCASE("incremental equals the weighted sum") {
    IterateAverage<double> avg;
    PlaneD weighted = PlaneD::Zero(4);
    for (int k = 1; k <= 100; ++k) {
      const PlaneD p = random_plane(4, rng, 5.0);
      avg.add(p);
      weighted += p * static_cast<double>(k);
      const PlaneD closed = weighted * (2.0 / (static_cast<double>(k) * (k + 1)));
      const double scale = std::max(1.0, closed.star.norm() + std::abs(closed.offset));
      CHECK((avg.value().star - closed.star).norm() <= 1e-10 * scale);
      CHECK(std::abs(avg.value().offset - closed.offset) <= 1e-10 * scale);
    }
    CHECK(avg.count() == 100);
  }
  SUBCASE("best_average") {
    AveragingStateD s;
    CHECK_THROWS_AS(best_average(s, 1.0), std::logic_error);
    const PlaneD a = random_plane(3, rng);
    average_update(s, a, CallKind::Exact);
    CHECK(best_average(s, 1.0) == a);
    average_update(s, a, CallKind::Approx);
    CHECK(best_average(s, 1.0) == a);

    for (int t = 0; t < 200; ++t) {
      AveragingStateD r;
      const PlaneD x = random_plane(3, rng), y = random_plane(3, rng);
      average_update(r, x, CallKind::Exact);
      average_update(r, y, CallKind::Approx);
      const double lambda = std::exp(random_vector(1, rng)[0]);
      CHECK(dual_bound(best_average(r, lambda), lambda) >= grid_best_dual(x, y, x, lambda) - 1e-10);
    }
  }
}

TEST_CASE("training invariants across tasks and algorithms") {
  const auto mc = toy_multiclass(10, 8);
  const auto chain = small_chain(9);
  const auto potts = small_potts(10);
  const std::vector<Algorithm> algos = {Algorithm::FW, Algorithm::BCFW, Algorithm::BCFWAvg, Algorithm::MPBCFW,
                                        Algorithm::MPBCFWAvg};
  for (const StructuredTask* task : std::vector<const StructuredTask*>{&mc, &chain, &potts}) {
    for (Algorithm algo : algos) {
      CAPTURE(to_string(task->kind()));
      CAPTURE(to_string(algo));
      auto config = config_for(algo, 12, 4);
      config.inactivity = 2;
      SimulatedClock clock(1000, 1);
      Trainer t(*task, config, clock);
      std::vector<std::map<Label, bool>> logged(task->size());
      bool monotone = true;
      bool accounting = true;
      std::size_t last_exact = 0;
      t.set_observer([&](const BlockUpdate& u) {
        monotone = monotone && u.dual_after >= u.dual_before - relative_slack(u.dual_before);
        if (u.kind == CallKind::Approx) accounting = accounting && u.exact_calls == last_exact;
        last_exact = u.exact_calls;
        if (u.block) logged[*u.block][u.label] = true;
      });
      const auto r = t.train();
      CHECK(monotone);
      CHECK(accounting);

      for (std::size_t k = 1; k < r.trace.size(); ++k) {
        CHECK(r.trace[k].dual >= r.trace[k - 1].dual - relative_slack(r.trace[k - 1].dual));
        if (r.trace[k].pass_kind == PassKind::Approx) CHECK(r.trace[k].exact_calls == r.trace[k - 1].exact_calls);
      }
      for (const auto& rec : r.trace) {
        if (rec.gap) CHECK(*rec.gap >= -1e-9);
        if (rec.gap_avg) CHECK(*rec.gap_avg >= -1e-9);
        CHECK(rec.dual_avg.has_value() == is_averaged(algo));
      }

      // Every cached plane is the oracle plane of a logged label, and no
      // plane is older than the horizon at the start of the next iteration.
      for (std::size_t i = 0; i < task->size(); ++i) {
        for (const auto& e : t.working_set(i).entries()) {
          CHECK(logged[i].count(e.label) == 1);
          CHECK(e.plane == task->plane_for(i, e.label, task->size()));
          CHECK(t.iteration() + 1 - e.last_active <= config.inactivity);
        }
      }

      // Each block is a lower bound on its hinge term.
      std::mt19937_64 rng(31);
      for (int s = 0; s < 100; ++s) {
        const VectorD w = random_vector(task->dim(), rng);
        const std::size_t i = rng() % task->size();
        const double h = brute_force_oracle(*task, i, w, task->size()).value;
        CHECK(evaluate(t.state().block(i), w) <= h + 1e-12);
      }
    }
  }
}

TEST_CASE("gap tolerance stops MP-BCFW") {
  const auto task = toy_multiclass();
  auto config = config_for(Algorithm::MPBCFW, 200, 2);
  config.stopping.gap_tolerance = 1e-6;
  SimulatedClock clock(1000, 1);
  const auto r = train(task, config, clock);
  REQUIRE(r.trace.back().gap);
  CHECK(*r.trace.back().gap < 1e-6);
  CHECK(*r.trace.back().gap >= -1e-9);
  CHECK(r.iterations < 200);
}

TEST_CASE("time budget on a simulated clock") {
  const auto task = toy_multiclass(10);
  SolverConfig config;
  config.algorithm = Algorithm::BCFW;
  config.stopping.time_budget_seconds = 35.0;
  SimulatedClock clock(1, 1);
  const auto r = train(task, config, clock);
  // 10 calls per pass; primal evaluation time is not charged.
  CHECK(r.iterations == 4);
  CHECK(r.trace.back().elapsed_ms == doctest::Approx(40000.0));
}
