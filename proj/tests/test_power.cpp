#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "d2dnc/power.hpp"
#include "d2dnc/rng.hpp"
#include "support/oracles.hpp"

using namespace d2dnc;

namespace {

// Two transmitters with asymmetric coupling: link 1->3 is strong (direct 2)
// but badly exposed to transmitter 0 (cross 8), link 0->2 is weak (direct
// 0.1) with mild exposure (cross 1). Protecting the strong link means backing
// transmitter 0 almost completely off.
ScheduleContext asymmetric_pair(const Mat& g) {
  ScheduleContext ctx;
  ctx.transmitters = {0, 1};
  ctx.targets = {{2}, {3}};
  ctx.gains = &g;
  ctx.noise_w = 1.0;
  ctx.qmax_w = 1.0;
  return ctx;
}

Mat asymmetric_gains() {
  Mat g = Mat::square(4, 0.0);
  g(0, 2) = 0.1;
  g(1, 3) = 2.0;
  g(0, 3) = 8.0;
  g(1, 2) = 1.0;
  return g;
}

}  // namespace

TEST_CASE("sum capacity on hand-checked configurations") {
  Mat g = asymmetric_gains();
  ScheduleContext ctx = asymmetric_pair(g);
  CHECK(sum_capacity(ctx, {0.0, 0.0, 0.0, 0.0}) == doctest::Approx(0.0));
  const double expect = std::log2(1.0 + 0.1 / 2.0) + std::log2(1.0 + 2.0 / 9.0);
  CHECK(sum_capacity(ctx, {1.0, 1.0, 0.0, 0.0}) == doctest::Approx(expect).epsilon(1e-15));

  Mat g2 = Mat::square(2, 0.0);
  g2(0, 1) = 1.0;
  ScheduleContext lone;
  lone.transmitters = {0};
  lone.targets = {{1}};
  lone.gains = &g2;
  lone.noise_w = 1.0;
  lone.qmax_w = 4.0;
  CHECK(sum_capacity(lone, {1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sum_capacity(lone, {3.0, 0.0}) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("one synchronous update from full power") {
  Mat g = asymmetric_gains();
  ScheduleContext ctx = asymmetric_pair(g);
  std::vector<double> next = power_update_step(ctx, {1.0, 1.0, 0.0, 0.0});
  REQUIRE(next.size() == 4);
  // transmitter 0: num = (0.05/1.05), den = (2/11)^2 * 8/2 -> 121/336
  CHECK(next[0] == doctest::Approx(121.0 / 336.0).epsilon(1e-14));
  // transmitter 1 wants ~8x the cap and clamps
  CHECK(next[1] == 1.0);
  CHECK(next[2] == 0.0);
  CHECK(next[3] == 0.0);
}

TEST_CASE("a lone transmitter saturates immediately") {
  Mat g = Mat::square(2, 0.0);
  g(0, 1) = 3.0;
  ScheduleContext ctx;
  ctx.transmitters = {0};
  ctx.targets = {{1}};
  ctx.gains = &g;
  ctx.noise_w = 2.0;
  ctx.qmax_w = 5.0;
  PowerResult res = allocate_power(ctx);
  CHECK(res.converged);
  CHECK(res.iterations == 1);
  CHECK(res.powers_w == std::vector<double>{5.0, 0.0});
  CHECK(res.objective == doctest::Approx(std::log2(1.0 + 5.0 * 3.0 / 2.0)).epsilon(1e-15));
  CHECK(res.fixed_point_residual == 0.0);
  REQUIRE(res.objective_trace.size() == 2);
  CHECK(res.objective_trace.back() == res.objective);
}

TEST_CASE("a dead direct link gets zero power") {
  Mat g = Mat::square(3, 0.0);
  g(1, 2) = 4.0;
  g(0, 1) = 0.5;  // irrelevant: device 1 is the other transmitter, not a target
  ScheduleContext ctx;
  ctx.transmitters = {0, 1};
  ctx.targets = {{2}, {}};
  ctx.gains = &g;
  ctx.noise_w = 1.0;
  ctx.qmax_w = 1.0;
  // transmitter 0 reaches its only target through a zero gain
  PowerResult res = allocate_power(ctx);
  CHECK(res.powers_w[0] == 0.0);
  CHECK(res.objective == doctest::Approx(0.0));
}

TEST_CASE("negligible coupling sends every transmitter to full power") {
  Mat g = Mat::square(4, 1e-9);
  for (int i = 0; i < 4; ++i) g(i, i) = 0.0;
  g(0, 2) = 10.0;
  g(1, 3) = 10.0;
  ScheduleContext ctx = asymmetric_pair(g);
  ctx.qmax_w = 0.7;
  PowerResult res = allocate_power(ctx);
  CHECK(res.converged);
  CHECK(res.powers_w[0] == 0.7);
  CHECK(res.powers_w[1] == 0.7);
  CHECK(res.objective >= 0.99 * oracles::grid_best_objective(ctx));
}

TEST_CASE("the asymmetric pair backs the weak transmitter off") {
  Mat g = asymmetric_gains();
  ScheduleContext ctx = asymmetric_pair(g);
  ctx.max_iterations = 200;
  ctx.rel_tolerance = 1e-10;
  PowerResult res = allocate_power(ctx);
  CHECK(res.converged);
  CHECK(res.powers_w[0] < 0.01);
  CHECK(res.powers_w[1] == doctest::Approx(1.0));
  CHECK(res.fixed_point_residual < 1e-6 * ctx.qmax_w);
  CHECK(res.objective >= 0.99 * oracles::grid_best_objective(ctx));
  CHECK(res.objective_trace.back() == res.objective);
  CHECK(res.objective_trace.size() == static_cast<size_t>(res.iterations) + 1);
}

TEST_CASE("the initial power is honored and clamped") {
  Mat g = asymmetric_gains();
  ScheduleContext ctx = asymmetric_pair(g);
  ctx.q_init_w = 0.25;
  PowerResult res = allocate_power(ctx);
  CHECK(res.objective_trace.front() ==
        doctest::Approx(sum_capacity(ctx, {0.25, 0.25, 0.0, 0.0})).epsilon(1e-15));

  ctx.q_init_w = 5.0;  // above the cap: behaves like full power
  PowerResult clamped = allocate_power(ctx);
  CHECK(clamped.objective_trace.front() ==
        doctest::Approx(sum_capacity(ctx, {1.0, 1.0, 0.0, 0.0})).epsilon(1e-15));

  ctx.q_init_w = 0.0;  // unset: full power
  PowerResult full = allocate_power(ctx);
  CHECK(full.objective_trace.front() == clamped.objective_trace.front());
}

TEST_CASE("the in-place sweep converges to the same protection") {
  Mat g = asymmetric_gains();
  ScheduleContext ctx = asymmetric_pair(g);
  ctx.gauss_seidel = true;
  ctx.max_iterations = 200;
  ctx.rel_tolerance = 1e-10;
  PowerResult res = allocate_power(ctx);
  CHECK(res.converged);
  CHECK(res.powers_w[0] < 0.01);
  CHECK(res.objective >= 0.99 * oracles::grid_best_objective(ctx));
}

TEST_CASE("random contexts stay within bounds and are deterministic") {
  auto rng = make_rng(601);
  int converged = 0;
  const int reps = 60;
  for (int rep = 0; rep < reps; ++rep) {
    const int ntx = 2 + static_cast<int>(rng() % 3);
    const int devices = 2 * ntx + 2 + static_cast<int>(rng() % 3);
    Mat g = oracles::random_gains(devices, rng);
    std::vector<int> ids(devices);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    ScheduleContext ctx;
    ctx.gains = &g;
    ctx.noise_w = 1.0;
    ctx.qmax_w = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
    ctx.max_iterations = 200;
    ctx.rel_tolerance = 1e-8;
    size_t next = 0;
    for (int k = 0; k < ntx; ++k) {
      ctx.transmitters.push_back(ids[next++]);
      ctx.targets.emplace_back();
    }
    for (int k = 0; k < ntx; ++k) {
      const int span = 1 + static_cast<int>(rng() % 2);
      for (int i = 0; i < span && next < ids.size(); ++i) ctx.targets[k].push_back(ids[next++]);
    }

    PowerResult res = allocate_power(ctx);
    converged += res.converged ? 1 : 0;
    for (int u = 0; u < devices; ++u) {
      CHECK(res.powers_w[u] >= 0.0);
      CHECK(res.powers_w[u] <= ctx.qmax_w);
      if (std::find(ctx.transmitters.begin(), ctx.transmitters.end(), u) ==
          ctx.transmitters.end())
        CHECK(res.powers_w[u] == 0.0);
    }
    CHECK(res.objective_trace.size() == static_cast<size_t>(res.iterations) + 1);
    CHECK(res.objective_trace.back() == res.objective);
    CHECK(res.objective == doctest::Approx(sum_capacity(ctx, res.powers_w)).epsilon(1e-12));
    CHECK(res.fixed_point_residual >= 0.0);

    PowerResult again = allocate_power(ctx);
    CHECK(again.powers_w == res.powers_w);
    CHECK(again.iterations == res.iterations);
  }
  CHECK(converged >= reps - 6);
}

TEST_CASE("invalid contexts are rejected") {
  Mat g = asymmetric_gains();
  ScheduleContext ctx = asymmetric_pair(g);

  ScheduleContext no_gains = ctx;
  no_gains.gains = nullptr;
  CHECK_THROWS_WITH_AS(allocate_power(no_gains), "power: missing gain matrix",
                       std::invalid_argument);

  ScheduleContext no_tx = ctx;
  no_tx.transmitters.clear();
  no_tx.targets.clear();
  CHECK_THROWS_WITH_AS(allocate_power(no_tx), "power: no transmitters", std::invalid_argument);

  ScheduleContext mismatched = ctx;
  mismatched.targets.pop_back();
  CHECK_THROWS_WITH_AS(allocate_power(mismatched), "power: target lists do not match transmitters",
                       std::invalid_argument);

  ScheduleContext no_cap = ctx;
  no_cap.qmax_w = 0.0;
  CHECK_THROWS_WITH_AS(allocate_power(no_cap), "power: qmax must be positive",
                       std::invalid_argument);

  ScheduleContext doubled = ctx;
  doubled.transmitters = {0, 0};
  CHECK_THROWS_WITH_AS(allocate_power(doubled), "power: duplicate transmitter", std::logic_error);

  ScheduleContext overlap = ctx;
  overlap.targets = {{2}, {2}};
  CHECK_THROWS_WITH_AS(allocate_power(overlap), "power: device scheduled twice", std::logic_error);

  ScheduleContext self = ctx;
  self.targets = {{1}, {3}};  // device 1 transmits and receives
  CHECK_THROWS_AS(sum_capacity(self, {1.0, 1.0, 0.0, 0.0}), std::logic_error);
}
