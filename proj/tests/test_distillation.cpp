#include <doctest.h>

#include <cmath>
#include <memory>

#include "msdpool/distillation.hpp"

using namespace msdpool;
using namespace msdpool::distillation;

namespace {

PipelineConfig failure_free() {
  PipelineConfig c;
  c.l1_fail = 0.0;
  c.l2_fail = 0.0;
  return c;
}

// Time-slice picture of an n*m-entry pool made of m lanes of n entries. Each
// lane receives a state every n slices at its left end; a state advances one
// entry per slice and is consumed on reaching the right end.
double simulated_retention(int n, int m) {
  std::vector<std::vector<bool>> lanes(static_cast<std::size_t>(m), std::vector<bool>(static_cast<std::size_t>(n)));
  const int warmup = n, slices = n * 200;
  long filled = 0;
  for (int t = 0; t < warmup + slices; ++t) {
    for (int j = 0; j < m; ++j) {
      auto& lane = lanes[static_cast<std::size_t>(j)];
      for (int k = n - 1; k > 0; --k) lane[static_cast<std::size_t>(k)] = lane[static_cast<std::size_t>(k - 1)];
      lane[0] = (t + j) % n == 0;
      lane[static_cast<std::size_t>(n - 1)] = false;  // reached the right end: consumed
      if (t >= warmup) {
        for (bool cell : lane) filled += cell;
      }
    }
  }
  return static_cast<double>(filled) / slices;
}

// Independent inequality form of the pool-distance rule.
bool pool_distance_fits(double L, double E, int d, double p_phys, int d_pool) {
  const double p_l = 0.1 * std::pow(100 * p_phys, (d_pool + 1) / 2.0);
  return L * 3 * (E + d) * p_l + L * 1.8e-10 < 0.005;
}

std::shared_ptr<const ExtraDelaySampler> sampler_for(const CompletionDistribution& dist) {
  return std::make_shared<const ExtraDelaySampler>(dist);
}

}  // namespace

TEST_CASE("mitigation names round-trip") {
  for (auto m : {Mitigation::none, Mitigation::racing, Mitigation::excessive_l1}) {
    CHECK(parse_mitigation(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_mitigation("fastest"), ValidationError);
}

TEST_CASE("failure-free pipeline hits the nominal period") {
  const auto config = failure_free();
  const auto run = simulate_pipeline(config, 500, 1);
  CHECK(run.distribution.mean_extra == 0.0);
  REQUIRE(run.distribution.histogram.size() == 1);
  CHECK(run.distribution.histogram.at(0) == 1.0);
  for (std::size_t k = 1; k < run.output_times.size(); ++k) {
    CHECK(run.output_times[k] - run.output_times[k - 1] == config.period);
  }
}

TEST_CASE("pipeline consumes exactly the protocol's L1 states") {
  for (double l1 : {0.0, 0.05, 0.3}) {
    auto config = PipelineConfig{};
    config.l1_fail = l1;
    config.l2_fail = 0.1;
    const auto run = simulate_pipeline(config, 2000, 9);
    const auto& c = run.counters;
    CHECK(c.outputs == 2000);
    CHECK(c.l2_rounds == c.outputs + c.l2_failures);
    CHECK(c.l1_states_consumed == 2 * config.slots_per_output() * c.l2_rounds);
    CHECK(c.l1_attempts - c.l1_failures >= c.l1_states_consumed);
  }
}

TEST_CASE("level-1 failures delay outputs") {
  PipelineConfig config;
  config.l1_fail = 0.05;
  config.l2_fail = 0.001;
  const auto run = simulate_pipeline(config, 20000, 3);
  CHECK(run.distribution.mean_extra > 0.0);
  CHECK(run.distribution.histogram.at(0) < 1.0);
  double total = 0;
  for (const auto& [extra, p] : run.distribution.histogram) {
    CHECK(extra >= 0);
    total += p;
  }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("racing and extra blocks never hurt") {
  PipelineConfig config;
  config.n_l1 = 2;
  config.l1_cycles = 10;
  config.transfer_cycles = 2;
  config.l1_fail = 0.5;
  config.l2_fail = 0.0;
  const auto none = simulate_pipeline(config, 100000, 5);
  config.mitigation = Mitigation::racing;
  const auto racing = simulate_pipeline(config, 100000, 5);
  CHECK(racing.distribution.mean_extra <= none.distribution.mean_extra);

  for (std::uint64_t seed : {1u, 2u, 3u}) {
    PipelineConfig base;
    const auto n = simulate_pipeline(base, 10000, seed);
    base.mitigation = Mitigation::racing;
    const auto r = simulate_pipeline(base, 10000, seed);
    base.mitigation = Mitigation::excessive_l1;
    base.extra_blocks = 1;
    const auto x = simulate_pipeline(base, 10000, seed);
    CHECK(r.distribution.mean_extra <= n.distribution.mean_extra);
    CHECK(x.distribution.mean_extra <= n.distribution.mean_extra);
  }
}

TEST_CASE("pipeline config validation") {
  PipelineConfig c;
  c.period = 50;  // not a whole number of L2 slots
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = PipelineConfig{};
  c.n_l1 = 3;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = PipelineConfig{};
  c.l1_fail = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("completion distribution validation") {
  CompletionDistribution bad;
  bad.histogram = {{0, 0.5}, {3, 0.4}};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad.histogram = {{-1, 1.0}};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  const auto sampled = CompletionDistribution::from_samples({0, 0, 5, 10});
  CHECK(sampled.mean_extra == 3.75);
  CHECK(sampled.histogram.at(0) == 0.5);
}

TEST_CASE("completion streams") {
  CHECK(sample_completion_stream(CompletionDistribution::point_mass(0), 60, 4, 1) ==
        std::vector<Cycle>{60, 120, 180, 240});
  CHECK(sample_completion_stream(CompletionDistribution::point_mass(5), 10, 3, 1) == std::vector<Cycle>{15, 30, 45});

  const auto dist = simulate_pipeline(PipelineConfig{}, 5000, 2).distribution;
  const auto a = sample_completion_stream(dist, 60, 1000, 77);
  CHECK(a == sample_completion_stream(dist, 60, 1000, 77));
  for (std::size_t k = 1; k < a.size(); ++k) CHECK(a[k] - a[k - 1] >= 60);
}

TEST_CASE("logical error rate") {
  CHECK(logical_error_rate(27, 1e-3) == doctest::Approx(1e-15));
  CHECK(logical_error_rate(23, 1e-3) == doctest::Approx(1e-13));
  CHECK(logical_error_rate(1, 1e-3) == doctest::Approx(0.01));
}

TEST_CASE("pool distance") {
  CHECK(choose_pool_distance(16777216, 100, 27, 1e-3) == 23);
  for (int E = 60; E <= 366; ++E) CHECK(choose_pool_distance(16777216, E, 27, 1e-3) == 23);
  CHECK(choose_pool_distance(1, 1, 1, 1e-3) == 5);
  CHECK_THROWS_AS(choose_pool_distance(std::pow(2.0, 40), 100, 27, 1e-3), ValidationError);
}

TEST_CASE("pool distance agrees with an inequality scan") {
  for (double L : {1.0, 1e3, 1e6, 16777216.0}) {
    for (double E : {1.0, 60.0, 500.0, 1e4}) {
      int expected = 3;
      while (!pool_distance_fits(L, E, 27, 1e-3, expected)) expected += 2;
      CHECK(choose_pool_distance(L, E, 27, 1e-3) == expected);
    }
  }
}

TEST_CASE("pool distance monotonicity") {
  int prev_L = 0;
  for (double L = 1; L <= 1e7; L *= 10) {
    int prev_E = 0;
    for (double E = 1; E <= 1e5; E *= 4) {
      const int dp = choose_pool_distance(L, E, 27, 1e-3);
      CHECK(dp >= prev_E);
      prev_E = dp;
    }
    const int dp = choose_pool_distance(L, 100, 27, 1e-3);
    CHECK(dp >= prev_L);
    prev_L = dp;
  }
  int prev_budget = 1000;
  for (double budget : {1e-3, 5e-3, 1e-2, 1e-1}) {
    const int dp = choose_pool_distance(1e6, 100, 27, 1e-3, {budget, 1.8e-10});
    CHECK(dp <= prev_budget);
    prev_budget = dp;
  }
}

TEST_CASE("pool overhead") {
  CHECK(pool_overhead_qubits(1, 23) == 3174);
  CHECK(std::abs(3174.0 / kFactoryQubits - 0.0932) < 1e-4);
  CHECK(pool_overhead_qubits(0, 23) == 0);
  CHECK(pool_overhead_qubits(2, 23) == 6348);
  CHECK(70 * (kFactoryQubits + pool_overhead_qubits(2, 23)) == 2828000);
}

TEST_CASE("retained states match the occupancy simulation") {
  CHECK(retained_states(1, 4) == 0.0);
  CHECK(retained_states(2, 1) == 0.5);
  for (int n = 1; n <= 6; ++n) {
    for (int m = 1; m <= 4; ++m) {
      CAPTURE(n);
      CAPTURE(m);
      CHECK(retained_states(n, m) == doctest::Approx(simulated_retention(n, m)));
    }
  }
  CHECK(retained_states(3, 2) == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("eligible completion search") {
  const std::vector<Cycle> completions{22, 32, 42, 52};
  CHECK(first_eligible_completion(completions, 0, 12 + 0 + 10) == 0);
  CHECK(first_eligible_completion(completions, 0, 12 + 5 + 10) == 1);
  CHECK(first_eligible_completion(completions, 2, 0) == 2);
  CHECK(first_eligible_completion(completions, 0, 100) == -1);
}

TEST_CASE("unpooled factory serves the first late-enough round") {
  // Rounds every 10 cycles complete at 10, 20, 30, ...; the traces below are
  // the hand-derived executor examples shifted by -2 cycles.
  FactoryRuntime factory(0, 10, 10, 0, 0, sampler_for(CompletionDistribution::point_mass(0)), 1);
  const Cycle c = 18, d = 2;
  const Cycle e = factory.serve({10, c + 0 + d, 0});
  CHECK(e == 20);
  CHECK(std::max(c + d, e) - c - d == 0);

  FactoryRuntime late(0, 10, 10, 0, 0, sampler_for(CompletionDistribution::point_mass(0)), 1);
  const Cycle e2 = late.serve({10, c + 5 + d, 5});
  CHECK(e2 == 30);
  CHECK(std::max(c + 5 + d, e2) == 30);
  CHECK(std::max(c + 5 + d, e2) - c - d == 10);
  // the next request cannot reuse a round at or before the one just served
  CHECK(late.serve({10, 0, 0}) == 40);
}

TEST_CASE("unpooled factory at cadence D reproduces the completion stream") {
  const auto dist = simulate_pipeline(PipelineConfig{}, 5000, 4).distribution;
  const auto stream = sample_completion_stream(dist, 60, 200, 99);
  FactoryRuntime factory(0, 60, 60, 0, 0, sampler_for(dist), 99);
  for (std::size_t k = 0; k < stream.size(); ++k) {
    CHECK(factory.serve({static_cast<Cycle>(k) * 60, 0, 0}) == stream[k]);
  }
}

TEST_CASE("pooled factory state machine") {
  const auto sampler = sampler_for(CompletionDistribution::point_mass(0));
  SUBCASE("empty pool passes the next completion through") {
    FactoryRuntime f(0, 10, 10, 1, 23, sampler, 1);
    CHECK(f.serve({0, 5, 0}) == 10);
    CHECK(f.pool().occupancy.empty());
  }
  SUBCASE("idle factory fills the pool, then blocks") {
    FactoryRuntime f(0, 10, 10, 1, 23, sampler, 1);
    f.pool_step(10);
    REQUIRE(f.pool().occupancy.size() == 1);
    CHECK(f.pool().occupancy.front().ready == 10);
    f.pool_step(25);
    CHECK(f.pool().occupancy.size() == 1);
    CHECK(f.state().blocked);
  }
  SUBCASE("pooled state is served on demand and the held output refills") {
    FactoryRuntime f(0, 10, 10, 1, 23, sampler, 1);
    f.pool_step(25);
    CHECK(f.serve({0, 25, 0}) == 25);
    REQUIRE(f.pool().occupancy.size() == 1);
    CHECK(f.pool().occupancy.front().state == 1);
    CHECK_FALSE(f.state().blocked);
  }
}

TEST_CASE("pool stays within capacity and FIFO") {
  const auto dist = simulate_pipeline(PipelineConfig{}, 5000, 6).distribution;
  for (int capacity : {1, 2, 5}) {
    FactoryRuntime f(0, 60, 60, capacity, 23, sampler_for(dist), 8);
    Rng rng(capacity);
    std::uniform_int_distribution<Cycle> gap(0, 150);
    Cycle t = 0;
    std::int64_t last_state = -1;
    for (int k = 0; k < 2000; ++k) {
      t += gap(rng);
      const bool had_state = [&] {
        f.pool_step(t);
        return !f.pool().occupancy.empty();
      }();
      const auto head = had_state ? f.pool().occupancy.front().state : -1;
      const Cycle e = f.serve({0, t, 0});
      CHECK(e >= t);
      if (had_state) {
        CHECK(e == t);
        CHECK(head > last_state);
        last_state = head;
      }
      CHECK(static_cast<int>(f.pool().occupancy.size()) <= capacity);
      for (std::size_t i = 1; i < f.pool().occupancy.size(); ++i) {
        CHECK(f.pool().occupancy[i].state > f.pool().occupancy[i - 1].state);
        CHECK(f.pool().occupancy[i].ready >= f.pool().occupancy[i - 1].ready);
      }
      t = std::max(t, e);
    }
  }
}
