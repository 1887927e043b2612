#include "msdpool/distillation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace msdpool::distillation {

std::string to_string(Mitigation m) {
  switch (m) {
    case Mitigation::none: return "none";
    case Mitigation::racing: return "racing";
    case Mitigation::excessive_l1: return "excessive_l1";
  }
  return "none";
}

Mitigation parse_mitigation(const std::string& name) {
  if (name == "none") return Mitigation::none;
  if (name == "racing") return Mitigation::racing;
  if (name == "excessive_l1") return Mitigation::excessive_l1;
  throw ValidationError("unknown mitigation '" + name + "' (expected none, racing, excessive_l1)");
}

void PipelineConfig::validate() const {
  require(n_l1 >= 2 && n_l1 % 2 == 0, "n_l1 must be an even integer >= 2");
  require(l1_cycles >= 1 && l2_slot_cycles >= 1 && period >= 1 && transfer_cycles >= 1,
          "pipeline cycle counts must be >= 1");
  require(l1_fail >= 0.0 && l1_fail < 1.0, "l1_fail must be in [0, 1)");
  require(l2_fail >= 0.0 && l2_fail < 1.0, "l2_fail must be in [0, 1)");
  require(period % l2_slot_cycles == 0, "period must be a multiple of l2_slot_cycles");
  require(l1_cycles + transfer_cycles <= (n_l1 / 2) * l2_slot_cycles,
          "l1_cycles + transfer_cycles must fit in (n_l1 / 2) L2 slots so the failure-free "
          "period equals the nominal period");
  require(extra_blocks >= 0, "extra_blocks must be >= 0");
  require(mitigation == Mitigation::excessive_l1 || extra_blocks == 0,
          "extra_blocks is only used with the excessive_l1 mitigation");
}

int PipelineConfig::blocks_per_pipeline() const {
  return n_l1 / 2 + (mitigation == Mitigation::excessive_l1 ? extra_blocks : 0);
}

void CompletionDistribution::validate() const {
  require(!histogram.empty(), "completion distribution is empty");
  double total = 0.0;
  for (const auto& [extra, probability] : histogram) {
    require(extra >= 0, "completion distribution support must be non-negative");
    require(probability >= 0.0, "completion distribution probabilities must be non-negative");
    total += probability;
  }
  require(std::abs(total - 1.0) <= 1e-9, "completion distribution probabilities must sum to 1");
}

CompletionDistribution CompletionDistribution::point_mass(Cycle extra) {
  CompletionDistribution dist;
  dist.histogram[extra] = 1.0;
  dist.mean_extra = static_cast<double>(extra);
  return dist;
}

CompletionDistribution CompletionDistribution::from_samples(const std::vector<Cycle>& extras) {
  require(!extras.empty(), "cannot build a distribution from zero samples");
  std::map<Cycle, std::int64_t> counts;
  long double sum = 0;
  for (Cycle e : extras) {
    ++counts[e];
    sum += e;
  }
  CompletionDistribution dist;
  const auto n = static_cast<double>(extras.size());
  for (const auto& [extra, count] : counts) dist.histogram[extra] = static_cast<double>(count) / n;
  dist.mean_extra = static_cast<double>(sum / extras.size());
  return dist;
}

ExtraDelaySampler::ExtraDelaySampler(const CompletionDistribution& dist) {
  dist.validate();
  for (const auto& [extra, probability] : dist.histogram) {
    if (probability <= 0.0) continue;
    support_.push_back(extra);
    weights_.push_back(probability);
  }
  constant_ = support_.size() == 1;
}

Cycle ExtraDelaySampler::operator()(Rng& rng) const {
  if (constant_) return support_.front();
  std::discrete_distribution<std::size_t> pick(weights_.begin(), weights_.end());
  return support_[pick(rng)];
}

namespace {

struct L1Block {
  Cycle available = 0;  // its pending state reaches the L2 arena
  Rng rng;
};

class Pipeline {
 public:
  Pipeline(const PipelineConfig& config, int side, std::uint64_t seed) : config_(config) {
    const int blocks = config.blocks_per_pipeline();
    for (int b = 0; b < blocks; ++b) {
      // Warm start: block b's first state arrives just in time for slot b.
      blocks_.push_back({b * config.l2_slot_cycles,
                         Rng(derive_seed(seed, {static_cast<std::uint64_t>(side),
                                                static_cast<std::uint64_t>(b)}))});
    }
  }

  // Block whose state feeds the next slot.
  std::size_t choose() const {
    const std::size_t scheduled = static_cast<std::size_t>(slot_ % static_cast<std::int64_t>(blocks_.size()));
    if (config_.mitigation != Mitigation::racing) return scheduled;
    std::size_t best = scheduled;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      if (blocks_[b].available < blocks_[best].available) best = b;
    }
    return best;
  }

  Cycle available(std::size_t block) const { return blocks_[block].available; }

  // The state leaves the block at `at`; the block starts retrying right away.
  void consume(std::size_t block, Cycle at, PipelineCounters& counters) {
    auto& b = blocks_[block];
    Cycle attempts = 1;
    std::bernoulli_distribution fails(config_.l1_fail);
    while (config_.l1_fail > 0.0 && fails(b.rng)) ++attempts;
    counters.l1_attempts += attempts;
    counters.l1_failures += attempts - 1;
    ++counters.l1_states_consumed;
    b.available = at + attempts * config_.l1_cycles + config_.transfer_cycles;
    ++slot_;
  }

 private:
  const PipelineConfig& config_;
  std::vector<L1Block> blocks_;
  std::int64_t slot_ = 0;
};

}  // namespace

PipelineRun simulate_pipeline(const PipelineConfig& config, std::int64_t outputs, std::uint64_t seed) {
  config.validate();
  require(outputs >= 1, "output count must be >= 1");
  Pipeline left(config, 0, seed);
  Pipeline right(config, 1, seed);
  Rng l2_rng(derive_seed(seed, {2}));
  std::bernoulli_distribution l2_fails(config.l2_fail);

  PipelineRun run;
  run.output_times.reserve(static_cast<std::size_t>(outputs));
  std::vector<Cycle> extras;
  extras.reserve(static_cast<std::size_t>(outputs));
  Cycle slot_end = 0;
  Cycle previous_output = 0;
  while (run.counters.outputs < outputs) {
    ++run.counters.l2_rounds;
    for (int s = 0; s < config.slots_per_output(); ++s) {
      const auto lb = left.choose();
      const auto rb = right.choose();
      const Cycle start = std::max({slot_end, left.available(lb), right.available(rb)});
      left.consume(lb, start, run.counters);
      right.consume(rb, start, run.counters);
      slot_end = start + config.l2_slot_cycles;
    }
    if (config.l2_fail > 0.0 && l2_fails(l2_rng)) {
      ++run.counters.l2_failures;
      continue;
    }
    ++run.counters.outputs;
    run.output_times.push_back(slot_end);
    extras.push_back(std::max<Cycle>(0, slot_end - previous_output - config.period));
    previous_output = slot_end;
  }
  run.distribution = CompletionDistribution::from_samples(extras);
  return run;
}

std::vector<Cycle> sample_completion_stream(const CompletionDistribution& dist, Cycle period,
                                            std::int64_t count, std::uint64_t seed) {
  require(period >= 1, "period must be >= 1");
  require(count >= 0, "count must be >= 0");
  const ExtraDelaySampler sampler(dist);
  Rng rng(seed);
  std::vector<Cycle> stream;
  stream.reserve(static_cast<std::size_t>(count));
  Cycle t = 0;
  for (std::int64_t k = 0; k < count; ++k) {
    t += period + sampler(rng);
    stream.push_back(t);
  }
  return stream;
}

double logical_error_rate(int d, double p_phys) {
  require(d >= 1 && d % 2 == 1, "code distance must be a positive odd integer");
  require(p_phys > 0.0 && p_phys < 0.01, "p_phys must be in (0, 0.01)");
  return 0.1 * std::pow(100.0 * p_phys, (d + 1) / 2);
}

int choose_pool_distance(double magic_states, double expected_cycles, int d, double p_phys,
                         PoolBudget budget) {
  require(magic_states >= 1.0, "magic-state count L must be >= 1");
  require(expected_cycles >= 1.0, "expected distillation cycles E must be >= 1");
  require(d >= 1, "code distance d must be >= 1");
  require(magic_states * budget.msd_error < budget.budget,
          "L * msd_error already exhausts the error budget; no pool distance can satisfy it");
  for (int d_pool = 3;; d_pool += 2) {
    const double error =
        magic_states * (3.0 * (expected_cycles + d) * logical_error_rate(d_pool, p_phys) + budget.msd_error);
    if (error < budget.budget) return d_pool;
  }
}

std::int64_t pool_overhead_qubits(int entries, int d_pool) {
  require(entries >= 0, "pool entries must be >= 0");
  return static_cast<std::int64_t>(entries) * 3 * 2 * d_pool * d_pool;
}

double retained_states(int n, int m) {
  require(n >= 1 && m >= 1, "retained_states needs n >= 1 and m >= 1");
  return static_cast<double>(n - 1) * m / n;
}

std::int64_t first_eligible_completion(const std::vector<Cycle>& completions, std::int64_t from,
                                       Cycle earliest) {
  for (auto i = static_cast<std::size_t>(std::max<std::int64_t>(from, 0)); i < completions.size(); ++i) {
    if (completions[i] >= earliest) return static_cast<std::int64_t>(i);
  }
  return -1;
}

FactoryRuntime::FactoryRuntime(int id, Cycle period, Cycle cadence, int pool_capacity, int d_pool,
                               std::shared_ptr<const ExtraDelaySampler> sampler, std::uint64_t seed)
    : period_(period), cadence_(cadence), sampler_(std::move(sampler)), rng_(seed) {
  require(period >= 1, "factory period must be >= 1");
  require(cadence >= period, "factory cadence must be >= its period");
  require(pool_capacity >= 0, "pool capacity must be >= 0");
  require(sampler_ != nullptr, "factory needs an extra-delay sampler");
  pool_.capacity = pool_capacity;
  pool_.d_pool = d_pool;
  state_.id = id;
  if (pool_capacity > 0) start_production(0);
}

void FactoryRuntime::start_production(Cycle at) {
  state_.completion = at + period_ + (*sampler_)(rng_);
  state_.blocked = false;
}

Cycle FactoryRuntime::round_completion(std::int64_t round) {
  while (static_cast<std::int64_t>(rounds_.size()) <= round) {
    const auto r = static_cast<Cycle>(rounds_.size());
    const Cycle start = std::max(r * cadence_, rounds_.empty() ? Cycle{0} : rounds_.back());
    rounds_.push_back(start + period_ + (*sampler_)(rng_));
  }
  return rounds_[static_cast<std::size_t>(round)];
}

void FactoryRuntime::pool_step(Cycle now) {
  if (pool_.capacity == 0) return;
  while (!state_.blocked && state_.completion <= now) {
    if (static_cast<int>(pool_.occupancy.size()) < pool_.capacity) {
      pool_.occupancy.push_back({state_.in_production, state_.completion});
      ++state_.in_production;
      start_production(state_.completion);
    } else {
      state_.blocked = true;
    }
  }
}

Cycle FactoryRuntime::serve(const Request& request) {
  if (pool_.capacity == 0) {
    const Cycle earliest = request.round_start + request.delay + period_;
    std::int64_t round = last_round_ + 1;
    while (round_completion(round) < earliest) ++round;
    last_round_ = round;
    return rounds_[static_cast<std::size_t>(round)];
  }

  pool_step(request.need);
  ++last_round_;
  if (!pool_.occupancy.empty()) {
    pool_.occupancy.pop_front();
    if (state_.blocked) {
      // The held output takes the freed entry and the factory resumes.
      pool_.occupancy.push_back({state_.in_production, request.need});
      ++state_.in_production;
      start_production(request.need);
      pool_step(request.need);
    }
    return request.need;
  }
  // Empty pool: the state in production passes straight to the consumer.
  const Cycle done = state_.completion;
  ++state_.in_production;
  start_production(done);
  return done;
}

}  // namespace msdpool::distillation
