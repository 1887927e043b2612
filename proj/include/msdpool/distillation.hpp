#pragma once

// Magic-state factories: a pipelined two-level distillation model with L1
// failures, the completion-time distribution it induces, completion streams
// sampled from that distribution, the FIFO pool attached to a factory, and
// the pool's code-distance and qubit-count formulas.

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "msdpool/random.hpp"
#include "msdpool/types.hpp"

namespace msdpool::distillation {

/// Physical qubits of one (15-to-1)^4 x (8-to-CCZ) factory.
inline constexpr std::int64_t kFactoryQubits = 34052;

enum class Mitigation { none, racing, excessive_l1 };

std::string to_string(Mitigation m);
Mitigation parse_mitigation(const std::string& name);

/// One factory: n_l1 level-1 blocks split across two pipelines feeding an L2
/// arena that consumes one L1 state from each pipeline per slot. An output
/// takes period / l2_slot_cycles slots.
struct PipelineConfig {
  int n_l1 = 4;
  Cycle l1_cycles = 25;
  double l1_fail = 0.05;
  Cycle l2_slot_cycles = 15;
  double l2_fail = 0.01;
  Cycle period = 60;  // nominal cycles per output, D
  Cycle transfer_cycles = 5;
  Mitigation mitigation = Mitigation::none;
  int extra_blocks = 0;  // per pipeline, used by excessive_l1

  void validate() const;
  int slots_per_output() const { return static_cast<int>(period / l2_slot_cycles); }
  int blocks_per_pipeline() const;
};

/// Distribution of the extra cycles an output takes beyond the nominal period.
struct CompletionDistribution {
  std::map<Cycle, double> histogram;
  double mean_extra = 0.0;

  void validate() const;
  static CompletionDistribution point_mass(Cycle extra);
  static CompletionDistribution from_samples(const std::vector<Cycle>& extras);
};

/// Draws extra delays from a CompletionDistribution.
class ExtraDelaySampler {
 public:
  explicit ExtraDelaySampler(const CompletionDistribution& dist);
  Cycle operator()(Rng& rng) const;

 private:
  std::vector<Cycle> support_;
  std::vector<double> weights_;
  bool constant_ = false;
};

struct PipelineCounters {
  std::int64_t outputs = 0;
  std::int64_t l2_rounds = 0;
  std::int64_t l2_failures = 0;
  std::int64_t l1_attempts = 0;
  std::int64_t l1_failures = 0;
  std::int64_t l1_states_consumed = 0;
};

struct PipelineRun {
  CompletionDistribution distribution;  // of (output interval - period)
  PipelineCounters counters;
  std::vector<Cycle> output_times;
};

/// Event-driven run of one factory for `outputs` successful L2 outputs.
/// Each L1 block retries immediately on failure. With mitigation none (or
/// excessive_l1, which only adds blocks) slot j of a pipeline waits for block
/// j mod blocks; with racing it takes the earliest ready block. An L1 state is
/// consumed at its slot start, which frees the block for its next attempt.
/// An L2 failure discards the whole L2 round.
PipelineRun simulate_pipeline(const PipelineConfig& config, std::int64_t outputs, std::uint64_t seed);

/// Completion k = (k + 1) * period + sum of the first k + 1 sampled extras.
std::vector<Cycle> sample_completion_stream(const CompletionDistribution& dist, Cycle period,
                                            std::int64_t count, std::uint64_t seed);

/// Logical error probability per cycle: 0.1 * (100 p_phys)^((d + 1) / 2).
double logical_error_rate(int d, double p_phys);

struct PoolBudget {
  double budget = 0.005;
  double msd_error = 1.8e-10;
};

/// Smallest odd d_pool >= 3 with L (3 (E + d) p_L(d_pool) + msd_error) < budget.
int choose_pool_distance(double magic_states, double expected_cycles, int d, double p_phys,
                         PoolBudget budget = {});

/// entries * 3 * 2 * d_pool^2.
std::int64_t pool_overhead_qubits(int entries, int d_pool);

/// Average states retained by an n*m-entry pool when a state is distilled
/// and consumed every n*d cycles: (n - 1) m / n.
double retained_states(int n, int m);

struct PoolEntry {
  std::int64_t state = 0;  // production index at the factory
  Cycle ready = 0;         // cycle it entered the pool
};

struct Pool {
  int capacity = 0;  // 0 disables pooling
  int d_pool = 0;
  std::deque<PoolEntry> occupancy;
};

/// The factory side of a pooled factory: one state in production at a time.
struct FactoryState {
  int id = 0;
  std::int64_t in_production = 0;  // index of the state being distilled
  Cycle completion = 0;            // when it finishes
  bool blocked = false;            // finished, waiting for pool space
  std::int64_t discarded = 0;      // always 0 with blocking; kept for reporting
};

/// Run-time view of one factory. Requests must arrive in the factory's
/// round-assignment order.
///
/// Without a pool the factory distills round r starting at
/// max(r * cadence, previous completion) and a request takes the first round
/// after the previously served one whose completion is at or after
/// round_start + delay + period; states nobody takes are dropped.
///
/// With a pool the factory distills back to back into the FIFO and blocks
/// while the pool is full. A request takes the pool head if the pool is
/// occupied when it needs a state, otherwise the state currently in
/// production.
class FactoryRuntime {
 public:
  struct Request {
    Cycle round_start = 0;  // scheduled start of the assigned round, c_d
    Cycle need = 0;         // c + delay + d
    Cycle delay = 0;        // consumer delay just before the request
  };

  FactoryRuntime(int id, Cycle period, Cycle cadence, int pool_capacity, int d_pool,
                 std::shared_ptr<const ExtraDelaySampler> sampler, std::uint64_t seed);

  /// Cycle at which the state for this request is available to the consumer.
  Cycle serve(const Request& request);

  /// Moves completed productions into the pool up to `now`.
  void pool_step(Cycle now);

  const Pool& pool() const { return pool_; }
  const FactoryState& state() const { return state_; }
  std::int64_t last_round() const { return last_round_; }

 private:
  Cycle round_completion(std::int64_t round);
  void start_production(Cycle at);

  Cycle period_;
  Cycle cadence_;
  std::shared_ptr<const ExtraDelaySampler> sampler_;
  Rng rng_;
  Pool pool_;
  FactoryState state_;
  std::vector<Cycle> rounds_;  // no-pool completions, extended lazily
  std::int64_t last_round_ = -1;
};

/// First index >= from whose completion is >= earliest; -1 if none in the span.
std::int64_t first_eligible_completion(const std::vector<Cycle>& completions, std::int64_t from,
                                       Cycle earliest);

}  // namespace msdpool::distillation
