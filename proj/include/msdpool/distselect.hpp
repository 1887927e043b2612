#pragma once

// M-multiplexed SELECT circuits sharing one set of Pauli target qubits:
// DAG construction, greedy scheduling with magic-state round assignment, and
// run-time execution with delay propagation and optional pooling.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "msdpool/distillation.hpp"
#include "msdpool/types.hpp"

namespace msdpool::distselect {

struct DistSelectParams {
  Cycle d = 27;
  int d_pool = 23;
  int num_factories = 16;
  int M = 16;              // sub-circuits
  int P = 8;               // controlled Paulis that may overlap on the targets
  std::int64_t N = 256;    // Pauli target qubits (spatial estimate only)
  std::int64_t L = 65536;  // SELECT length
  Cycle D = 60;            // nominal distillation period
  double p_phys = 1e-3;
  int pool_entries = 0;
  Cycle consumption_period = 60;  // scheduler cadence per factory, >= D

  // Iteration template, in units of d.
  int magic_prep_d = 1;
  int clifford_d = 2;
  int pauli_d = 2;
  int uncompute_d = 1;

  void validate() const;
  std::int64_t iterations_per_sub_circuit() const { return L / M; }
};

enum class OpKind { clifford, pauli_on_target, magic_prep, measurement };

struct OperationNode {
  int id = 0;
  int sub_circuit = 0;
  OpKind kind = OpKind::clifford;
  Cycle duration = 0;
  std::vector<int> ancestors;
};

struct Dag {
  std::vector<OperationNode> nodes;
  std::vector<std::vector<int>> descendants;
};

/// Each sub-circuit is a chain of L/M iterations of
///   magic_prep (CCZ teleport in) -> clifford -> pauli_on_target -> measurement
/// with iteration i+1 depending on iteration i. Sub-circuits share nothing in
/// the DAG; the Pauli targets are a scheduler resource.
Dag build_dag(const DistSelectParams& params);

/// Delay resources: one per sub-circuit, then a single one for all Pauli targets.
int resource_of(const OperationNode& node, int sub_circuits);

struct RoundAssignment {
  int factory = 0;
  std::int64_t round = 0;
  Cycle start = 0;  // c_d = round * consumption_period
};

struct SlotAssignment {
  int slot = 0;
  Cycle start = 0;
};

struct Schedule {
  std::vector<Cycle> clock;
  std::vector<std::optional<RoundAssignment>> rounds;
  std::vector<std::optional<SlotAssignment>> slots;
  std::vector<int> order;  // scheduling order; also the execution order
  Cycle scheduled_cost = 0;
};

/// Per-factory round bookkeeping for assign_round. Rounds of one factory are
/// handed out in increasing order, which is the order run-time service uses.
struct FactoryBook {
  std::vector<std::int64_t> last_round;  // -1 when nothing assigned yet

  explicit FactoryBook(int factories) : last_round(static_cast<std::size_t>(factories), -1) {}
};

/// Picks the (factory, round) minimizing the consumer blockage
/// max(0, c_d + D - (c + d)) among rounds with c_d >= c + d - 2D that come
/// after the factory's last assigned round. Ties go to the lowest factory id,
/// then the lowest round. Marks the round assigned.
RoundAssignment assign_round(Cycle request_clock, FactoryBook& book, const DistSelectParams& params);

/// Greedy list scheduling in clock order: a node starts at the latest
/// ancestor end, pushed later by the earliest free Pauli slot or by the
/// blockage of its magic-state round.
Schedule schedule(const Dag& dag, const DistSelectParams& params);

/// Throws ValidationError unless ancestor ordering, P-slot capacity, round
/// uniqueness, in-order rounds per factory and the 2D - d window all hold.
void validate_schedule(const Dag& dag, const Schedule& schedule, const DistSelectParams& params);

struct ExecuteOptions {
  /// Extra cycles added to a node's delay when it runs (node id -> cycles).
  std::map<int, Cycle> injected_delay;
};

struct ExecutionResult {
  Cycle total = 0;
  Cycle runtime_delay = 0;            // total - S
  std::vector<Cycle> node_delay;      // delay of each node's resource after it ran
  std::vector<Cycle> completion;      // actual end cycle of each node
  std::vector<Cycle> resource_delay;  // final per-resource delay
  /// Per factory, the cycle each request obtained its state, in service order.
  std::vector<std::vector<Cycle>> factory_service;
};

/// Replays the schedule with sampled distillation extras. Each node first
/// takes the max of its resource's delay and its ancestors' delays. A magic
/// state preparation at clock c with delay x finishes at max(c + x + d, e),
/// where e is when its factory hands over a state.
ExecutionResult execute(const Dag& dag, const Schedule& schedule, const DistSelectParams& params,
                        const distillation::CompletionDistribution& dist, std::uint64_t seed,
                        const ExecuteOptions& options = {});

/// num_factories * (factory + pool + extra L1 qubits).
std::int64_t spatial_qubits(int num_factories, int pool_entries, int d_pool,
                            std::int64_t extra_qubits_per_factory = 0);

/// 4N + 2 * 2 * M * log2(L / M) logical qubits outside the factories.
std::int64_t logical_qubit_estimate(std::int64_t N, std::int64_t M, std::int64_t L);

struct MetricsRecord {
  int num_factories = 0;
  int pool_entries = 0;
  int d_pool = 0;
  Cycle consumption_period = 0;
  Cycle S = 0;
  double mean_R = 0.0;
  double total = 0.0;
  double rel_delay = 0.0;
  double effective_cost = 0.0;
  double rel_cost_increase = 0.0;
  std::int64_t spatial_qubits = 0;
};

struct RunOptions {
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool effective_cost = true;
  std::int64_t extra_qubits_per_factory = 0;
};

/// Builds and schedules once, then executes `trials` times; trial t uses
/// derive_seed(seed, {t}). The effective cost rescans the scheduled cost with
/// D replaced by candidate E (cadence shifted by the same amount).
MetricsRecord run_dist_select(const DistSelectParams& params,
                              const distillation::CompletionDistribution& dist,
                              const RunOptions& options);

}  // namespace msdpool::distselect
