#include "msdpool/distselect.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <memory>
#include <queue>
#include <set>
#include <string>

#include "msdpool/analytic.hpp"
#include "msdpool/parallel.hpp"

namespace msdpool::distselect {

namespace {

bool is_power_of_two(std::int64_t x) { return x > 0 && (x & (x - 1)) == 0; }

Cycle floor_div(Cycle a, Cycle b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }
Cycle ceil_div(Cycle a, Cycle b) { return -floor_div(-a, b); }

constexpr int kNodesPerIteration = 4;

}  // namespace

void DistSelectParams::validate() const {
  require(d >= 1, "code distance d must be >= 1");
  require(d_pool >= 1, "d_pool must be >= 1");
  require(num_factories >= 1, "num_factories must be >= 1");
  require(is_power_of_two(M) && is_power_of_two(L) && M < L, "M and L must be powers of two with M < L");
  require(P >= 1, "P must be >= 1");
  require(N >= 1, "N must be >= 1");
  require(D >= 1, "D must be >= 1");
  require(p_phys > 0.0 && p_phys < 1.0, "p_phys must be in (0, 1)");
  require(pool_entries >= 0 && pool_entries <= 2, "pool_entries must be 0, 1 or 2");
  require(consumption_period >= D, "consumption_period must be >= D");
  require(magic_prep_d >= 1 && clifford_d >= 1 && pauli_d >= 1 && uncompute_d >= 1,
          "iteration template durations must be >= 1");
}

Dag build_dag(const DistSelectParams& params) {
  params.validate();
  const auto iterations = params.iterations_per_sub_circuit();
  const std::int64_t total = static_cast<std::int64_t>(params.M) * iterations * kNodesPerIteration;
  require(total < std::numeric_limits<int>::max(), "DAG too large");

  Dag dag;
  dag.nodes.reserve(static_cast<std::size_t>(total));
  const OpKind kinds[kNodesPerIteration] = {OpKind::magic_prep, OpKind::clifford, OpKind::pauli_on_target,
                                            OpKind::measurement};
  const Cycle durations[kNodesPerIteration] = {params.magic_prep_d * params.d, params.clifford_d * params.d,
                                               params.pauli_d * params.d, params.uncompute_d * params.d};
  for (int sub = 0; sub < params.M; ++sub) {
    for (std::int64_t it = 0; it < iterations; ++it) {
      for (int j = 0; j < kNodesPerIteration; ++j) {
        OperationNode node;
        node.id = static_cast<int>(dag.nodes.size());
        node.sub_circuit = sub;
        node.kind = kinds[j];
        node.duration = durations[j];
        if (it > 0 || j > 0) node.ancestors.push_back(node.id - 1);
        dag.nodes.push_back(std::move(node));
      }
    }
  }
  dag.descendants.resize(dag.nodes.size());
  for (const auto& node : dag.nodes) {
    for (int a : node.ancestors) dag.descendants[static_cast<std::size_t>(a)].push_back(node.id);
  }
  return dag;
}

int resource_of(const OperationNode& node, int sub_circuits) {
  return node.kind == OpKind::pauli_on_target ? sub_circuits : node.sub_circuit;
}

RoundAssignment assign_round(Cycle request_clock, FactoryBook& book, const DistSelectParams& params) {
  require(request_clock >= 0, "request clock must be >= 0");
  const Cycle cadence = params.consumption_period;
  const Cycle window_start = request_clock + params.d - 2 * params.D;
  const std::int64_t first_in_window = std::max<Cycle>(0, ceil_div(window_start, cadence));

  RoundAssignment best;
  Cycle best_blockage = std::numeric_limits<Cycle>::max();
  for (int f = 0; f < static_cast<int>(book.last_round.size()); ++f) {
    // Blockage is non-decreasing in the round, so the earliest eligible round wins.
    const std::int64_t round = std::max(book.last_round[static_cast<std::size_t>(f)] + 1, first_in_window);
    const Cycle start = round * cadence;
    const Cycle blockage = std::max<Cycle>(0, start + params.D - (request_clock + params.d));
    if (blockage < best_blockage) {
      best_blockage = blockage;
      best = {f, round, start};
    }
  }
  book.last_round[static_cast<std::size_t>(best.factory)] = best.round;
  return best;
}

Schedule schedule(const Dag& dag, const DistSelectParams& params) {
  params.validate();
  const auto n = dag.nodes.size();
  Schedule result;
  result.clock.assign(n, 0);
  result.rounds.assign(n, std::nullopt);
  result.slots.assign(n, std::nullopt);
  result.order.reserve(n);

  std::vector<int> pending(n);
  std::vector<Cycle> ready(n, 0);
  using Entry = std::pair<Cycle, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (std::size_t i = 0; i < n; ++i) {
    pending[i] = static_cast<int>(dag.nodes[i].ancestors.size());
    if (pending[i] == 0) queue.push({0, static_cast<int>(i)});
  }

  FactoryBook book(params.num_factories);
  std::vector<Cycle> slot_free(static_cast<std::size_t>(params.P), 0);
  while (!queue.empty()) {
    const auto [at, id] = queue.top();
    queue.pop();
    const auto& node = dag.nodes[static_cast<std::size_t>(id)];
    Cycle clock = at;
    if (node.kind == OpKind::pauli_on_target) {
      // Nodes leave the queue in clock order, so the earliest-free slot is the
      // earliest start; gaps behind it can never be used later.
      const auto slot = std::min_element(slot_free.begin(), slot_free.end()) - slot_free.begin();
      clock = std::max(clock, slot_free[static_cast<std::size_t>(slot)]);
      slot_free[static_cast<std::size_t>(slot)] = clock + node.duration;
      result.slots[static_cast<std::size_t>(id)] = SlotAssignment{static_cast<int>(slot), clock};
    } else if (node.kind == OpKind::magic_prep) {
      const auto assigned = assign_round(clock, book, params);
      clock = std::max(clock, assigned.start + params.D - node.duration);
      result.rounds[static_cast<std::size_t>(id)] = assigned;
    }
    result.clock[static_cast<std::size_t>(id)] = clock;
    result.order.push_back(id);
    result.scheduled_cost = std::max(result.scheduled_cost, clock + node.duration);
    for (int child : dag.descendants[static_cast<std::size_t>(id)]) {
      const auto ci = static_cast<std::size_t>(child);
      ready[ci] = std::max(ready[ci], clock + node.duration);
      if (--pending[ci] == 0) queue.push({ready[ci], child});
    }
  }
  require(result.order.size() == n, "DAG has a cycle");
  return result;
}

void validate_schedule(const Dag& dag, const Schedule& schedule, const DistSelectParams& params) {
  const auto n = dag.nodes.size();
  require(schedule.clock.size() == n && schedule.rounds.size() == n && schedule.slots.size() == n &&
              schedule.order.size() == n,
          "schedule does not match the DAG size");

  std::vector<std::size_t> position(n);
  for (std::size_t i = 0; i < n; ++i) position[static_cast<std::size_t>(schedule.order[i])] = i;

  std::vector<std::pair<Cycle, int>> pauli_events;
  std::set<std::pair<int, std::int64_t>> used_rounds;
  std::vector<std::int64_t> last_round(static_cast<std::size_t>(params.num_factories), -1);
  for (int id : schedule.order) {
    const auto i = static_cast<std::size_t>(id);
    const auto& node = dag.nodes[i];
    const Cycle c = schedule.clock[i];
    for (int a : node.ancestors) {
      const auto ai = static_cast<std::size_t>(a);
      require(c >= schedule.clock[ai] + dag.nodes[ai].duration,
              "node " + std::to_string(id) + " starts before ancestor " + std::to_string(a) + " ends");
      require(position[ai] < position[i], "execution order is not topological");
    }
    if (node.kind == OpKind::pauli_on_target) {
      require(schedule.slots[i].has_value(), "Pauli node " + std::to_string(id) + " has no slot");
      require(schedule.slots[i]->slot >= 0 && schedule.slots[i]->slot < params.P, "slot index out of range");
      pauli_events.push_back({c, +1});
      pauli_events.push_back({c + node.duration, -1});
    }
    if (node.kind == OpKind::magic_prep) {
      require(schedule.rounds[i].has_value(), "magic_prep " + std::to_string(id) + " has no round");
      const auto& r = *schedule.rounds[i];
      require(r.factory >= 0 && r.factory < params.num_factories, "factory index out of range");
      require(used_rounds.insert({r.factory, r.round}).second,
              "round " + std::to_string(r.round) + " of factory " + std::to_string(r.factory) +
                  " assigned twice");
      require(r.round > last_round[static_cast<std::size_t>(r.factory)],
              "rounds of factory " + std::to_string(r.factory) + " are not assigned in order");
      last_round[static_cast<std::size_t>(r.factory)] = r.round;
      require(r.start == r.round * params.consumption_period, "round start does not match the cadence");
      require(r.start >= c + node.duration - 2 * params.D,
              "round of magic_prep " + std::to_string(id) + " precedes it by more than 2D - d");
      require(c + node.duration >= r.start + params.D, "magic_prep finishes before its round completes");
    }
  }
  // Ends sort before starts at the same cycle: intervals are half-open.
  std::sort(pauli_events.begin(), pauli_events.end());
  int live = 0;
  for (const auto& [t, delta] : pauli_events) {
    live += delta;
    require(live <= params.P, "more than P Pauli operations overlap at cycle " + std::to_string(t));
  }
}

ExecutionResult execute(const Dag& dag, const Schedule& schedule, const DistSelectParams& params,
                        const distillation::CompletionDistribution& dist, std::uint64_t seed,
                        const ExecuteOptions& options) {
  validate_schedule(dag, schedule, params);
  const auto sampler = std::make_shared<const distillation::ExtraDelaySampler>(dist);
  std::vector<distillation::FactoryRuntime> factories;
  factories.reserve(static_cast<std::size_t>(params.num_factories));
  for (int f = 0; f < params.num_factories; ++f) {
    factories.emplace_back(f, params.D, params.consumption_period, params.pool_entries, params.d_pool, sampler,
                           derive_seed(seed, {static_cast<std::uint64_t>(f)}));
  }

  const auto n = dag.nodes.size();
  ExecutionResult result;
  result.node_delay.assign(n, 0);
  result.completion.assign(n, 0);
  result.resource_delay.assign(static_cast<std::size_t>(params.M) + 1, 0);
  result.factory_service.resize(static_cast<std::size_t>(params.num_factories));

  for (int id : schedule.order) {
    const auto i = static_cast<std::size_t>(id);
    const auto& node = dag.nodes[i];
    const auto q = static_cast<std::size_t>(resource_of(node, params.M));
    Cycle delay = result.resource_delay[q];
    for (int a : node.ancestors) delay = std::max(delay, result.node_delay[static_cast<std::size_t>(a)]);
    if (auto it = options.injected_delay.find(id); it != options.injected_delay.end()) delay += it->second;

    const Cycle c = schedule.clock[i];
    if (node.kind == OpKind::magic_prep) {
      const auto& round = *schedule.rounds[i];
      auto& factory = factories[static_cast<std::size_t>(round.factory)];
      const Cycle need = c + delay + node.duration;
      const Cycle e = factory.serve({round.start, need, delay});
      result.factory_service[static_cast<std::size_t>(round.factory)].push_back(e);
      delay = std::max(need, e) - c - node.duration;
    }
    result.resource_delay[q] = delay;
    result.node_delay[i] = delay;
    result.completion[i] = c + node.duration + delay;
    result.total = std::max(result.total, result.completion[i]);
  }
  result.runtime_delay = result.total - schedule.scheduled_cost;
  return result;
}

std::int64_t spatial_qubits(int num_factories, int pool_entries, int d_pool, std::int64_t extra_qubits_per_factory) {
  return static_cast<std::int64_t>(num_factories) *
         (distillation::kFactoryQubits + distillation::pool_overhead_qubits(pool_entries, d_pool) +
          extra_qubits_per_factory);
}

std::int64_t logical_qubit_estimate(std::int64_t N, std::int64_t M, std::int64_t L) {
  require(is_power_of_two(M) && is_power_of_two(L) && M < L, "M and L must be powers of two with M < L");
  const auto index_bits = std::bit_width(static_cast<std::uint64_t>(L / M)) - 1;
  return 4 * N + 2 * 2 * M * static_cast<std::int64_t>(index_bits);
}

namespace {

// Scheduled cost when the protocol takes `cost` cycles per state.
Cycle schedule_cost_at(const Dag& dag, DistSelectParams params, Cycle cost) {
  const Cycle slack = params.consumption_period - params.D;
  params.D = cost;
  params.consumption_period = cost + slack;
  return schedule(dag, params).scheduled_cost;
}

double effective_cost(const Dag& dag, const DistSelectParams& params, Cycle scheduled, double mean_delay,
                      unsigned jobs) {
  const double target = static_cast<double>(scheduled) + mean_delay;
  analytic::ScheduleCostMap map;
  map[static_cast<double>(params.D)] = static_cast<double>(scheduled);

  // Gallop to a candidate that overshoots, then sample a uniform grid below it.
  constexpr Cycle kMaxOffset = Cycle{1} << 24;
  Cycle hi = 1;
  for (; hi <= kMaxOffset; hi *= 2) {
    const Cycle cost = schedule_cost_at(dag, params, params.D + hi);
    map[static_cast<double>(params.D + hi)] = static_cast<double>(cost);
    if (static_cast<double>(cost) > target) break;
  }
  constexpr Cycle kGridPoints = 64;
  const Cycle step = std::max<Cycle>(1, (hi + kGridPoints - 1) / kGridPoints);
  std::vector<Cycle> offsets;
  for (Cycle off = step; off < hi; off += step) {
    if (!map.contains(static_cast<double>(params.D + off))) offsets.push_back(off);
  }
  std::vector<Cycle> costs(offsets.size());
  parallel_for(offsets.size(), jobs,
               [&](std::size_t k) { costs[k] = schedule_cost_at(dag, params, params.D + offsets[k]); });
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    map[static_cast<double>(params.D + offsets[k])] = static_cast<double>(costs[k]);
  }
  return analytic::effective_distillation_cost(map, static_cast<double>(params.D), mean_delay);
}

}  // namespace

MetricsRecord run_dist_select(const DistSelectParams& params, const distillation::CompletionDistribution& dist,
                              const RunOptions& options) {
  params.validate();
  require(options.trials >= 1, "trial count must be >= 1");
  const Dag dag = build_dag(params);
  const Schedule sched = schedule(dag, params);

  const auto trials = static_cast<std::size_t>(options.trials);
  std::vector<Cycle> delays(trials);
  parallel_for(trials, options.jobs, [&](std::size_t t) {
    delays[t] = execute(dag, sched, params, dist, derive_seed(options.seed, {t})).runtime_delay;
  });
  std::int64_t delay_sum = 0;
  for (Cycle r : delays) delay_sum += r;

  MetricsRecord record;
  record.num_factories = params.num_factories;
  record.pool_entries = params.pool_entries;
  record.d_pool = params.d_pool;
  record.consumption_period = params.consumption_period;
  record.S = sched.scheduled_cost;
  record.mean_R = static_cast<double>(delay_sum) / static_cast<double>(trials);
  record.total = static_cast<double>(record.S) + record.mean_R;
  record.rel_delay = analytic::relative_runtime_delay(record.mean_R, static_cast<double>(record.S));
  if (options.effective_cost) {
    record.effective_cost = effective_cost(dag, params, record.S, record.mean_R, options.jobs);
  } else {
    record.effective_cost = static_cast<double>(params.D);
  }
  record.rel_cost_increase =
      analytic::relative_distillation_cost_increase(record.effective_cost, static_cast<double>(params.D));
  record.spatial_qubits = spatial_qubits(params.num_factories, params.pool_entries, params.d_pool,
                                         options.extra_qubits_per_factory);
  return record;
}

}  // namespace msdpool::distselect
