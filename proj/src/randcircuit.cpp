#include "msdpool/randcircuit.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

#include "msdpool/analytic.hpp"
#include "msdpool/parallel.hpp"

namespace msdpool::randcircuit {

void RandomCircuitParams::validate() const {
  require(width >= 1 && height >= 1, "plane width and height must be >= 1");
  require(layers >= 1, "layer count must be >= 1");
  require(coupling_distance >= 1, "coupling distance must be >= 1");
  require(p_fail >= 0.0 && p_fail < 1.0, "p_fail must be in [0, 1)");
  require(d >= 1, "code distance d must be >= 1");
}

int l1_distance(Coord a, Coord b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

namespace {

// Unmatched partners of `q` within the coupling distance, ascending by index.
void collect_partners(int q, const Plane& plane, int distance, const std::vector<int>& partner,
                      std::vector<int>& out) {
  out.clear();
  const Coord c = plane.coord(q);
  const long diamond = 2L * distance * (distance + 1) + 1;
  if (diamond > plane.size()) {
    for (int other = 0; other < plane.size(); ++other) {
      if (other != q && partner[other] < 0 && l1_distance(c, plane.coord(other)) <= distance) {
        out.push_back(other);
      }
    }
    return;
  }
  for (int dy = -distance; dy <= distance; ++dy) {
    const int y = c.y + dy;
    if (y < 0 || y >= plane.height) continue;
    const int reach = distance - std::abs(dy);
    for (int x = std::max(0, c.x - reach); x <= std::min(plane.width - 1, c.x + reach); ++x) {
      const int other = plane.index({x, y});
      if (other != q && partner[other] < 0) out.push_back(other);
    }
  }
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

std::vector<Layer> generate_circuit(const RandomCircuitParams& params) {
  params.validate();
  const Plane plane{params.width, params.height};
  const int n = plane.size();
  Rng rng(params.seed);
  std::uniform_int_distribution<int> gate_dist(0, 2);

  std::vector<Layer> circuit(static_cast<std::size_t>(params.layers));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::vector<int> partner(static_cast<std::size_t>(n));
  std::vector<int> candidates;
  for (auto& layer : circuit) {
    layer.single_gates.resize(static_cast<std::size_t>(n));
    for (auto& g : layer.single_gates) g = static_cast<Gate>(gate_dist(rng));

    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::fill(partner.begin(), partner.end(), -1);
    for (int q : order) {
      if (partner[q] >= 0) continue;
      collect_partners(q, plane, params.coupling_distance, partner, candidates);
      if (candidates.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
      const int other = candidates[pick(rng)];
      partner[q] = other;
      partner[other] = q;
      layer.couplings.push_back({std::min(q, other), std::max(q, other)});
    }
  }
  return circuit;
}

namespace {

int orientation(Coord a, Coord b, Coord c) {
  const long long cross = static_cast<long long>(b.x - a.x) * (c.y - a.y) -
                          static_cast<long long>(b.y - a.y) * (c.x - a.x);
  return (cross > 0) - (cross < 0);
}

// c is collinear with [a, b]; is it inside the bounding box?
bool within(Coord a, Coord b, Coord c) {
  return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= c.y &&
         c.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(Coord a0, Coord a1, Coord b0, Coord b1) {
  const int o1 = orientation(a0, a1, b0);
  const int o2 = orientation(a0, a1, b1);
  const int o3 = orientation(b0, b1, a0);
  const int o4 = orientation(b0, b1, a1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && within(a0, a1, b0)) return true;
  if (o2 == 0 && within(a0, a1, b1)) return true;
  if (o3 == 0 && within(b0, b1, a0)) return true;
  if (o4 == 0 && within(b0, b1, a1)) return true;
  return false;
}

bool segments_intersect(const Coupling& a, const Coupling& b, const Plane& plane) {
  return segments_intersect(plane.coord(a.first), plane.coord(a.second), plane.coord(b.first),
                            plane.coord(b.second));
}

std::vector<CouplingGroup> coupling_groups(const Layer& layer, const Plane& plane) {
  const auto& couplings = layer.couplings;
  const int k = static_cast<int>(couplings.size());
  if (k == 0) return {};

  // Bucket bounding boxes on a uniform grid; only couplings sharing a bucket
  // can have overlapping boxes.
  int longest = 1;
  for (const auto& c : couplings) {
    longest = std::max(longest, l1_distance(plane.coord(c.first), plane.coord(c.second)));
  }
  const int cell = longest;
  const int cols = plane.width / cell + 1;
  const int rows = plane.height / cell + 1;
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(cols * rows));
  for (int i = 0; i < k; ++i) {
    const Coord a = plane.coord(couplings[i].first);
    const Coord b = plane.coord(couplings[i].second);
    for (int cy = std::min(a.y, b.y) / cell; cy <= std::max(a.y, b.y) / cell; ++cy) {
      for (int cx = std::min(a.x, b.x) / cell; cx <= std::max(a.x, b.x) / cell; ++cx) {
        buckets[static_cast<std::size_t>(cy * cols + cx)].push_back(i);
      }
    }
  }

  std::vector<int> parent(static_cast<std::size_t>(k));
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& bucket : buckets) {
    for (std::size_t i = 0; i < bucket.size(); ++i) {
      for (std::size_t j = i + 1; j < bucket.size(); ++j) {
        const int ri = find_root(parent, bucket[i]);
        const int rj = find_root(parent, bucket[j]);
        if (ri == rj) continue;
        if (segments_intersect(couplings[bucket[i]], couplings[bucket[j]], plane)) {
          parent[std::max(ri, rj)] = std::min(ri, rj);
        }
      }
    }
  }

  std::vector<int> group_of(static_cast<std::size_t>(k), -1);
  std::vector<CouplingGroup> groups;
  for (int i = 0; i < k; ++i) {
    const int root = find_root(parent, i);
    if (group_of[root] < 0) {
      group_of[root] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(group_of[root])].members.push_back(couplings[i]);
  }
  return groups;
}

Cycle sample_t_cost(double p_fail, Cycle d, Rng& rng) {
  require(p_fail >= 0.0 && p_fail < 1.0, "p_fail must be in [0, 1)");
  Cycle failures = 0;
  if (p_fail > 0.0) failures = std::geometric_distribution<Cycle>(1.0 - p_fail)(rng);
  return 3 * d * failures + 4 * d;
}

std::vector<PreparedLayer> prepare(const std::vector<Layer>& circuit, const Plane& plane) {
  std::vector<PreparedLayer> prepared;
  prepared.reserve(circuit.size());
  for (const auto& layer : circuit) {
    PreparedLayer p;
    p.single_gates = layer.single_gates;
    for (const auto& group : coupling_groups(layer, plane)) {
      std::vector<int> qubits;
      qubits.reserve(group.members.size() * 2);
      for (const auto& c : group.members) {
        qubits.push_back(c.first);
        qubits.push_back(c.second);
      }
      p.group_qubits.push_back(std::move(qubits));
    }
    prepared.push_back(std::move(p));
  }
  return prepared;
}

std::vector<Cycle> elapsed_cycles(const std::vector<PreparedLayer>& circuit, Cycle d,
                                  const std::function<Cycle()>& t_cost) {
  if (circuit.empty()) return {};
  std::vector<Cycle> elapsed(circuit.front().single_gates.size(), 0);
  for (const auto& layer : circuit) {
    for (std::size_t q = 0; q < layer.single_gates.size(); ++q) {
      switch (layer.single_gates[q]) {
        case Gate::H: elapsed[q] += 3 * d; break;
        case Gate::S: elapsed[q] += 2 * d; break;
        case Gate::T: elapsed[q] += t_cost(); break;
      }
    }
    for (const auto& group : layer.group_qubits) {
      Cycle m = 0;
      for (int q : group) m = std::max(m, elapsed[static_cast<std::size_t>(q)]);
      for (int q : group) elapsed[static_cast<std::size_t>(q)] = m + 2 * d;
    }
  }
  return elapsed;
}

namespace {

Cycle circuit_total(const std::vector<Cycle>& elapsed) {
  return elapsed.empty() ? 0 : *std::max_element(elapsed.begin(), elapsed.end());
}

Cycle deterministic_total(const std::vector<PreparedLayer>& circuit, Cycle d, Cycle t_cost) {
  return circuit_total(elapsed_cycles(circuit, d, [t_cost] { return t_cost; }));
}

struct Trial {
  std::vector<PreparedLayer> circuit;
  Cycle scheduled = 0;
  Cycle total = 0;
};

Trial run_trial(const RandomCircuitParams& params) {
  RandomCircuitParams structure = params;
  structure.seed = derive_seed(params.seed, {0});
  const Plane plane{params.width, params.height};
  Trial trial;
  trial.circuit = prepare(generate_circuit(structure), plane);
  trial.scheduled = deterministic_total(trial.circuit, params.d, 4 * params.d);
  Rng t_rng(derive_seed(params.seed, {1}));
  trial.total = circuit_total(
      elapsed_cycles(trial.circuit, params.d, [&] { return sample_t_cost(params.p_fail, params.d, t_rng); }));
  return trial;
}

}  // namespace

RandomCircuitRun simulate_random_circuit(const RandomCircuitParams& params) {
  params.validate();
  RandomCircuitParams structure = params;
  structure.seed = derive_seed(params.seed, {0});
  const Plane plane{params.width, params.height};
  const auto circuit = prepare(generate_circuit(structure), plane);

  RandomCircuitRun run;
  run.scheduled = deterministic_total(circuit, params.d, 4 * params.d);
  Rng t_rng(derive_seed(params.seed, {1}));
  run.elapsed = elapsed_cycles(circuit, params.d,
                               [&] { return sample_t_cost(params.p_fail, params.d, t_rng); });
  run.total = circuit_total(run.elapsed);
  return run;
}

RandomCircuitMetrics random_circuit_metrics(const RandomCircuitParams& params, std::int64_t trials,
                                            unsigned jobs) {
  params.validate();
  require(trials >= 1, "trial count must be >= 1");
  const auto count = static_cast<std::size_t>(trials);
  std::vector<Trial> runs(count);
  parallel_for(count, jobs, [&](std::size_t t) {
    RandomCircuitParams trial_params = params;
    trial_params.seed = derive_seed(params.seed, {t});
    runs[t] = run_trial(trial_params);
  });

  RandomCircuitMetrics metrics;
  metrics.trials = trials;
  for (const auto& run : runs) {
    metrics.scheduled_sum += run.scheduled;
    metrics.total_sum += run.total;
  }
  const Cycle d = params.d;
  metrics.distillation_cost = 3 * d;
  metrics.scheduled = static_cast<double>(metrics.scheduled_sum) / static_cast<double>(trials);
  metrics.mean_total = static_cast<double>(metrics.total_sum) / static_cast<double>(trials);
  metrics.runtime_delay = metrics.mean_total - metrics.scheduled;
  const auto delay_sum = metrics.total_sum - metrics.scheduled_sum;
  metrics.relative_delay = analytic::relative_runtime_delay(static_cast<double>(delay_sum),
                                                            static_cast<double>(metrics.scheduled_sum));

  // Sum over trials of the failure-free cost with distillation cost E = 3d + k*d.
  auto cost_sum = [&](std::int64_t k) {
    std::vector<Cycle> per_trial(count);
    const Cycle t_cost = 3 * d + k * d + d;
    parallel_for(count, jobs,
                 [&](std::size_t t) { per_trial[t] = deterministic_total(runs[t].circuit, d, t_cost); });
    return std::accumulate(per_trial.begin(), per_trial.end(), Cycle{0});
  };

  // Scheduled cost is non-decreasing in the T cost here, so the scan stops at
  // the first candidate that overshoots S + R.
  analytic::ScheduleCostMap map;
  map[static_cast<double>(3 * d)] = static_cast<double>(metrics.scheduled_sum);
  // Circuits without T gates never overshoot; kMaxSteps bounds that scan.
  constexpr std::int64_t kMaxSteps = 4096;
  for (std::int64_t k = 1; k <= kMaxSteps; ++k) {
    const Cycle cost = cost_sum(k);
    map[static_cast<double>(3 * d + k * d)] = static_cast<double>(cost);
    if (cost > metrics.total_sum) break;
  }
  metrics.effective_cost = static_cast<Cycle>(analytic::effective_distillation_cost(
      map, static_cast<double>(3 * d), static_cast<double>(delay_sum)));
  metrics.relative_cost_increase = analytic::relative_distillation_cost_increase(
      static_cast<double>(metrics.effective_cost), static_cast<double>(3 * d));
  return metrics;
}

}  // namespace msdpool::randcircuit
