#pragma once

// Seeded random layered circuits on a W x H plane of logical qubits and their
// elapsed-cycle simulation, where every T gate pays a stochastic distillation
// cost.

#include <cstdint>
#include <functional>
#include <vector>

#include "msdpool/random.hpp"
#include "msdpool/types.hpp"

namespace msdpool::randcircuit {

struct RandomCircuitParams {
  Cycle d = 1;                // code distance; every cost scales with it
  int width = 1;              // W
  int height = 1;             // H
  int layers = 1;             // L
  int coupling_distance = 1;  // maximum L1 length of a coupling
  double p_fail = 0.0;        // distillation failure probability
  std::uint64_t seed = 0;

  void validate() const;
  int qubit_count() const { return width * height; }
};

struct Coord {
  int x = 0;
  int y = 0;
  friend bool operator==(Coord, Coord) = default;
};

/// Row-major qubit indexing on the plane.
struct Plane {
  int width = 1;
  int height = 1;

  Coord coord(int qubit) const { return {qubit % width, qubit / width}; }
  int index(Coord c) const { return c.y * width + c.x; }
  int size() const { return width * height; }
};

int l1_distance(Coord a, Coord b);

enum class Gate : std::uint8_t { S, H, T };

/// A two-qubit operation between qubit indices first < second.
struct Coupling {
  int first = 0;
  int second = 0;
  friend bool operator==(const Coupling&, const Coupling&) = default;
};

struct Layer {
  std::vector<Gate> single_gates;  // one per qubit, indexed by qubit
  std::vector<Coupling> couplings;
};

struct CouplingGroup {
  std::vector<Coupling> members;
};

/// Generates `layers` layers. Couplings are chosen greedily: qubits are visited
/// in a shuffled order and each unmatched qubit is paired with a uniformly
/// chosen unmatched qubit within the coupling distance, which yields a
/// maximal set. Deterministic in params.seed.
std::vector<Layer> generate_circuit(const RandomCircuitParams& params);

/// Closed-segment intersection on integer points.
bool segments_intersect(Coord a0, Coord a1, Coord b0, Coord b1);
bool segments_intersect(const Coupling& a, const Coupling& b, const Plane& plane);

/// Connected components of the layer's segment-intersection graph. Groups are
/// ordered by their first coupling; members keep layer order.
std::vector<CouplingGroup> coupling_groups(const Layer& layer, const Plane& plane);

/// 3d * k + 4d, where k ~ NB(1, 1 - p_fail) counts failed distillation
/// attempts before the first success.
Cycle sample_t_cost(double p_fail, Cycle d, Rng& rng);

/// A layer with its coupling groups flattened to qubit lists, ready for
/// repeated simulation under different T-gate cost models.
struct PreparedLayer {
  std::vector<Gate> single_gates;
  std::vector<std::vector<int>> group_qubits;
};

std::vector<PreparedLayer> prepare(const std::vector<Layer>& circuit, const Plane& plane);

/// Runs the layer-by-layer elapsed-cycle recurrence. `t_cost` is called once
/// per T gate in layer order, then qubit order.
std::vector<Cycle> elapsed_cycles(const std::vector<PreparedLayer>& circuit, Cycle d,
                                  const std::function<Cycle()>& t_cost);

struct RandomCircuitRun {
  Cycle scheduled = 0;  // every T gate at its failure-free cost 4d
  Cycle total = 0;      // T gates with sampled distillation failures
  std::vector<Cycle> elapsed;
};

/// One circuit from params.seed; T costs drawn from a stream split off the
/// same seed, so `scheduled` and `total` describe the same circuit.
RandomCircuitRun simulate_random_circuit(const RandomCircuitParams& params);

struct RandomCircuitMetrics {
  std::int64_t trials = 0;
  double scheduled = 0.0;          // mean S
  double mean_total = 0.0;         // mean S + R
  double runtime_delay = 0.0;      // mean R
  double relative_delay = 0.0;
  Cycle distillation_cost = 0;     // D = 3d
  Cycle effective_cost = 0;        // E, a multiple of d
  double relative_cost_increase = 0.0;
  // Exact sums over trials; ratios are formed from these.
  std::int64_t scheduled_sum = 0;
  std::int64_t total_sum = 0;
};

/// Trial t uses the circuit seeded by derive_seed(params.seed, {t}). The
/// effective cost is searched over E = 3d + k*d, where the hypothetical
/// failure-free T gate costs E + d.
RandomCircuitMetrics random_circuit_metrics(const RandomCircuitParams& params, std::int64_t trials,
                                            unsigned jobs = 1);

}  // namespace msdpool::randcircuit
