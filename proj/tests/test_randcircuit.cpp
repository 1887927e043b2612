#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "msdpool/randcircuit.hpp"

using namespace msdpool;
using namespace msdpool::randcircuit;

namespace {

RandomCircuitParams plane_params(int w, int h, int layers, int coupling, std::uint64_t seed) {
  RandomCircuitParams p;
  p.width = w;
  p.height = h;
  p.layers = layers;
  p.coupling_distance = coupling;
  p.seed = seed;
  return p;
}

// The documented greedy procedure, replayed with a plain full scan.
std::vector<std::vector<Coupling>> greedy_replay(const RandomCircuitParams& params) {
  const Plane plane{params.width, params.height};
  const int n = plane.size();
  Rng rng(params.seed);
  std::uniform_int_distribution<int> gate_dist(0, 2);
  std::vector<std::vector<Coupling>> layers;
  for (int l = 0; l < params.layers; ++l) {
    for (int q = 0; q < n; ++q) gate_dist(rng);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    std::vector<Coupling> couplings;
    for (int q : order) {
      if (used[q]) continue;
      std::vector<int> options;
      for (int o = 0; o < n; ++o) {
        if (o != q && !used[o] && l1_distance(plane.coord(q), plane.coord(o)) <= params.coupling_distance) {
          options.push_back(o);
        }
      }
      if (options.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
      const int o = options[pick(rng)];
      used[q] = used[o] = true;
      couplings.push_back({std::min(q, o), std::max(q, o)});
    }
    layers.push_back(couplings);
  }
  return layers;
}

double point_segment_distance(double px, double py, Coord a, Coord b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 == 0 ? 0 : ((px - a.x) * dx + (py - a.y) * dy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (a.x + t * dx), py - (a.y + t * dy));
}

// Samples one segment finely and measures how close it gets to the other.
bool rasterized_overlap(Coord a0, Coord a1, Coord b0, Coord b1) {
  constexpr int kSteps = 1000;
  double best = 1e9;
  for (int i = 0; i <= kSteps; ++i) {
    const double t = static_cast<double>(i) / kSteps;
    best = std::min(best, point_segment_distance(a0.x + t * (a1.x - a0.x), a0.y + t * (a1.y - a0.y), b0, b1));
  }
  return best < 0.01;
}

std::vector<std::vector<Coupling>> brute_force_components(const Layer& layer, const Plane& plane) {
  const auto& cs = layer.couplings;
  const std::size_t n = cs.size();
  std::vector<bool> seen(n, false);
  std::vector<std::vector<Coupling>> groups;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> members{s};
    seen[s] = true;
    for (std::size_t k = 0; k < members.size(); ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!seen[j] && segments_intersect(cs[members[k]], cs[j], plane)) {
          seen[j] = true;
          members.push_back(j);
        }
      }
    }
    std::sort(members.begin(), members.end());
    std::vector<Coupling> group;
    for (auto m : members) group.push_back(cs[m]);
    groups.push_back(group);
  }
  return groups;
}

}  // namespace

TEST_CASE("one-qubit plane has no couplings") {
  for (const auto& layer : generate_circuit(plane_params(1, 1, 5, 3, 1))) {
    CHECK(layer.single_gates.size() == 1);
    CHECK(layer.couplings.empty());
  }
}

TEST_CASE("two adjacent qubits always couple") {
  for (const auto& layer : generate_circuit(plane_params(2, 1, 8, 1, 2))) {
    REQUIRE(layer.couplings.size() == 1);
    CHECK(layer.couplings[0] == Coupling{0, 1});
  }
}

TEST_CASE("generation replays the documented greedy procedure") {
  for (std::uint64_t seed : {1u, 2u, 3u, 99u}) {
    for (int dc : {1, 2, 3, 7}) {
      const auto params = plane_params(4, 4, 6, dc, seed);
      const auto circuit = generate_circuit(params);
      const auto oracle = greedy_replay(params);
      for (std::size_t l = 0; l < circuit.size(); ++l) CHECK(circuit[l].couplings == oracle[l]);
    }
  }
  // a diamond larger than the plane and a wide plane both go through the same rule
  for (const auto& params : {plane_params(5, 3, 4, 40, 5), plane_params(9, 2, 4, 3, 6)}) {
    const auto circuit = generate_circuit(params);
    const auto oracle = greedy_replay(params);
    for (std::size_t l = 0; l < circuit.size(); ++l) CHECK(circuit[l].couplings == oracle[l]);
  }
}

TEST_CASE("layers satisfy the coupling invariants and are maximal") {
  for (int w = 1; w <= 6; ++w) {
    for (int h = 1; h <= 6; ++h) {
      for (int dc : {1, 2, 4}) {
        const auto params = plane_params(w, h, 3, dc, static_cast<std::uint64_t>(w * 100 + h * 10 + dc));
        const Plane plane{w, h};
        for (const auto& layer : generate_circuit(params)) {
          CHECK(static_cast<int>(layer.single_gates.size()) == w * h);
          std::vector<int> uses(static_cast<std::size_t>(w * h), 0);
          for (const auto& c : layer.couplings) {
            CHECK(c.first < c.second);
            CHECK(l1_distance(plane.coord(c.first), plane.coord(c.second)) <= dc);
            ++uses[c.first];
            ++uses[c.second];
          }
          CHECK(*std::max_element(uses.begin(), uses.end()) <= 1);
          for (int a = 0; a < w * h; ++a) {
            for (int b = a + 1; b < w * h; ++b) {
              const bool addable = uses[a] == 0 && uses[b] == 0 && l1_distance(plane.coord(a), plane.coord(b)) <= dc;
              CHECK_FALSE(addable);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("generation is deterministic") {
  const auto params = plane_params(8, 8, 10, 3, 42);
  const auto a = generate_circuit(params);
  const auto b = generate_circuit(params);
  for (std::size_t l = 0; l < a.size(); ++l) {
    CHECK(a[l].single_gates == b[l].single_gates);
    CHECK(a[l].couplings == b[l].couplings);
  }
}

TEST_CASE("segment intersection examples") {
  CHECK(segments_intersect({0, 0}, {1, 1}, {1, 0}, {0, 1}));
  CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
  CHECK(segments_intersect({0, 0}, {2, 0}, {1, 0}, {1, 2}));
  CHECK(segments_intersect({0, 0}, {2, 0}, {1, 0}, {3, 0}));  // collinear overlap
  CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {2, 0}, {3, 0}));
}

TEST_CASE("segment intersection agrees with a rasterized check") {
  std::vector<std::pair<Coord, Coord>> segments;
  for (int a = 0; a < 16; ++a) {
    for (int b = a + 1; b < 16; ++b) segments.push_back({{a % 4, a / 4}, {b % 4, b / 4}});
  }
  int mismatches = 0;
  for (const auto& [a0, a1] : segments) {
    for (const auto& [b0, b1] : segments) {
      if (segments_intersect(a0, a1, b0, b1) != rasterized_overlap(a0, a1, b0, b1)) ++mismatches;
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("coupling groups") {
  const Plane plane{4, 4};
  auto idx = [&](int x, int y) { return plane.index({x, y}); };
  Layer layer;
  CHECK(coupling_groups(layer, plane).empty());

  layer.couplings = {{idx(0, 0), idx(1, 0)}, {idx(0, 2), idx(1, 2)}};
  CHECK(coupling_groups(layer, plane).size() == 2);

  // A crosses B, B crosses C, A and C are disjoint
  layer.couplings = {{idx(0, 0), idx(1, 1)}, {idx(1, 0), idx(0, 1)}, {idx(0, 1), idx(0, 3)}};
  REQUIRE_FALSE(segments_intersect(layer.couplings[0], layer.couplings[2], plane));
  const auto groups = coupling_groups(layer, plane);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].members.size() == 3);
}

TEST_CASE("coupling groups equal brute-force components") {
  for (int size = 2; size <= 8; ++size) {
    for (int dc : {1, 3, 6}) {
      const auto params = plane_params(size, size, 4, dc, static_cast<std::uint64_t>(size * 7 + dc));
      const Plane plane{size, size};
      for (const auto& layer : generate_circuit(params)) {
        const auto groups = coupling_groups(layer, plane);
        const auto oracle = brute_force_components(layer, plane);
        REQUIRE(groups.size() == oracle.size());
        for (std::size_t g = 0; g < groups.size(); ++g) CHECK(groups[g].members == oracle[g]);
      }
    }
  }
}

TEST_CASE("T-gate cost samples") {
  Rng rng(1);
  CHECK(sample_t_cost(0.0, 9, rng) == 36);
  double sum = 0;
  constexpr int kDraws = 1000000;
  for (int i = 0; i < kDraws; ++i) sum += static_cast<double>(sample_t_cost(0.05, 1, rng));
  CHECK(std::abs(sum / kDraws - (4 + 3 * 0.05 / 0.95)) <= 0.01);
  for (int i = 0; i < 1000; ++i) {
    const Cycle c = sample_t_cost(0.5, 2, rng);
    CHECK(c >= 8);
    CHECK((c - 8) % 6 == 0);
  }
}

TEST_CASE("elapsed cycles follow the cost table") {
  std::vector<PreparedLayer> single{{{Gate::H}, {}}, {{Gate::S}, {}}, {{Gate::T}, {}}};
  CHECK(elapsed_cycles(single, 1, [] { return Cycle{4}; }) == std::vector<Cycle>{9});

  std::vector<PreparedLayer> pair{{{Gate::H, Gate::S}, {{0, 1}}}};
  CHECK(elapsed_cycles(pair, 1, [] { return Cycle{4}; }) == std::vector<Cycle>{5, 5});
}

TEST_CASE("all-T single qubit: delay is a multiple of 3d") {
  for (Cycle d : {1, 3, 7}) {
    std::vector<PreparedLayer> circuit(50, PreparedLayer{{Gate::T}, {}});
    Rng rng(static_cast<std::uint64_t>(d));
    const auto scheduled = elapsed_cycles(circuit, d, [d] { return 4 * d; })[0];
    const auto total = elapsed_cycles(circuit, d, [&] { return sample_t_cost(0.3, d, rng); })[0];
    CHECK(total >= scheduled);
    CHECK((total - scheduled) % (3 * d) == 0);
  }
}

TEST_CASE("failure-free circuits run on schedule") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto params = plane_params(6, 5, 8, 2, seed);
    const auto run = simulate_random_circuit(params);
    CHECK(run.total == run.scheduled);
    const auto m = random_circuit_metrics(params, 4);
    CHECK(m.runtime_delay == 0.0);
    CHECK(m.relative_delay == 0.0);
    CHECK(m.relative_cost_increase == 0.0);
  }
}

TEST_CASE("stochastic runs never beat the schedule and are deterministic") {
  auto params = plane_params(8, 8, 12, 3, 17);
  params.p_fail = 0.1;
  const auto a = simulate_random_circuit(params);
  const auto b = simulate_random_circuit(params);
  CHECK(a.total >= a.scheduled);
  CHECK(a.total == b.total);
  CHECK(a.scheduled == b.scheduled);
  CHECK(a.elapsed == b.elapsed);
}

TEST_CASE("relative metrics do not depend on d") {
  auto params = plane_params(10, 10, 15, 4, 123);
  params.p_fail = 0.05;
  params.d = 1;
  const auto m1 = random_circuit_metrics(params, 6);
  params.d = 5;
  const auto m5 = random_circuit_metrics(params, 6);
  CHECK(m1.relative_delay == m5.relative_delay);
  CHECK(m1.relative_cost_increase == m5.relative_cost_increase);
  CHECK(m5.scheduled_sum == 5 * m1.scheduled_sum);
}

TEST_CASE("metrics do not depend on the job count") {
  auto params = plane_params(10, 10, 15, 4, 321);
  params.p_fail = 0.05;
  const auto a = random_circuit_metrics(params, 8, 1);
  const auto b = random_circuit_metrics(params, 8, 4);
  CHECK(a.total_sum == b.total_sum);
  CHECK(a.effective_cost == b.effective_cost);
}

TEST_CASE("relative delay grows with the failure rate") {
  auto params = plane_params(16, 16, 20, 2, 2024);
  params.p_fail = 0.001;
  const auto low = random_circuit_metrics(params, 50);
  params.p_fail = 0.05;
  const auto high = random_circuit_metrics(params, 50);
  CHECK(high.relative_delay > low.relative_delay);
}

TEST_CASE("invalid circuit parameters") {
  auto params = plane_params(0, 4, 1, 1, 0);
  CHECK_THROWS_AS(generate_circuit(params), ValidationError);
  params = plane_params(4, 4, 1, 0, 0);
  CHECK_THROWS_AS(generate_circuit(params), ValidationError);
  params = plane_params(4, 4, 1, 1, 0);
  params.p_fail = 1.0;
  CHECK_THROWS_AS(simulate_random_circuit(params), ValidationError);
}
