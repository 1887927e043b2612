#pragma once

// Parameter sweeps over the simulators, emitted as CSV tables.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msdpool/distillation.hpp"
#include "msdpool/distselect.hpp"
#include "msdpool/randcircuit.hpp"

namespace msdpool::experiments {

enum class Experiment { analytic_table, random_circuit, dist_select, distill_hist, tradeoff };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

/// A CSV table: one header line, LF line endings, '.' decimal separator.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
  void write(const std::string& path) const;  // throws IoError naming the path
};

/// Shortest round-trip decimal rendering, independent of the C locale.
std::string format_number(double value);
std::string format_number(std::int64_t value);

struct SweepSpec {
  Experiment experiment = Experiment::analytic_table;
  std::int64_t trials = 1;
  std::uint64_t base_seed = 0;
  std::string output;  // empty: caller decides

  // analytic_table
  std::vector<std::int64_t> n_values{1, 10, 100};
  std::vector<double> p_values{0.01};

  // random_circuit
  randcircuit::RandomCircuitParams circuit;
  std::vector<int> coupling_distances{1, 2, 4, 8};
  std::vector<double> p_fail_values{0.001, 0.01, 0.05};

  // distill_hist, and the distribution feeding dist_select / tradeoff
  distillation::PipelineConfig pipeline;
  std::int64_t pipeline_outputs = 100000;
  std::vector<distillation::Mitigation> mitigations{distillation::Mitigation::none};
  std::vector<double> l1_fail_values;  // empty: pipeline.l1_fail

  // dist_select / tradeoff
  distselect::DistSelectParams select;
  std::vector<int> factory_counts{8, 12, 16, 20, 24};
  std::vector<int> pool_entry_values{0, 1, 2};
  std::vector<Cycle> consumption_periods;  // empty: D + {0, d/3, 2d/3, d, 2d}
  bool select_best_consumption = true;
  bool effective_cost = true;
  int excessive_l1_blocks = 1;   // tradeoff: extra L1 blocks per pipeline, 0 to skip
  std::int64_t l1_block_qubits = 2070;

  void validate() const;
};

/// Consumption periods a pooled configuration is tried with.
std::vector<Cycle> consumption_candidates(const SweepSpec& spec);

/// Per-cell seed: base seed hashed with the cell's grid indices.
std::uint64_t cell_seed(std::uint64_t base_seed, const std::vector<std::size_t>& indices);

/// Extra-delay distribution of the sweep's pipeline under the given mitigation.
distillation::CompletionDistribution pipeline_distribution(const SweepSpec& spec,
                                                          distillation::Mitigation mitigation, int extra_blocks);

/// Runs the Cartesian product of the sweep's grids, rows in grid order.
CsvTable run_sweep(const SweepSpec& spec, unsigned jobs = 1);

/// Dist-SELECT rows for one configuration family; pooled rows take the
/// consumption period with the lowest total when select_best_consumption is set.
std::vector<distselect::MetricsRecord> dist_select_rows(const SweepSpec& spec,
                                                       const distillation::CompletionDistribution& dist,
                                                       const std::vector<int>& pool_entries,
                                                       std::int64_t extra_qubits_per_factory, unsigned jobs);

CsvTable dist_select_table(const std::vector<distselect::MetricsRecord>& rows);

struct TradeoffPoint {
  std::string family;  // none, single, double, excessive_l1
  int num_factories = 0;
  std::int64_t spatial_qubits = 0;
  double total = 0.0;
};

struct TradeoffRow {
  TradeoffPoint point;
  bool pareto_family = false;  // not dominated by a row of the same family
  bool pareto_global = false;  // not dominated by any row
};

/// Rows grouped by family (first-appearance order), each sorted by spatial
/// cost, with Pareto flags. Dominance: no worse on both axes, better on one.
std::vector<TradeoffRow> tradeoff_table(const std::vector<TradeoffPoint>& points);

CsvTable tradeoff_csv(const std::vector<TradeoffRow>& rows);

std::string pool_family(int pool_entries);

}  // namespace msdpool::experiments
