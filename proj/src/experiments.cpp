#include "msdpool/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "msdpool/analytic.hpp"
#include "msdpool/parallel.hpp"
#include "msdpool/random.hpp"

namespace msdpool::experiments {

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::analytic_table: return "analytic_table";
    case Experiment::random_circuit: return "random_circuit";
    case Experiment::dist_select: return "dist_select";
    case Experiment::distill_hist: return "distill_hist";
    case Experiment::tradeoff: return "tradeoff";
  }
  return "analytic_table";
}

Experiment parse_experiment(const std::string& name) {
  for (auto e : {Experiment::analytic_table, Experiment::random_circuit, Experiment::dist_select,
                 Experiment::distill_hist, Experiment::tradeoff}) {
    if (to_string(e) == name) return e;
  }
  throw ValidationError("unknown experiment '" + name +
                        "' (expected analytic_table, random_circuit, dist_select, distill_hist, tradeoff)");
}

std::string CsvTable::to_string() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  return out;
}

void CsvTable::write(const std::string& path) const {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << to_string();
  file.flush();
  if (!file) throw IoError("failed writing '" + path + "'");
}

std::string format_number(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc{}) return "nan";
  return std::string(buffer, end);
}

std::string format_number(std::int64_t value) { return std::to_string(value); }

void SweepSpec::validate() const {
  require(trials >= 1, "trials must be >= 1");
  switch (experiment) {
    case Experiment::analytic_table:
      require(!n_values.empty() && !p_values.empty(), "analytic grids n and p must be non-empty");
      break;
    case Experiment::random_circuit:
      require(!coupling_distances.empty() && !p_fail_values.empty(),
              "random_circuit grids coupling_distance and p_fail must be non-empty");
      circuit.validate();
      break;
    case Experiment::distill_hist:
      require(!mitigations.empty(), "distill_hist grid mitigation must be non-empty");
      require(pipeline_outputs >= 1, "pipeline outputs must be >= 1");
      pipeline.validate();
      break;
    case Experiment::dist_select:
    case Experiment::tradeoff:
      require(!factory_counts.empty() && !pool_entry_values.empty(),
              "dist_select grids num_factories and pool_entries must be non-empty");
      require(pipeline_outputs >= 1, "pipeline outputs must be >= 1");
      require(excessive_l1_blocks >= 0, "excessive_l1_blocks must be >= 0");
      pipeline.validate();
      select.validate();
      for (Cycle cp : consumption_periods) require(cp >= select.D, "consumption periods must be >= D");
      break;
  }
}

std::vector<Cycle> consumption_candidates(const SweepSpec& spec) {
  if (!spec.consumption_periods.empty()) return spec.consumption_periods;
  const Cycle D = spec.select.D;
  const Cycle d = spec.select.d;
  std::vector<Cycle> periods{D, D + d / 3, D + 2 * d / 3, D + d, D + 2 * d};
  periods.erase(std::unique(periods.begin(), periods.end()), periods.end());
  return periods;
}

std::uint64_t cell_seed(std::uint64_t base_seed, const std::vector<std::size_t>& indices) {
  std::uint64_t h = derive_seed(base_seed, {});
  for (auto i : indices) h = mix64(h ^ mix64(static_cast<std::uint64_t>(i) + 0x632be59bd9b4e019ULL));
  return h;
}

namespace {

CsvTable analytic_sweep(const SweepSpec& spec) {
  CsvTable table;
  table.header = {"n", "p", "sequential", "sequential_increase", "parallel", "parallel_increase"};
  for (auto n : spec.n_values) {
    for (double p : spec.p_values) {
      const analytic::RusParams params{n, p};
      const double seq = analytic::sequential_expected_time(params);
      const double par = analytic::parallel_expected_time(params);
      table.rows.push_back({format_number(n), format_number(p), format_number(seq),
                            format_number(seq / static_cast<double>(n) - 1.0), format_number(par),
                            format_number(par - 1.0)});
    }
  }
  return table;
}

CsvTable random_circuit_sweep(const SweepSpec& spec, unsigned jobs) {
  CsvTable table;
  table.header = {"D_couple", "p_fail", "trials", "seed", "scheduled", "mean_total", "rel_delay",
                  "effective_cost", "rel_cost_increase"};
  for (std::size_t i = 0; i < spec.coupling_distances.size(); ++i) {
    for (std::size_t j = 0; j < spec.p_fail_values.size(); ++j) {
      auto params = spec.circuit;
      params.coupling_distance = spec.coupling_distances[i];
      params.p_fail = spec.p_fail_values[j];
      params.seed = cell_seed(spec.base_seed, {i, j});
      const auto m = randcircuit::random_circuit_metrics(params, spec.trials, jobs);
      table.rows.push_back({format_number(std::int64_t{params.coupling_distance}), format_number(params.p_fail),
                            format_number(spec.trials), std::to_string(params.seed), format_number(m.scheduled),
                            format_number(m.mean_total), format_number(m.relative_delay),
                            format_number(m.effective_cost), format_number(m.relative_cost_increase)});
    }
  }
  return table;
}

CsvTable distill_sweep(const SweepSpec& spec) {
  CsvTable table;
  table.header = {"mitigation", "l1_fail", "extra_cycles", "probability"};
  const std::vector<double> l1_fails =
      spec.l1_fail_values.empty() ? std::vector<double>{spec.pipeline.l1_fail} : spec.l1_fail_values;
  for (std::size_t i = 0; i < spec.mitigations.size(); ++i) {
    for (std::size_t j = 0; j < l1_fails.size(); ++j) {
      auto config = spec.pipeline;
      config.mitigation = spec.mitigations[i];
      if (config.mitigation != distillation::Mitigation::excessive_l1) {
        config.extra_blocks = 0;
      } else if (config.extra_blocks == 0) {
        config.extra_blocks = 1;
      }
      config.l1_fail = l1_fails[j];
      // Mitigations share a seed so their L1 outcome streams are paired.
      const auto run = distillation::simulate_pipeline(config, spec.pipeline_outputs, cell_seed(spec.base_seed, {j}));
      for (const auto& [extra, probability] : run.distribution.histogram) {
        table.rows.push_back({distillation::to_string(config.mitigation), format_number(config.l1_fail),
                              format_number(extra), format_number(probability)});
      }
    }
  }
  return table;
}

}  // namespace

distillation::CompletionDistribution pipeline_distribution(const SweepSpec& spec,
                                                          distillation::Mitigation mitigation, int extra_blocks) {
  auto config = spec.pipeline;
  config.mitigation = mitigation;
  config.extra_blocks = extra_blocks;
  return distillation::simulate_pipeline(config, spec.pipeline_outputs, derive_seed(spec.base_seed, {0xd157}))
      .distribution;
}

std::vector<distselect::MetricsRecord> dist_select_rows(const SweepSpec& spec,
                                                       const distillation::CompletionDistribution& dist,
                                                       const std::vector<int>& pool_entries,
                                                       std::int64_t extra_qubits_per_factory, unsigned jobs) {
  std::vector<distselect::MetricsRecord> rows;
  for (std::size_t i = 0; i < spec.factory_counts.size(); ++i) {
    for (int entries : pool_entries) {
      auto params = spec.select;
      params.num_factories = spec.factory_counts[i];
      params.pool_entries = entries;
      // Pool configurations at one factory count share trial seeds (paired runs).
      distselect::RunOptions options;
      options.trials = spec.trials;
      options.seed = cell_seed(spec.base_seed, {i});
      options.jobs = jobs;
      options.extra_qubits_per_factory = extra_qubits_per_factory;

      std::vector<Cycle> periods{params.D};
      if (entries > 0) {
        periods = spec.select_best_consumption ? consumption_candidates(spec)
                                               : std::vector<Cycle>{params.consumption_period};
      } else {
        periods = {spec.select.consumption_period};
      }
      std::optional<distselect::MetricsRecord> best;
      Cycle best_period = periods.front();
      for (Cycle cp : periods) {
        params.consumption_period = cp;
        options.effective_cost = false;
        auto record = distselect::run_dist_select(params, dist, options);
        if (!best || record.total < best->total) {
          best = record;
          best_period = cp;
        }
      }
      params.consumption_period = best_period;
      if (spec.effective_cost) {
        options.effective_cost = true;
        best = distselect::run_dist_select(params, dist, options);
      }
      rows.push_back(*best);
    }
  }
  return rows;
}

CsvTable dist_select_table(const std::vector<distselect::MetricsRecord>& rows) {
  CsvTable table;
  table.header = {"num_factories", "pool_entries", "d_pool", "consumption_period", "S",
                  "mean_R", "total", "rel_delay", "rel_cost_increase", "spatial_qubits"};
  for (const auto& r : rows) {
    table.rows.push_back({format_number(std::int64_t{r.num_factories}), format_number(std::int64_t{r.pool_entries}),
                          format_number(std::int64_t{r.d_pool}), format_number(r.consumption_period),
                          format_number(r.S), format_number(r.mean_R), format_number(r.total),
                          format_number(r.rel_delay), format_number(r.rel_cost_increase),
                          format_number(r.spatial_qubits)});
  }
  return table;
}

std::string pool_family(int pool_entries) {
  switch (pool_entries) {
    case 0: return "none";
    case 1: return "single";
    case 2: return "double";
    default: return "pool" + std::to_string(pool_entries);
  }
}

std::vector<TradeoffRow> tradeoff_table(const std::vector<TradeoffPoint>& points) {
  auto dominates = [](const TradeoffPoint& a, const TradeoffPoint& b) {
    return a.spatial_qubits <= b.spatial_qubits && a.total <= b.total &&
           (a.spatial_qubits < b.spatial_qubits || a.total < b.total);
  };
  std::vector<std::string> families;
  for (const auto& p : points) {
    if (std::find(families.begin(), families.end(), p.family) == families.end()) families.push_back(p.family);
  }
  std::vector<TradeoffRow> rows;
  for (const auto& family : families) {
    std::vector<TradeoffRow> group;
    for (const auto& p : points) {
      if (p.family == family) group.push_back({p, true, true});
    }
    std::stable_sort(group.begin(), group.end(), [](const TradeoffRow& a, const TradeoffRow& b) {
      return a.point.spatial_qubits < b.point.spatial_qubits;
    });
    for (auto& row : group) {
      for (const auto& other : points) {
        if (dominates(other, row.point)) {
          row.pareto_global = false;
          if (other.family == family) row.pareto_family = false;
        }
      }
    }
    rows.insert(rows.end(), group.begin(), group.end());
  }
  return rows;
}

CsvTable tradeoff_csv(const std::vector<TradeoffRow>& rows) {
  CsvTable table;
  table.header = {"family", "num_factories", "spatial_qubits", "total", "pareto_family", "pareto_global"};
  for (const auto& r : rows) {
    table.rows.push_back({r.point.family, format_number(std::int64_t{r.point.num_factories}),
                          format_number(r.point.spatial_qubits), format_number(r.point.total),
                          r.pareto_family ? "1" : "0", r.pareto_global ? "1" : "0"});
  }
  return table;
}

CsvTable run_sweep(const SweepSpec& spec, unsigned jobs) {
  spec.validate();
  switch (spec.experiment) {
    case Experiment::analytic_table: return analytic_sweep(spec);
    case Experiment::random_circuit: return random_circuit_sweep(spec, jobs);
    case Experiment::distill_hist: return distill_sweep(spec);
    case Experiment::dist_select: {
      const auto dist = pipeline_distribution(spec, distillation::Mitigation::none, 0);
      return dist_select_table(dist_select_rows(spec, dist, spec.pool_entry_values, 0, jobs));
    }
    case Experiment::tradeoff: {
      std::vector<TradeoffPoint> points;
      const auto dist = pipeline_distribution(spec, distillation::Mitigation::none, 0);
      for (const auto& r : dist_select_rows(spec, dist, spec.pool_entry_values, 0, jobs)) {
        points.push_back({pool_family(r.pool_entries), r.num_factories, r.spatial_qubits, r.total});
      }
      if (spec.excessive_l1_blocks > 0) {
        const auto excessive =
            pipeline_distribution(spec, distillation::Mitigation::excessive_l1, spec.excessive_l1_blocks);
        // Two pipelines per factory, each with the extra blocks.
        const std::int64_t extra_qubits = 2 * spec.excessive_l1_blocks * spec.l1_block_qubits;
        for (const auto& r : dist_select_rows(spec, excessive, {0}, extra_qubits, jobs)) {
          points.push_back({"excessive_l1", r.num_factories, r.spatial_qubits, r.total});
        }
      }
      return tradeoff_csv(tradeoff_table(points));
    }
  }
  return {};
}

}  // namespace msdpool::experiments
