#include "msdpool/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <optional>
#include <ostream>

#include "msdpool/config.hpp"
#include "msdpool/experiments.hpp"
#include "msdpool/parallel.hpp"

namespace msdpool::cli {

namespace {

using experiments::CsvTable;
using experiments::Experiment;
using experiments::SweepSpec;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  std::string out;
  unsigned jobs = 0;
  int verbosity = 0;
};

void add_globals(CLI::App& app, Globals& g) {
  app.add_option("--config", g.config, "experiment manifest (YAML)");
  app.add_option("--seed", g.seed, "base seed for all randomness");
  app.add_option("--trials", g.trials, "Monte-Carlo trials per cell");
  app.add_option("--out", g.out, "write CSV here instead of stdout");
  app.add_option("--jobs", g.jobs, "worker threads (0: all cores)");
  app.add_flag("-v,--verbose", g.verbosity, "progress on stderr");
}

class Command {
 public:
  Command(Globals& g, std::ostream& out, std::ostream& err) : g_(g), out_(out), err_(err) {}

  SweepSpec base_spec(Experiment experiment) const {
    SweepSpec spec;
    if (!g_.config.empty()) spec = config::load_sweep_spec(g_.config);
    spec.experiment = experiment;
    if (g_.seed) spec.base_seed = *g_.seed;
    if (g_.trials) spec.trials = *g_.trials;
    return spec;
  }

  unsigned jobs() const { return g_.jobs == 0 ? default_jobs() : g_.jobs; }

  void emit(const CsvTable& table, const std::string& spec_output = {}) const {
    const std::string path = !g_.out.empty() ? g_.out : spec_output;
    if (path.empty()) {
      out_ << table.to_string();
    } else {
      table.write(path);
      if (g_.verbosity > 0) err_ << "wrote " << table.rows.size() << " rows to " << path << '\n';
    }
  }

  void log(const std::string& message) const {
    if (g_.verbosity > 0) err_ << message << '\n';
  }

  std::ostream& out() const { return out_; }

 private:
  Globals& g_;
  std::ostream& out_;
  std::ostream& err_;
};

struct AnalyticArgs {
  std::vector<std::int64_t> n{1, 10, 100};
  std::vector<double> p{0.01};
};

struct CircuitArgs {
  randcircuit::RandomCircuitParams circuit;
  std::vector<int> coupling;
  std::vector<double> p_fail;
};

struct SelectArgs {
  distselect::DistSelectParams select;
  std::vector<int> factories;
  std::vector<int> pool_entries;
  std::vector<Cycle> periods;
  bool no_effective_cost = false;
  bool no_period_sweep = false;
  bool tradeoff = false;
};

struct DistillArgs {
  distillation::PipelineConfig pipeline;
  std::string mitigation = "none";
  std::int64_t outputs = 100000;
};

struct PoolArgs {
  double L = 16777216;
  double E = 100;
  int d = 27;
  double p_phys = 1e-3;
  distillation::PoolBudget budget;
};

struct State {
  Globals globals;
  AnalyticArgs analytic;
  CircuitArgs circuit;
  SelectArgs select;
  DistillArgs distill;
  PoolArgs pool;
};

void build_app(CLI::App& app, State& s) {
  add_globals(app, s.globals);
  app.fallthrough();
  app.require_subcommand(1);

  auto* analytic = app.add_subcommand("analytic", "expected RUS execution time table");
  analytic->add_option("--n", s.analytic.n, "RUS operation counts")->delimiter(',');
  analytic->add_option("--p", s.analytic.p, "failure probabilities")->delimiter(',');

  auto& c = s.circuit.circuit;
  auto* rc = app.add_subcommand("random-circuit", "random lattice-surgery circuit sweep");
  rc->add_option("--d", c.d, "code distance");
  rc->add_option("--width", c.width);
  rc->add_option("--height", c.height);
  rc->add_option("--layers", c.layers);
  rc->add_option("--coupling-distance", s.circuit.coupling)->delimiter(',');
  rc->add_option("--p-fail", s.circuit.p_fail)->delimiter(',');

  auto& sel = s.select.select;
  auto* ds = app.add_subcommand("dist-select", "distributed SELECT with factories and pools");
  ds->add_option("--factories", s.select.factories)->delimiter(',');
  ds->add_option("--pool-entries", s.select.pool_entries)->delimiter(',');
  ds->add_option("--consumption-period", s.select.periods)->delimiter(',');
  ds->add_option("--d", sel.d);
  ds->add_option("--d-pool", sel.d_pool);
  ds->add_option("--M", sel.M, "sub-circuits");
  ds->add_option("--P", sel.P, "parallel Paulis on the targets");
  ds->add_option("--N", sel.N, "target qubits");
  ds->add_option("--L", sel.L, "SELECT length");
  ds->add_option("--D", sel.D, "distillation period");
  ds->add_flag("--no-effective-cost", s.select.no_effective_cost);
  ds->add_flag("--no-period-sweep", s.select.no_period_sweep, "use the first consumption period as given");
  ds->add_flag("--tradeoff", s.select.tradeoff, "emit the space-time frontier table");

  auto& pc = s.distill.pipeline;
  auto* dd = app.add_subcommand("distill-dist", "pipeline extra-delay histogram");
  dd->add_option("--mitigation", s.distill.mitigation, "none, racing, excessive_l1");
  dd->add_option("--l1-fail", pc.l1_fail);
  dd->add_option("--l2-fail", pc.l2_fail);
  dd->add_option("--extra-blocks", pc.extra_blocks);
  dd->add_option("--outputs", s.distill.outputs);

  app.add_subcommand("sweep", "run the experiment named in --config");

  auto* pd = app.add_subcommand("pool-distance", "smallest pool code distance within budget");
  pd->add_option("--L", s.pool.L, "magic states consumed");
  pd->add_option("--E", s.pool.E, "expected storage cycles");
  pd->add_option("--d", s.pool.d, "upper bound");
  pd->add_option("--p-phys", s.pool.p_phys);
  pd->add_option("--budget", s.pool.budget.budget);
  pd->add_option("--msd-error", s.pool.budget.msd_error);

  app.add_subcommand("version", "print the version");
}

int dispatch(CLI::App& app, State& s, std::ostream& out, std::ostream& err) {
  Command cmd(s.globals, out, err);
  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  auto given = [sub](const std::string& option) { return sub->get_option(option)->count() > 0; };

  if (name == "version") {
    out << "msdpool " << MSDPOOL_VERSION << '\n';
    return 0;
  }
  if (name == "pool-distance") {
    out << distillation::choose_pool_distance(s.pool.L, s.pool.E, s.pool.d, s.pool.p_phys, s.pool.budget) << '\n';
    return 0;
  }
  if (name == "analytic") {
    auto spec = cmd.base_spec(Experiment::analytic_table);
    if (given("--n") || s.globals.config.empty()) spec.n_values = s.analytic.n;
    if (given("--p") || s.globals.config.empty()) spec.p_values = s.analytic.p;
    cmd.emit(experiments::run_sweep(spec, cmd.jobs()), spec.output);
    return 0;
  }
  if (name == "random-circuit") {
    auto spec = cmd.base_spec(Experiment::random_circuit);
    const auto& c = s.circuit.circuit;
    if (given("--d")) spec.circuit.d = c.d;
    if (given("--width")) spec.circuit.width = c.width;
    if (given("--height")) spec.circuit.height = c.height;
    if (given("--layers")) spec.circuit.layers = c.layers;
    if (given("--coupling-distance")) spec.coupling_distances = s.circuit.coupling;
    if (given("--p-fail")) spec.p_fail_values = s.circuit.p_fail;
    cmd.log("random-circuit: " + std::to_string(spec.coupling_distances.size() * spec.p_fail_values.size()) +
            " cells, " + std::to_string(spec.trials) + " trials each");
    cmd.emit(experiments::run_sweep(spec, cmd.jobs()), spec.output);
    return 0;
  }
  if (name == "dist-select") {
    auto spec = cmd.base_spec(s.select.tradeoff ? Experiment::tradeoff : Experiment::dist_select);
    const auto& p = s.select.select;
    auto& q = spec.select;
    if (given("--d")) q.d = p.d;
    if (given("--d-pool")) q.d_pool = p.d_pool;
    if (given("--M")) q.M = p.M;
    if (given("--P")) q.P = p.P;
    if (given("--N")) q.N = p.N;
    if (given("--L")) q.L = p.L;
    if (given("--D")) {
      q.D = p.D;
      spec.pipeline.period = p.D;
      if (q.consumption_period < q.D) q.consumption_period = q.D;
    }
    if (given("--factories")) spec.factory_counts = s.select.factories;
    if (given("--pool-entries")) spec.pool_entry_values = s.select.pool_entries;
    if (given("--consumption-period")) spec.consumption_periods = s.select.periods;
    if (s.select.no_effective_cost) spec.effective_cost = false;
    if (s.select.no_period_sweep) {
      spec.select_best_consumption = false;
      if (!spec.consumption_periods.empty()) q.consumption_period = spec.consumption_periods.front();
    }
    cmd.log("dist-select: " + std::to_string(spec.factory_counts.size() * spec.pool_entry_values.size()) +
            " configurations, " + std::to_string(spec.trials) + " trials each");
    cmd.emit(experiments::run_sweep(spec, cmd.jobs()), spec.output);
    return 0;
  }
  if (name == "distill-dist") {
    auto spec = cmd.base_spec(Experiment::distill_hist);
    const auto& pc = s.distill.pipeline;
    if (given("--l1-fail")) spec.pipeline.l1_fail = pc.l1_fail;
    if (given("--l2-fail")) spec.pipeline.l2_fail = pc.l2_fail;
    if (given("--extra-blocks")) spec.pipeline.extra_blocks = pc.extra_blocks;
    if (given("--outputs")) spec.pipeline_outputs = s.distill.outputs;
    auto mitigation = spec.pipeline.mitigation;
    if (given("--mitigation") || s.globals.config.empty()) {
      mitigation = distillation::parse_mitigation(s.distill.mitigation);
    }
    int extra = spec.pipeline.extra_blocks;
    if (mitigation == distillation::Mitigation::excessive_l1 && extra == 0) extra = 1;
    spec.pipeline.mitigation = mitigation;
    spec.pipeline.extra_blocks = extra;
    spec.pipeline.validate();
    require(spec.pipeline_outputs >= 1, "outputs must be >= 1");
    const auto dist = experiments::pipeline_distribution(spec, mitigation, extra);
    CsvTable table;
    table.header = {"extra_cycles", "probability"};
    for (const auto& [cycles, probability] : dist.histogram) {
      table.rows.push_back({experiments::format_number(cycles), experiments::format_number(probability)});
    }
    cmd.log("mean extra cycles " + experiments::format_number(dist.mean_extra));
    cmd.emit(table, spec.output);
    return 0;
  }
  if (name == "sweep") {
    require(!s.globals.config.empty(), "sweep requires --config");
    SweepSpec spec = config::load_sweep_spec(s.globals.config);
    if (s.globals.seed) spec.base_seed = *s.globals.seed;
    if (s.globals.trials) spec.trials = *s.globals.trials;
    cmd.log("sweep: " + experiments::to_string(spec.experiment));
    cmd.emit(experiments::run_sweep(spec, cmd.jobs()), spec.output);
    return 0;
  }
  throw ValidationError("unknown subcommand '" + name + "'");
}

constexpr const char* kDescription = "Magic-state distillation and pooling simulator";

}  // namespace

std::string usage() {
  State state;
  CLI::App app{kDescription, "msdpool"};
  build_app(app, state);
  return app.help();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    err << usage();
    return 1;
  }
  State state;
  CLI::App app{kDescription, "msdpool"};
  build_app(app, state);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  try {
    return dispatch(app, state, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace msdpool::cli
