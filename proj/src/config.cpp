#include "msdpool/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace msdpool::config {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    const auto mark = node.Mark();
    std::ostringstream out;
    out << source_;
    if (!mark.is_null()) out << ':' << mark.line + 1 << ':' << mark.column + 1;
    out << ": " << message;
    throw ValidationError(out.str());
  }

  template <typename T>
  T scalar(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) fail(node, "'" + key + "' must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + key + "' has an invalid value '" + node.Scalar() + "'");
    }
  }

  template <typename T>
  std::vector<T> list(const YAML::Node& node, const std::string& key) const {
    std::vector<T> values;
    if (node.IsSequence()) {
      for (const auto& item : node) values.push_back(scalar<T>(item, key));
      if (values.empty()) fail(node, "'" + key + "' grid is empty");
    } else {
      values.push_back(scalar<T>(node, key));
    }
    return values;
  }

  using Handler = std::function<void(const YAML::Node&)>;

  void section(const YAML::Node& node, const std::string& name, const std::map<std::string, Handler>& handlers) const {
    if (!node.IsMap()) fail(node, "'" + name + "' must be a mapping");
    for (const auto& entry : node) {
      const auto key = entry.first.as<std::string>();
      const auto handler = handlers.find(key);
      if (handler == handlers.end()) {
        fail(entry.first, "unknown key '" + key + "'" + (name.empty() ? "" : " in section '" + name + "'"));
      }
      handler->second(entry.second);
    }
  }

 private:
  std::string source_;
};

}  // namespace

std::string resolve_config_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::path(path).is_absolute() || fs::exists(path)) return path;
  if (const char* dir = std::getenv(kConfigDirEnv); dir != nullptr && *dir != '\0') {
    const auto candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  return path;
}

experiments::SweepSpec parse_sweep_spec(const std::string& text, const std::string& source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream out;
    out << source_name << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
    throw ValidationError(out.str());
  }
  experiments::SweepSpec spec;
  if (root.IsNull()) return spec;
  const Reader r(source_name);
  using experiments::SweepSpec;

  auto& c = spec.circuit;
  auto& p = spec.pipeline;
  auto& s = spec.select;
  r.section(root, "", {
    {"experiment", [&](const YAML::Node& n) {
       try {
         spec.experiment = experiments::parse_experiment(r.scalar<std::string>(n, "experiment"));
       } catch (const ValidationError& e) {
         r.fail(n, e.what());
       }
     }},
    {"trials", [&](const YAML::Node& n) { spec.trials = r.scalar<std::int64_t>(n, "trials"); }},
    {"seed", [&](const YAML::Node& n) { spec.base_seed = r.scalar<std::uint64_t>(n, "seed"); }},
    {"output", [&](const YAML::Node& n) { spec.output = r.scalar<std::string>(n, "output"); }},
    {"analytic", [&](const YAML::Node& n) {
       r.section(n, "analytic", {
         {"n", [&](const YAML::Node& v) { spec.n_values = r.list<std::int64_t>(v, "n"); }},
         {"p", [&](const YAML::Node& v) { spec.p_values = r.list<double>(v, "p"); }},
       });
     }},
    {"random_circuit", [&](const YAML::Node& n) {
       r.section(n, "random_circuit", {
         {"d", [&](const YAML::Node& v) { c.d = r.scalar<Cycle>(v, "d"); }},
         {"width", [&](const YAML::Node& v) { c.width = r.scalar<int>(v, "width"); }},
         {"height", [&](const YAML::Node& v) { c.height = r.scalar<int>(v, "height"); }},
         {"layers", [&](const YAML::Node& v) { c.layers = r.scalar<int>(v, "layers"); }},
         {"coupling_distance", [&](const YAML::Node& v) { spec.coupling_distances = r.list<int>(v, "coupling_distance"); }},
         {"p_fail", [&](const YAML::Node& v) { spec.p_fail_values = r.list<double>(v, "p_fail"); }},
       });
     }},
    {"pipeline", [&](const YAML::Node& n) {
       r.section(n, "pipeline", {
         {"n_l1", [&](const YAML::Node& v) { p.n_l1 = r.scalar<int>(v, "n_l1"); }},
         {"l1_cycles", [&](const YAML::Node& v) { p.l1_cycles = r.scalar<Cycle>(v, "l1_cycles"); }},
         {"l1_fail", [&](const YAML::Node& v) { p.l1_fail = r.scalar<double>(v, "l1_fail"); }},
         {"l2_slot_cycles", [&](const YAML::Node& v) { p.l2_slot_cycles = r.scalar<Cycle>(v, "l2_slot_cycles"); }},
         {"l2_fail", [&](const YAML::Node& v) { p.l2_fail = r.scalar<double>(v, "l2_fail"); }},
         {"period", [&](const YAML::Node& v) { p.period = r.scalar<Cycle>(v, "period"); }},
         {"transfer_cycles", [&](const YAML::Node& v) { p.transfer_cycles = r.scalar<Cycle>(v, "transfer_cycles"); }},
         {"mitigation", [&](const YAML::Node& v) {
            try {
              p.mitigation = distillation::parse_mitigation(r.scalar<std::string>(v, "mitigation"));
            } catch (const ValidationError& e) {
              r.fail(v, e.what());
            }
          }},
         {"extra_blocks", [&](const YAML::Node& v) { p.extra_blocks = r.scalar<int>(v, "extra_blocks"); }},
         {"outputs", [&](const YAML::Node& v) { spec.pipeline_outputs = r.scalar<std::int64_t>(v, "outputs"); }},
       });
     }},
    {"distill_hist", [&](const YAML::Node& n) {
       r.section(n, "distill_hist", {
         {"mitigation", [&](const YAML::Node& v) {
            spec.mitigations.clear();
            for (const auto& name : r.list<std::string>(v, "mitigation")) {
              try {
                spec.mitigations.push_back(distillation::parse_mitigation(name));
              } catch (const ValidationError& e) {
                r.fail(v, e.what());
              }
            }
          }},
         {"l1_fail", [&](const YAML::Node& v) { spec.l1_fail_values = r.list<double>(v, "l1_fail"); }},
       });
     }},
    {"dist_select", [&](const YAML::Node& n) {
       r.section(n, "dist_select", {
         {"d", [&](const YAML::Node& v) { s.d = r.scalar<Cycle>(v, "d"); }},
         {"d_pool", [&](const YAML::Node& v) { s.d_pool = r.scalar<int>(v, "d_pool"); }},
         {"num_factories", [&](const YAML::Node& v) { spec.factory_counts = r.list<int>(v, "num_factories"); }},
         {"M", [&](const YAML::Node& v) { s.M = r.scalar<int>(v, "M"); }},
         {"P", [&](const YAML::Node& v) { s.P = r.scalar<int>(v, "P"); }},
         {"N", [&](const YAML::Node& v) { s.N = r.scalar<std::int64_t>(v, "N"); }},
         {"L", [&](const YAML::Node& v) { s.L = r.scalar<std::int64_t>(v, "L"); }},
         {"D", [&](const YAML::Node& v) { s.D = r.scalar<Cycle>(v, "D"); }},
         {"p_phys", [&](const YAML::Node& v) { s.p_phys = r.scalar<double>(v, "p_phys"); }},
         {"pool_entries", [&](const YAML::Node& v) { spec.pool_entry_values = r.list<int>(v, "pool_entries"); }},
         {"consumption_period", [&](const YAML::Node& v) { spec.consumption_periods = r.list<Cycle>(v, "consumption_period"); }},
         {"select_best_consumption", [&](const YAML::Node& v) { spec.select_best_consumption = r.scalar<bool>(v, "select_best_consumption"); }},
         {"effective_cost", [&](const YAML::Node& v) { spec.effective_cost = r.scalar<bool>(v, "effective_cost"); }},
         {"magic_prep_d", [&](const YAML::Node& v) { s.magic_prep_d = r.scalar<int>(v, "magic_prep_d"); }},
         {"clifford_d", [&](const YAML::Node& v) { s.clifford_d = r.scalar<int>(v, "clifford_d"); }},
         {"pauli_d", [&](const YAML::Node& v) { s.pauli_d = r.scalar<int>(v, "pauli_d"); }},
         {"uncompute_d", [&](const YAML::Node& v) { s.uncompute_d = r.scalar<int>(v, "uncompute_d"); }},
       });
     }},
    {"tradeoff", [&](const YAML::Node& n) {
       r.section(n, "tradeoff", {
         {"excessive_l1_blocks", [&](const YAML::Node& v) { spec.excessive_l1_blocks = r.scalar<int>(v, "excessive_l1_blocks"); }},
         {"l1_block_qubits", [&](const YAML::Node& v) { spec.l1_block_qubits = r.scalar<std::int64_t>(v, "l1_block_qubits"); }},
       });
     }},
  });
  if (spec.consumption_periods.size() == 1) {
    s.consumption_period = spec.consumption_periods.front();
  } else {
    s.consumption_period = s.D;
  }
  return spec;
}

experiments::SweepSpec load_sweep_spec(const std::string& path) {
  const auto resolved = resolve_config_path(path);
  std::ifstream file(resolved, std::ios::binary);
  if (!file) throw IoError("cannot read config file '" + resolved + "'");
  std::ostringstream text;
  text << file.rdbuf();
  return parse_sweep_spec(text.str(), resolved);
}

}  // namespace msdpool::config
