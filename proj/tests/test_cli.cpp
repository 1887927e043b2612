#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "msdpool/cli.hpp"

using msdpool::cli::run_cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("no arguments prints usage and fails") {
  const auto r = run({});
  CHECK(r.code == 1);
  CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("analytic table") {
  const auto r = run({"analytic", "--p", "0.01", "--n", "1,10,100"});
  CHECK(r.code == 0);
  CHECK(r.out.find("10,0.01,10.1010101010101,") != std::string::npos);
  CHECK(r.out.find(",1.6440193251") != std::string::npos);
}

TEST_CASE("pool distance") {
  const auto r = run({"pool-distance", "--L", "16777216", "--E", "100", "--d", "27", "--p-phys", "1e-3"});
  CHECK(r.code == 0);
  CHECK(r.out == "23\n");
  CHECK(run({"pool-distance", "--L", "1099511627776"}).code == 1);
}

TEST_CASE("version") {
  const auto r = run({"version"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("msdpool ", 0) == 0);
}

TEST_CASE("bad input exits 1, I/O failure exits 2") {
  CHECK(run({"analytic", "--bogus"}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"analytic", "--p", "1.5"}).code == 1);
  CHECK(run({"sweep"}).code == 1);
  CHECK(run({"sweep", "--config", "/nonexistent/x.yaml"}).code == 2);
  CHECK(run({"analytic", "--out", "/nonexistent-dir/t.csv"}).code == 2);

  const auto path = std::filesystem::temp_directory_path() / "msdpool_cli_bad.yaml";
  std::ofstream(path) << "experiment: analytic_table\nanalytic:\n  q: 1\n";
  const auto r = run({"sweep", "--config", path.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find(":3:3") != std::string::npos);
  CHECK(r.err.find("'q'") != std::string::npos);
}

TEST_CASE("flags override the config file") {
  const auto path = std::filesystem::temp_directory_path() / "msdpool_cli_cfg.yaml";
  std::ofstream(path) << "experiment: analytic_table\ntrials: 3\nanalytic:\n  n: [1, 2]\n  p: 0.05\n";
  const auto from_file = run({"analytic", "--config", path.string()});
  CHECK(from_file.code == 0);
  CHECK(from_file.out.find("\n2,0.05,") != std::string::npos);
  const auto overridden = run({"analytic", "--config", path.string(), "--p", "0.01"});
  CHECK(overridden.out.find("\n2,0.01,") != std::string::npos);
}

TEST_CASE("output file") {
  const auto path = std::filesystem::temp_directory_path() / "msdpool_cli_out.csv";
  std::filesystem::remove(path);
  CHECK(run({"analytic", "--out", path.string()}).code == 0);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "n,p,sequential,sequential_increase,parallel,parallel_increase");
}

TEST_CASE("subcommands are deterministic across job counts") {
  const std::vector<std::vector<std::string>> commands{
      {"random-circuit", "--width", "8", "--height", "8", "--layers", "8", "--trials", "4", "--seed", "3"},
      {"dist-select", "--L", "1024", "--factories", "8", "--pool-entries", "0,1", "--trials", "3", "--seed", "3",
       "--no-effective-cost"},
      {"distill-dist", "--outputs", "3000", "--seed", "3", "--mitigation", "racing"},
  };
  for (const auto& command : commands) {
    auto one = command;
    one.insert(one.end(), {"--jobs", "1"});
    auto many = command;
    many.insert(many.end(), {"--jobs", "4"});
    const auto a = run(one), b = run(many), c = run(many);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(b.out == c.out);
  }
}

TEST_CASE("distill-dist emits a histogram") {
  const auto r = run({"distill-dist", "--outputs", "2000", "--l1-fail", "0", "--l2-fail", "0"});
  CHECK(r.code == 0);
  CHECK(r.out == "extra_cycles,probability\n0,1\n");
}
