// Command-line front end: run, compare, sweep, echo-config, list-cores.
// Exit status: 0 success, 1 configuration error, 2 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sara/sara.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct ConfigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

sara::ScenarioConfig load(const std::string& path, std::optional<std::uint64_t> seed,
                          std::optional<sara::Cycle> duration) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigFailure("cannot open " + path);
  std::ostringstream text;
  text << f.rdbuf();
  sara::ScenarioConfig cfg;
  try {
    cfg = sara::parse_config(text.str());
    if (seed) cfg.seed = *seed;
    if (duration) {
      cfg.duration_cycles = *duration;
      cfg.duration_ms.reset();
    }
    cfg.validate();
  } catch (const sara::Error& e) {
    throw ConfigFailure(path + ": " + e.what());
  }
  return cfg;
}

void print_summary(const std::vector<sara::SimulationReport>& reports) {
  const sara::PolicyComparison cmp = sara::policy_comparison(reports);
  for (const sara::PolicyTotals& t : cmp.totals) {
    std::printf("%-10s total %.3f GB/s  row hits %.1f%%  worst min NPI %.3f\n",
                std::string(sara::to_string(t.policy)).c_str(), t.total_bw_bytes_s / 1e9, 100.0 * t.row_hit_rate,
                t.worst_min_npi);
  }
  for (const sara::SimulationReport& r : reports) {
    std::printf("\n[%s]\n%-18s %9s %12s %10s\n", std::string(sara::to_string(r.policy)).c_str(), "dma", "min_npi",
                "bw_MB/s", "mean_prio");
    for (const sara::DmaReport& d : r.dmas)
      std::printf("%-18s %9.3f %12.1f %10.3f\n", d.name.c_str(), d.min_npi ? d.min_npi->value : sara::kNpiMax,
                  d.mean_bw_bytes_s / 1e6, d.histogram.mean_level());
  }
}

std::vector<sara::Policy> parse_policies(const std::vector<std::string>& names) {
  std::vector<sara::Policy> out;
  for (const std::string& n : names) {
    auto p = sara::parse_policy(n);
    if (!p) throw ConfigFailure("unknown policy '" + n + "'");
    out.push_back(*p);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycle-level simulator of a shared-memory SoC with self-aware QoS scheduling"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<sara::Cycle> duration;
  std::string out_dir = "out";
  unsigned jobs = 1;
  std::string policy;
  std::vector<std::string> policies;
  std::vector<double> freqs;
  std::string sweep_dma = "image_processor";

  auto common = [&](CLI::App* sub) {
    sub->add_option("config", config, "Scenario file")->required();
    sub->add_option("--seed", seed, "Override the scenario seed");
    sub->add_option("--duration", duration, "Override the duration, in controller cycles");
  };

  CLI::App* run = app.add_subcommand("run", "Simulate one scenario");
  common(run);
  run->add_option("--policy", policy, "Override the controller policy");
  run->add_option("--out", out_dir, "Output directory");

  CLI::App* compare = app.add_subcommand("compare", "Simulate one scenario under several policies");
  common(compare);
  compare->add_option("--policies", policies, "Policies to compare")->delimiter(',');
  compare->add_option("--out", out_dir, "Output directory");
  compare->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  CLI::App* sweep = app.add_subcommand("sweep", "Sweep the DRAM I/O frequency");
  common(sweep);
  sweep->add_option("--freqs", freqs, "I/O frequencies in MHz")->delimiter(',')->required();
  sweep->add_option("--dma", sweep_dma, "DMA whose priority distribution is reported");
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  CLI::App* echo = app.add_subcommand("echo-config", "Print the canonical form of a scenario");
  common(echo);

  app.add_subcommand("list-cores", "List the known cores");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (app.got_subcommand("list-cores")) {
      std::printf("%-16s %-7s %s\n", "core", "queue", "performance");
      for (const sara::CoreInfo& c : sara::kCores)
        std::printf("%-16s %-7s %s\n", std::string(c.name).c_str(), std::string(sara::to_string(c.core_class)).c_str(),
                    std::string(c.performance_type).c_str());
      return kOk;
    }

    sara::ScenarioConfig cfg = load(config, seed, duration);

    if (app.got_subcommand("echo-config")) {
      std::cout << sara::emit_config(cfg);
      return kOk;
    }
    if (app.got_subcommand("run")) {
      if (!policy.empty()) cfg.controller.policy = parse_policies({policy}).front();
      std::vector<sara::SimulationReport> reports{sara::run(cfg)};
      sara::write_comparison(out_dir, reports);
      print_summary(reports);
      return kOk;
    }
    if (app.got_subcommand("compare")) {
      const auto list = parse_policies(policies);
      if (list.empty()) return kOk;
      const auto reports = sara::run_comparison(cfg, list, jobs);
      sara::write_comparison(out_dir, reports);
      print_summary(reports);
      return kOk;
    }
    if (app.got_subcommand("sweep")) {
      const auto rows = sara::run_sweep(cfg, freqs, sweep_dma, jobs);
      sara::write_sweep(out_dir, rows);
      sara::write_sweep_csv(std::cout, rows);
      return kOk;
    }
  } catch (const ConfigFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const sara::Error& e) {
    const bool config_side = e.code() == sara::ErrorCode::validation_error || e.code() == sara::ErrorCode::parse_error ||
                             e.code() == sara::ErrorCode::config_invalid;
    std::cerr << "error: " << e.what() << "\n";
    return config_side ? kConfigError : kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}
