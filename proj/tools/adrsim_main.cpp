// adrsim command line: single scenario runs, presets and preset listing.
//
// Exit codes: 0 success, 1 validation error, 2 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "adrsim/presets.hpp"
#include "adrsim/results.hpp"
#include "adrsim/scenario_io.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

void print_aggregates(const adrsim::cli::PresetResult& result) {
  std::printf("%-28s %10s %-28s %12s %12s %5s\n", "param", "value", "metric", "mean", "stddev", "n");
  for (const auto& [key, agg] : result.aggregates) {
    const auto& [param, value, metric] = key;
    std::printf("%-28s %10s %-28s %12s %12s %5zu\n", param.c_str(),
                adrsim::cli::format_number(value).c_str(), metric.c_str(),
                adrsim::cli::format_number(agg.mean).c_str(),
                adrsim::cli::format_number(agg.stddev).c_str(), agg.count);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LoRaWAN ADR convergence simulator"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run one scenario file");
  std::string scenario_path, out_path, trace_path;
  std::uint64_t seed = 1;
  bool seed_given = false;
  run_cmd->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Base seed (overrides the file)");
  run_cmd->add_option("--out", out_path, "Result CSV path")->required();
  run_cmd->add_option("--trace", trace_path, "Optional full trace CSV path");

  auto* preset_cmd = app.add_subcommand("preset", "Run a named experiment preset");
  std::string preset_name;
  int reps = 0;
  int parallel = 1;
  std::uint64_t preset_seed = 1;
  std::vector<double> only_values;
  preset_cmd->add_option("name", preset_name, "Preset name (see list-presets)")->required();
  auto* reps_opt = preset_cmd->add_option("--reps", reps, "Repetitions per value")->check(CLI::PositiveNumber);
  preset_cmd->add_option("--seed", preset_seed, "Base seed");
  preset_cmd->add_option("--out", out_path, "Result CSV path")->required();
  preset_cmd->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  preset_cmd->add_option("--values", only_values, "Only run these swept values");

  auto* list_cmd = app.add_subcommand("list-presets", "List experiment presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }
  seed_given = seed_opt->count() > 0;

  try {
    if (*list_cmd) {
      for (const auto& p : adrsim::cli::presets()) {
        std::cout << p.name << "  (" << p.repetitions << " reps)  " << p.description << '\n';
        for (const auto& s : p.sweeps) {
          std::cout << "    " << s.param << ":";
          for (double v : s.values) std::cout << ' ' << adrsim::cli::format_number(v);
          std::cout << '\n';
        }
      }
      return 0;
    }

    if (*run_cmd) {
      adrsim::sim::Scenario sc;
      try {
        sc = adrsim::cli::load_scenario(scenario_path);
      } catch (const adrsim::cli::ScenarioError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
      }
      if (seed_given) sc.seed = seed;
      const auto trace = adrsim::sim::run(sc);
      if (!trace_path.empty()) {
        std::ofstream t(trace_path);
        if (!t) throw std::runtime_error("cannot open " + trace_path + " for writing");
        adrsim::write_trace_csv(trace, t);
      }
      const auto summary = adrsim::cli::summarize(trace);
      std::vector<adrsim::cli::ResultRow> rows;
      for (const auto& [metric, value] : adrsim::cli::summary_metrics(summary)) {
        rows.push_back({"scenario", "-", 0.0, 0, sc.seed, metric, value});
        std::cout << metric << " = " << adrsim::cli::format_number(value) << '\n';
      }
      adrsim::cli::write_csv(rows, out_path);
      return 0;
    }

    if (*preset_cmd) {
      const adrsim::cli::ExperimentPreset* preset = nullptr;
      try {
        preset = &adrsim::cli::find_preset(preset_name);
      } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
      }
      adrsim::cli::PresetRunOptions opts;
      opts.base_seed = preset_seed;
      opts.parallelism = parallel;
      if (reps_opt->count() > 0) opts.repetitions = reps;
      opts.values = only_values;
      adrsim::cli::PresetResult result;
      try {
        result = adrsim::cli::run_preset(*preset, opts);
      } catch (const adrsim::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
      }
      adrsim::cli::write_csv(result.rows, out_path);
      print_aggregates(result);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
