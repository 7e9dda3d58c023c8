#include <string>

#include <CLI11.hpp>

#include "scalebench/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"scalebench: deterministic scalability benchmarking for stream workloads"};
  app.require_subcommand(1);

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "execute a benchmark config, write CSV results");
  run->add_option("config", run_config, "benchmark config (JSON)")->required();

  std::string lag_csv;
  double warmup = 0.0, load = 0.0, ratio = 0.01;
  CLI::App* analyze =
      app.add_subcommand("analyze", "fit the lag trend of a lag CSV and check the SLO");
  analyze->add_option("csv", lag_csv, "lag series CSV (t_seconds,lag)")->required();
  analyze->add_option("--warmup", warmup, "warm-up seconds excluded from the fit");
  analyze->add_option("--load", load, "generated messages/second")->required();
  analyze->add_option("--ratio", ratio, "SLO threshold as a fraction of the load");

  std::string oracle_config;
  CLI::App* oracle =
      app.add_subcommand("oracle", "print the closed-form expected demand per load");
  oracle->add_option("config", oracle_config, "benchmark config (JSON)")->required();

  std::string results_dir;
  CLI::App* plot = app.add_subcommand("plot", "emit demand.svg and demand.dat from results");
  plot->add_option("results", results_dir, "results directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return scalebench::cli::cmd_run(run_config);
  if (analyze->parsed()) return scalebench::cli::cmd_analyze(lag_csv, warmup, load, ratio);
  if (oracle->parsed()) return scalebench::cli::cmd_oracle(oracle_config);
  if (plot->parsed()) return scalebench::cli::cmd_plot(results_dir);
  return scalebench::cli::kExitOk;
}
