#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "scalebench/config.hpp"
#include "scalebench/orchestrator.hpp"
#include "scalebench/report.hpp"

namespace scalebench::cli {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;

/// Executes the configured search and writes demand.csv (or capacity.csv),
/// cells.csv and manifest.json under <output_dir>/<run-id>/. The
/// SCALEBENCH_OUT environment variable overrides the configured output
/// directory. Exit 0 on completion, even with exceeded cells.
inline int cmd_run(const std::string& config_path, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  BenchmarkConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << '\n';
    return kExitValidation;
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << '\n';
    return kExitValidation;
  }

  if (const char* env_out = std::getenv("SCALEBENCH_OUT"); env_out && *env_out)
    cfg.output_dir = env_out;

  try {
    const std::filesystem::path run_dir =
        std::filesystem::path(cfg.output_dir) / run_id_for(cfg);
    std::filesystem::create_directories(run_dir);

    ExperimentSpec base = cfg.base_experiment_spec();
    CellEvaluator evaluate =
        make_engine_evaluator(base, cfg.load_magnitudes, cfg.resource_amounts);

    {
      std::ofstream manifest = open_out((run_dir / "manifest.json").string());
      manifest << config_to_json(cfg).dump(2) << '\n';
    }

    if (cfg.strategy == SearchStrategy::load_capacity) {
      LoadCapacityResult result =
          load_capacity(cfg.resource_amounts, cfg.load_magnitudes, evaluate);
      write_capacity_csv((run_dir / "capacity.csv").string(), result);
      write_cells_csv((run_dir / "cells.csv").string(), result);
      for (const CapacityRow& row : result.rows)
        out << "resources=" << row.resource << " capacity="
            << (row.capacity ? std::to_string(*row.capacity) : "none") << '\n';
    } else {
      DemandCurve curve;
      if (cfg.strategy == SearchStrategy::full) {
        curve = full_search_demand(cfg.load_magnitudes, cfg.resource_amounts, evaluate,
                                   cfg.parallel_cells)
                    .curve;
      } else {
        curve = linear_search_demand(cfg.load_magnitudes, cfg.resource_amounts, evaluate,
                                     cfg.lower_bound_restriction);
      }
      write_demand_csv((run_dir / "demand.csv").string(), curve,
                       cfg.resource_amounts.back());
      write_cells_csv((run_dir / "cells.csv").string(), curve);
      for (const DemandRow& row : curve.rows)
        out << "load=" << row.load << " demand="
            << (row.demand ? std::to_string(*row.demand) : "exceeded") << '\n';
    }
    out << "results: " << run_dir.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return kExitRuntime;
  }
}

/// Reads a lag CSV (t_seconds,lag), prints the fitted slope with six
/// decimals and the lag-trend SLO verdict.
inline int cmd_analyze(const std::string& csv_path, double warmup_seconds,
                       double load_msgs_per_sec, double ratio,
                       std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    const LagSeries series = read_lag_csv(csv_path, warmup_seconds);
    const double slope = lag_trend(series);
    const SloVerdict v = check_lag_slo(slope, load_msgs_per_sec, ratio);
    out << "slope=" << format_fixed(slope, 6) << ' ' << (v.passed ? "PASS" : "FAIL")
        << '\n';
    return kExitOk;
  } catch (const NoSamplesAfterWarmup& e) {
    err << "analyze failed: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "analyze failed: " << e.what() << '\n';
    return kExitRuntime;
  }
}

/// Prints `load,expected_demand` per load from the closed-form oracle.
/// Refuses non-deterministic configs and loads with injected lateness, where
/// the oracle's assumptions do not hold.
inline int cmd_oracle(const std::string& config_path, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  BenchmarkConfig cfg;
  try {
    cfg = load_config(config_path);
    cfg.validate();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << '\n';
    return kExitValidation;
  }
  if (!cfg.deterministic) {
    err << "oracle requires a deterministic (virtual-time) config\n";
    return kExitValidation;
  }
  if (cfg.p_late != 0.0) {
    err << "oracle requires zero injected lateness\n";
    return kExitValidation;
  }
  ExperimentSpec spec = cfg.base_experiment_spec();
  for (std::int64_t load : cfg.load_magnitudes) {
    spec.load.magnitude = load;
    const std::optional<int> demand = analytic_demand_oracle(spec);
    out << load << ',' << (demand ? std::to_string(*demand) : "exceeded") << '\n';
  }
  return kExitOk;
}

/// Renders demand.svg and demand.dat for a results directory: either one run
/// directory (single series) or a directory of run directories (one series
/// per run, labeled by profile name).
inline int cmd_plot(const std::string& results_dir, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  namespace fs = std::filesystem;
  try {
    auto load_series = [](const fs::path& dir) -> std::optional<DemandSeriesData> {
      const fs::path csv = dir / "demand.csv";
      if (!fs::exists(csv)) return std::nullopt;
      DemandSeriesData series;
      series.name = dir.filename().string();
      const fs::path manifest = dir / "manifest.json";
      if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        nlohmann::json j;
        in >> j;
        if (j.contains("sut_profile") && j["sut_profile"].contains("name"))
          series.name = j["sut_profile"]["name"].get<std::string>();
      }
      std::ifstream in(csv);
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
          throw std::runtime_error("malformed demand.csv row: " + line);
        DemandPoint p;
        p.load = std::stod(line.substr(0, c1));
        p.demand = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        p.exceeded = line.substr(c2 + 1) == "exceeded";
        series.points.push_back(p);
      }
      return series;
    };

    const fs::path root(results_dir);
    if (!fs::exists(root)) {
      err << "no results at " << results_dir << '\n';
      return kExitRuntime;
    }
    std::vector<DemandSeriesData> all;
    if (auto s = load_series(root)) {
      all.push_back(std::move(*s));
    } else {
      std::vector<fs::path> subdirs;
      for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) subdirs.push_back(entry.path());
      std::sort(subdirs.begin(), subdirs.end());
      for (const fs::path& sub : subdirs)
        if (auto s = load_series(sub)) all.push_back(std::move(*s));
    }
    if (all.empty() || all.front().points.empty()) {
      err << "no demand.csv with data under " << results_dir << '\n';
      return kExitRuntime;
    }
    write_demand_svg((root / "demand.svg").string(), all);
    write_demand_dat((root / "demand.dat").string(), all);
    out << "wrote " << (root / "demand.svg").string() << " and "
        << (root / "demand.dat").string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "plot failed: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace scalebench::cli
