#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scalebench/orchestrator.hpp"
#include "scalebench/slo.hpp"

namespace scalebench {

/// Locale-independent fixed-point formatting (dot decimal separator).
inline std::string format_fixed(double v, int precision = 6) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v,
                                 std::chars_format::fixed, precision);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

inline std::ofstream open_out(const std::string& path) {
  // binary: LF line endings on every platform
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

/// demand.csv — one row per load. For exceeded loads the demand column
/// holds the largest tested amount and status says "exceeded".
inline void write_demand_csv(const std::string& path, const DemandCurve& curve,
                             int grid_max_resource) {
  std::ofstream out = open_out(path);
  out << "load,demand,status\n";
  for (const DemandRow& row : curve.rows) {
    out << row.load << ',' << (row.demand ? *row.demand : grid_max_resource) << ','
        << (row.demand ? "ok" : "exceeded") << '\n';
  }
}

/// cells.csv — per-repetition evidence for every executed cell.
inline void write_cells_csv(const std::string& path, const DemandCurve& curve) {
  std::ofstream out = open_out(path);
  out << "load,resources,repetition,slope,dropped_ratio,passed\n";
  for (const DemandRow& row : curve.rows) {
    for (const CellOutcome& cell : row.cells) {
      for (std::size_t r = 0; r < cell.repetitions.size(); ++r) {
        const RepetitionOutcome& rep = cell.repetitions[r];
        out << cell.load_magnitude << ',' << cell.resource_amount << ',' << r << ','
            << format_fixed(rep.lag_slope) << ',' << format_fixed(rep.dropped_ratio) << ','
            << (rep.passed ? "true" : "false") << '\n';
      }
    }
  }
}

/// capacity.csv — dual metric output (load_capacity strategy).
inline void write_capacity_csv(const std::string& path, const LoadCapacityResult& result) {
  std::ofstream out = open_out(path);
  out << "resources,capacity,status\n";
  for (const CapacityRow& row : result.rows) {
    out << row.resource << ',' << (row.capacity ? *row.capacity : 0) << ','
        << (row.capacity ? "ok" : "none") << '\n';
  }
}

inline void write_cells_csv(const std::string& path, const LoadCapacityResult& result) {
  std::ofstream out = open_out(path);
  out << "load,resources,repetition,slope,dropped_ratio,passed\n";
  for (const CapacityRow& row : result.rows) {
    for (const CellOutcome& cell : row.cells) {
      for (std::size_t r = 0; r < cell.repetitions.size(); ++r) {
        const RepetitionOutcome& rep = cell.repetitions[r];
        out << cell.load_magnitude << ',' << cell.resource_amount << ',' << r << ','
            << format_fixed(rep.lag_slope) << ',' << format_fixed(rep.dropped_ratio) << ','
            << (rep.passed ? "true" : "false") << '\n';
      }
    }
  }
}

/// Reads a lag series CSV with header "t_seconds,lag".
inline LagSeries read_lag_csv(const std::string& path, double warmup_seconds = 0.0) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lag csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("lag csv is empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t_seconds,lag")
    throw std::runtime_error("lag csv must start with header 't_seconds,lag'");
  LagSeries series;
  series.warmup_seconds = warmup_seconds;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("lag csv line " + std::to_string(line_no) + ": missing comma");
    try {
      LagSample s;
      s.t_seconds = std::stod(line.substr(0, comma));
      s.lag = std::stod(line.substr(comma + 1));
      series.samples.push_back(s);
    } catch (const std::exception&) {
      throw std::runtime_error("lag csv line " + std::to_string(line_no) + ": bad number");
    }
  }
  return series;
}

// ---------------------------------------------------------------------------
// Demand-curve plotting: hand-emitted SVG plus gnuplot-ready data.
// ---------------------------------------------------------------------------

struct DemandPoint {
  double load = 0;
  double demand = 0;
  bool exceeded = false;  // rendered as an open marker at the grid maximum
};

struct DemandSeriesData {
  std::string name;
  std::vector<DemandPoint> points;
};

inline void write_demand_dat(const std::string& path,
                             const std::vector<DemandSeriesData>& series) {
  std::ofstream out = open_out(path);
  out << "# load demand status\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    if (s > 0) out << "\n\n";  // gnuplot dataset separator
    out << "# series: " << series[s].name << '\n';
    for (const DemandPoint& p : series[s].points)
      out << format_fixed(p.load, 0) << ' ' << format_fixed(p.demand, 0) << ' '
          << (p.exceeded ? "exceeded" : "ok") << '\n';
  }
}

/// Fixed 800x500 viewport, load on x, resources on y, one polyline per
/// series. Exceeded cells are drawn as open circles.
inline void write_demand_svg(const std::string& path,
                             const std::vector<DemandSeriesData>& series) {
  if (series.empty()) throw std::runtime_error("nothing to plot");
  constexpr double W = 800, H = 500;
  constexpr double ML = 70, MR = 20, MT = 30, MB = 55;
  double max_load = 0, max_demand = 1;
  for (const auto& s : series)
    for (const DemandPoint& p : s.points) {
      max_load = std::max(max_load, p.load);
      max_demand = std::max(max_demand, p.demand);
    }
  if (max_load <= 0) max_load = 1;
  auto sx = [&](double load) { return ML + (W - ML - MR) * load / max_load; };
  auto sy = [&](double demand) { return H - MB - (H - MT - MB) * demand / max_demand; };
  auto num = [](double v) { return format_fixed(v, 1); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b"};
  constexpr int palette_n = 6;

  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" "
         "width=\"800\" height=\"500\">\n";
  out << "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
  // axes
  out << "<line x1=\"" << num(ML) << "\" y1=\"" << num(H - MB) << "\" x2=\"" << num(W - MR)
      << "\" y2=\"" << num(H - MB) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << num(ML) << "\" y1=\"" << num(MT) << "\" x2=\"" << num(ML)
      << "\" y2=\"" << num(H - MB) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double lv = max_load * i / 5.0;
    const double dv = max_demand * i / 5.0;
    out << "<line x1=\"" << num(sx(lv)) << "\" y1=\"" << num(H - MB) << "\" x2=\""
        << num(sx(lv)) << "\" y2=\"" << num(H - MB + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(sx(lv)) << "\" y=\"" << num(H - MB + 20)
        << "\" font-size=\"12\" text-anchor=\"middle\">" << format_fixed(lv, 0)
        << "</text>\n";
    out << "<line x1=\"" << num(ML - 5) << "\" y1=\"" << num(sy(dv)) << "\" x2=\""
        << num(ML) << "\" y2=\"" << num(sy(dv)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(ML - 8) << "\" y=\"" << num(sy(dv) + 4)
        << "\" font-size=\"12\" text-anchor=\"end\">" << format_fixed(dv, 0)
        << "</text>\n";
  }
  out << "<text x=\"" << num((ML + W - MR) / 2) << "\" y=\"" << num(H - 10)
      << "\" font-size=\"13\" text-anchor=\"middle\">load (messages/second)</text>\n";
  out << "<text x=\"18\" y=\"" << num((MT + H - MB) / 2)
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << num((MT + H - MB) / 2) << ")\">resource demand</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % palette_n];
    std::string poly;
    for (const DemandPoint& p : series[s].points)
      poly += num(sx(p.load)) + "," + num(sy(p.demand)) + " ";
    out << "<polyline points=\"" << poly << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    for (const DemandPoint& p : series[s].points) {
      out << "<circle cx=\"" << num(sx(p.load)) << "\" cy=\"" << num(sy(p.demand))
          << "\" r=\"4\" stroke=\"" << color << "\" stroke-width=\"2\" fill=\""
          << (p.exceeded ? "none" : color) << "\"/>\n";
    }
    // legend
    const double ly = MT + 8 + 18 * static_cast<double>(s);
    out << "<line x1=\"" << num(ML + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(ML + 40) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(ML + 46) << "\" y=\"" << num(ly + 4)
        << "\" font-size=\"12\">" << series[s].name << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace scalebench
