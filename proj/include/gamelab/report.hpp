#pragma once

#include <string>
#include <vector>

#include "gamelab/arena.hpp"

namespace gamelab::report {

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);

void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<std::pair<std::string, double>>& bars);

// Each emitter writes the experiment's CSV files and SVG figures plus a
// report JSON that `regenerate` can re-render later.
void write_roster_outputs(const arena::RosterResult& result, const std::string& out_dir);
void write_sweep_outputs(const std::vector<arena::SweepPoint>& points, const std::string& out_dir);
void write_chess_eval_outputs(const arena::ChessEvalResult& result, const std::string& out_dir);

// Re-renders CSV/SVG outputs from a saved report JSON.
void regenerate(const std::string& report_json_path, const std::string& out_dir);

}  // namespace gamelab::report
