#include "gamelab/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gamelab/errors.hpp"

namespace gamelab::report {

namespace fs = std::filesystem;

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open CSV for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  if (!out) throw IoError("write failure on CSV: " + path);
}

namespace {

constexpr int kWidth = 640, kHeight = 420;
constexpr int kMarginLeft = 64, kMarginRight = 24, kMarginTop = 40, kMarginBottom = 56;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf"};

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string svg_header(const std::string& title, const std::string& x_label,
                       const std::string& y_label) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label
     << "</text>\n"
     << "<text x=\"14\" y=\"" << kHeight / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        "transform=\"rotate(-90 14 " << kHeight / 2 << ")\">" << y_label << "</text>\n";
  return os.str();
}

struct Scale {
  double lo, hi;
  int pixel_lo, pixel_hi;
  double at(double v) const {
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }
};

void draw_axes(std::ostringstream& os, const Scale& x, const Scale& y) {
  os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kHeight - kMarginBottom << "\" x2=\""
     << kWidth - kMarginRight << "\" y2=\"" << kHeight - kMarginBottom
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
     << "\" y2=\"" << kHeight - kMarginBottom << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x.lo + (x.hi - x.lo) * i / 5.0;
    const double yv = y.lo + (y.hi - y.lo) * i / 5.0;
    const double xp = x.at(xv);
    const double yp = y.at(yv);
    os << "<line x1=\"" << xp << "\" y1=\"" << kHeight - kMarginBottom << "\" x2=\"" << xp
       << "\" y2=\"" << kHeight - kMarginBottom + 4 << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << xp << "\" y=\"" << kHeight - kMarginBottom + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
       << fmt(std::round(xv * 100) / 100) << "</text>\n";
    os << "<line x1=\"" << kMarginLeft - 4 << "\" y1=\"" << yp << "\" x2=\"" << kMarginLeft
       << "\" y2=\"" << yp << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << yp + 3
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
       << fmt(std::round(yv * 100) / 100) << "</text>\n";
  }
}

}  // namespace

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series) {
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  bool first = true;
  for (const Series& s : series)
    for (const auto& [px, py] : s.points) {
      if (first) {
        x_lo = x_hi = px;
        y_lo = y_hi = py;
        first = false;
      }
      x_lo = std::min(x_lo, px);
      x_hi = std::max(x_hi, px);
      y_lo = std::min(y_lo, py);
      y_hi = std::max(y_hi, py);
    }
  if (y_lo == y_hi) y_hi = y_lo + 1;
  if (x_lo == x_hi) x_hi = x_lo + 1;

  const Scale xs{x_lo, x_hi, kMarginLeft, kWidth - kMarginRight};
  const Scale ys{y_lo, y_hi, kHeight - kMarginBottom, kMarginTop};

  std::ostringstream os;
  os << svg_header(title, x_label, y_label);
  draw_axes(os, xs, ys);
  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % std::size(kPalette)];
    std::ostringstream pts;
    for (const auto& [px, py] : series[si].points)
      pts << xs.at(px) << "," << ys.at(py) << " ";
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
       << pts.str() << "\"/>\n";
    for (const auto& [px, py] : series[si].points)
      os << "<circle cx=\"" << xs.at(px) << "\" cy=\"" << ys.at(py) << "\" r=\"3\" fill=\""
         << color << "\"/>\n";
    os << "<text x=\"" << kWidth - kMarginRight - 6 << "\" y=\"" << kMarginTop + 16 * (si + 1)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color
       << "\">" << series[si].name << "</text>\n";
  }
  os << "</svg>\n";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open SVG for writing: " + path);
  out << os.str();
}

void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<std::pair<std::string, double>>& bars) {
  double y_hi = 1;
  for (const auto& [label, v] : bars) y_hi = std::max(y_hi, v);
  const Scale ys{0, y_hi, kHeight - kMarginBottom, kMarginTop};

  std::ostringstream os;
  os << svg_header(title, x_label, y_label);
  const Scale xs{0, 1, kMarginLeft, kWidth - kMarginRight};
  draw_axes(os, xs, ys);
  const double span = static_cast<double>(kWidth - kMarginLeft - kMarginRight);
  const double step = bars.empty() ? span : span / static_cast<double>(bars.size());
  const double bar_w = step * 0.8;
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double x = kMarginLeft + step * static_cast<double>(i) + (step - bar_w) / 2;
    const double y = ys.at(bars[i].second);
    os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w << "\" height=\""
       << (kHeight - kMarginBottom - y) << "\" fill=\"" << kPalette[0] << "\"/>\n";
    if (bars.size() <= 40 || i % (bars.size() / 20 + 1) == 0)
      os << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << kHeight - kMarginBottom + 14
         << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\">"
         << bars[i].first << "</text>\n";
  }
  os << "</svg>\n";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open SVG for writing: " + path);
  out << os.str();
}

namespace {

void save_report_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open report JSON for writing: " + path);
  out << j.dump(2) << '\n';
}

void render_roster(const nlohmann::json& data, const std::string& out_dir) {
  std::vector<std::vector<std::string>> rows;
  // One CSV row per (pairing, seat); schema: noise, agent_a, agent_b, seat, wins, games, invalid_preds
  for (const auto& r : data.at("rows")) {
    rows.push_back({fmt(r.at("noise").get<double>()), r.at("agent_a"), r.at("agent_b"), "a",
                    std::to_string(r.at("wins_a").get<int64_t>()),
                    std::to_string(r.at("games").get<int64_t>()),
                    std::to_string(r.at("invalid_a").get<int64_t>())});
    rows.push_back({fmt(r.at("noise").get<double>()), r.at("agent_a"), r.at("agent_b"), "b",
                    std::to_string(r.at("wins_b").get<int64_t>()),
                    std::to_string(r.at("games").get<int64_t>()),
                    std::to_string(r.at("invalid_b").get<int64_t>())});
  }
  write_csv((fs::path(out_dir) / "nim_roster.csv").string(),
            {"noise", "agent_a", "agent_b", "seat", "wins", "games", "invalid_preds"}, rows);

  // Win-rate-vs-noise curve per agent, aggregated over its pairings.
  std::map<std::string, std::map<double, std::pair<int64_t, int64_t>>> per_agent;
  for (const auto& r : data.at("rows")) {
    const double noise = r.at("noise").get<double>();
    const int64_t games = r.at("games").get<int64_t>();
    auto& a = per_agent[r.at("agent_a").get<std::string>()][noise];
    a.first += r.at("wins_a").get<int64_t>();
    a.second += games;
    auto& b = per_agent[r.at("agent_b").get<std::string>()][noise];
    b.first += r.at("wins_b").get<int64_t>();
    b.second += games;
  }
  std::vector<Series> series;
  for (const auto& [agent, curve] : per_agent) {
    Series s;
    s.name = agent;
    for (const auto& [noise, wl] : curve)
      s.points.emplace_back(noise, wl.second > 0 ? static_cast<double>(wl.first) /
                                                       static_cast<double>(wl.second)
                                                 : 0.0);
    series.push_back(std::move(s));
  }
  write_line_chart_svg((fs::path(out_dir) / "nim_roster.svg").string(),
                       "Nim tournament win rates by dataset randomness", "noise level",
                       "win rate", series);
}

void render_sweep(const nlohmann::json& data, const std::string& out_dir) {
  std::vector<std::vector<std::string>> rows;
  Series s{"bert-G vs random", {}};
  for (const auto& p : data.at("points")) {
    rows.push_back({std::to_string(p.at("match_size").get<int>()),
                    fmt(p.at("win_rate").get<double>()),
                    std::to_string(p.at("games").get<int64_t>()),
                    std::to_string(p.at("seed").get<uint64_t>())});
    s.points.emplace_back(p.at("match_size").get<int>(), p.at("win_rate").get<double>());
  }
  write_csv((fs::path(out_dir) / "nim_sweep.csv").string(),
            {"match_size", "win_rate", "games", "seed"}, rows);
  write_line_chart_svg((fs::path(out_dir) / "nim_sweep.svg").string(),
                       "Few-shot learning vs match size", "match size (games per seat order)",
                       "win rate vs random", {s});
}

void render_chess_eval(const nlohmann::json& data, const std::string& out_dir) {
  std::vector<std::vector<std::string>> validity_rows;
  Series validity_series{"valid move rate", {}};
  int ply = 0;
  for (const auto& v : data.at("validity")) {
    ++ply;
    const int64_t valid = v[0].get<int64_t>();
    const int64_t total = v[1].get<int64_t>();
    if (total == 0) continue;
    validity_rows.push_back(
        {std::to_string(ply), std::to_string(valid), std::to_string(total)});
    validity_series.points.emplace_back(ply, static_cast<double>(valid) /
                                                 static_cast<double>(total));
  }
  write_csv((fs::path(out_dir) / "chess_validity.csv").string(), {"ply", "valid", "total"},
            validity_rows);
  write_line_chart_svg((fs::path(out_dir) / "chess_validity.svg").string(),
                       "Valid-move rate by ply", "ply", "valid fraction", {validity_series});

  std::vector<std::vector<std::string>> length_rows;
  std::map<int, int64_t> histogram;
  int game = 0;
  for (const auto& g : data.at("games")) {
    length_rows.push_back({std::to_string(game++), std::to_string(g.at("plies").get<int>()),
                           g.at("status").get<std::string>()});
    ++histogram[g.at("plies").get<int>()];
  }
  write_csv((fs::path(out_dir) / "chess_lengths.csv").string(), {"game", "plies", "status"},
            length_rows);

  std::vector<std::vector<std::string>> hist_rows;
  std::vector<std::pair<std::string, double>> bars;
  for (const auto& [plies, count] : histogram) {
    hist_rows.push_back({std::to_string(plies), std::to_string(count)});
    bars.emplace_back(std::to_string(plies), static_cast<double>(count));
  }
  write_csv((fs::path(out_dir) / "chess_lengths_hist.csv").string(), {"plies", "count"},
            hist_rows);
  write_bar_chart_svg((fs::path(out_dir) / "chess_lengths.svg").string(),
                      "Game length distribution vs engine", "game length (plies)", "games",
                      bars);
}

const char* status_name(chess::GameStatus s) {
  switch (s) {
    case chess::GameStatus::ongoing: return "ongoing";
    case chess::GameStatus::checkmate: return "checkmate";
    case chess::GameStatus::stalemate: return "stalemate";
    case chess::GameStatus::draw_fifty_move: return "draw_fifty_move";
    case chess::GameStatus::draw_insufficient_material: return "draw_insufficient_material";
    case chess::GameStatus::aborted_ply_limit: return "aborted_ply_limit";
  }
  return "unknown";
}

}  // namespace

void write_roster_outputs(const arena::RosterResult& result, const std::string& out_dir) {
  fs::create_directories(out_dir);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : result.rows)
    rows.push_back({{"noise", r.noise},
                    {"agent_a", r.agent_a},
                    {"agent_b", r.agent_b},
                    {"games", r.games},
                    {"wins_a", r.wins_a},
                    {"wins_b", r.wins_b},
                    {"invalid_a", r.invalid_a},
                    {"invalid_b", r.invalid_b}});
  nlohmann::json j = {{"kind", "nim-roster"}, {"data", {{"rows", rows}}}};
  save_report_json((fs::path(out_dir) / "nim_roster.report.json").string(), j);
  render_roster(j.at("data"), out_dir);
}

void write_sweep_outputs(const std::vector<arena::SweepPoint>& points,
                         const std::string& out_dir) {
  fs::create_directories(out_dir);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : points)
    arr.push_back({{"match_size", p.match_size},
                   {"games", p.games},
                   {"win_rate", p.win_rate},
                   {"invalid", p.invalid},
                   {"seed", p.seed}});
  nlohmann::json j = {{"kind", "nim-sweep"}, {"data", {{"points", arr}}}};
  save_report_json((fs::path(out_dir) / "nim_sweep.report.json").string(), j);
  render_sweep(j.at("data"), out_dir);
}

void write_chess_eval_outputs(const arena::ChessEvalResult& result, const std::string& out_dir) {
  fs::create_directories(out_dir);
  nlohmann::json validity = nlohmann::json::array();
  for (const auto& v : result.validity) validity.push_back({v[0], v[1]});
  nlohmann::json games = nlohmann::json::array();
  for (std::size_t i = 0; i < result.game_plies.size(); ++i)
    games.push_back({{"plies", result.game_plies[i]}, {"status", status_name(result.statuses[i])}});
  nlohmann::json j = {{"kind", "chess-eval"},
                      {"data", {{"validity", validity}, {"games", games},
                                {"model_moves", result.model_moves},
                                {"valid_moves", result.valid_moves}}}};
  save_report_json((fs::path(out_dir) / "chess_eval.report.json").string(), j);
  render_chess_eval(j.at("data"), out_dir);
}

void regenerate(const std::string& report_json_path, const std::string& out_dir) {
  std::ifstream in(report_json_path, std::ios::binary);
  if (!in) throw IoError("cannot open report JSON: " + report_json_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("report JSON is invalid: " + std::string(e.what()));
  }
  fs::create_directories(out_dir);
  const std::string kind = j.value("kind", "");
  if (kind == "nim-roster") render_roster(j.at("data"), out_dir);
  else if (kind == "nim-sweep") render_sweep(j.at("data"), out_dir);
  else if (kind == "chess-eval") render_chess_eval(j.at("data"), out_dir);
  else throw ParseError("unknown report kind: '" + kind + "'");
}

}  // namespace gamelab::report
