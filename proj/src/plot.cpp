#include "proxy_market/plot.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/core.h>

#include "proxy_market/errors.hpp"

namespace proxy_market {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

MetricsRow parse_row(const std::vector<std::string>& c, std::size_t offset) {
  MetricsRow row;
  row.step = std::stoull(c.at(offset + 0));
  row.er = std::stod(c.at(offset + 1));
  row.decision_success = std::stoi(c.at(offset + 2));
  row.bayes_success = std::stoi(c.at(offset + 3));
  row.decision_success_ma = std::stod(c.at(offset + 4));
  row.bayes_success_ma = std::stod(c.at(offset + 5));
  row.mean_agent_score = std::stod(c.at(offset + 6));
  return row;
}

// Per-step aggregate of one series: mean Er, last moving averages.
struct StepPoint {
  double er = 0.0;
  double decision_ma = 0.0;
  double bayes_ma = 0.0;
};

std::map<std::size_t, StepPoint> by_step(const PlotSeries& s) {
  std::map<std::size_t, StepPoint> points;
  std::map<std::size_t, std::size_t> counts;
  for (const auto& row : s.rows) {
    auto& p = points[row.step];
    p.er += row.er;
    p.decision_ma = row.decision_success_ma;
    p.bayes_ma = row.bayes_success_ma;
    ++counts[row.step];
  }
  for (auto& [step, p] : points) p.er /= static_cast<double>(counts[step]);
  return points;
}

struct Envelope {
  std::vector<double> steps;
  std::vector<double> er_mean, er_min, er_max, decision, bayes;
};

Envelope envelope(const std::vector<PlotSeries>& series) {
  std::map<std::size_t, std::vector<StepPoint>> merged;
  for (const auto& s : series) {
    for (const auto& [step, p] : by_step(s)) merged[step].push_back(p);
  }
  Envelope env;
  for (const auto& [step, pts] : merged) {
    double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo, dec = 0.0, bay = 0.0;
    for (const auto& p : pts) {
      sum += p.er;
      lo = std::min(lo, p.er);
      hi = std::max(hi, p.er);
      dec += p.decision_ma;
      bay += p.bayes_ma;
    }
    const double n = static_cast<double>(pts.size());
    env.steps.push_back(static_cast<double>(step));
    env.er_mean.push_back(sum / n);
    env.er_min.push_back(lo);
    env.er_max.push_back(hi);
    env.decision.push_back(dec / n);
    env.bayes.push_back(bay / n);
  }
  return env;
}

struct Panel {
  double left, top, width, height;
  double x0, x1, y0, y1;

  [[nodiscard]] double x(double v) const {
    return x1 == x0 ? left + width / 2 : left + (v - x0) / (x1 - x0) * width;
  }
  [[nodiscard]] double y(double v) const {
    return y1 == y0 ? top + height / 2 : top + height - (v - y0) / (y1 - y0) * height;
  }
};

std::string points_attr(const Panel& p, const std::vector<double>& xs, const std::vector<double>& ys) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out += fmt::format("{}{:.2f},{:.2f}", i == 0 ? "" : " ", p.x(xs[i]), p.y(ys[i]));
  }
  return out;
}

void axes(std::string& svg, const Panel& p, const std::string& ylabel) {
  svg += fmt::format(
      R"(<rect x="{:.2f}" y="{:.2f}" width="{:.2f}" height="{:.2f}" fill="none" stroke="#444"/>)"
      "\n",
      p.left, p.top, p.width, p.height);
  for (int i = 0; i <= 4; ++i) {
    const double fx = p.x0 + (p.x1 - p.x0) * i / 4.0;
    const double fy = p.y0 + (p.y1 - p.y0) * i / 4.0;
    svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="11" text-anchor="middle">{:.0f}</text>)"
                       "\n",
                       p.x(fx), p.top + p.height + 16, fx);
    svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="11" text-anchor="end">{:.3g}</text>)"
                       "\n",
                       p.left - 6, p.y(fy) + 4, fy);
  }
  svg += fmt::format(
      R"svg(<text x="{:.2f}" y="{:.2f}" font-size="12" text-anchor="middle" transform="rotate(-90 {:.2f} {:.2f})">{}</text>)svg"
      "\n",
      p.left - 48, p.top + p.height / 2, p.left - 48, p.top + p.height / 2, ylabel);
}

void line(std::string& svg, const Panel& p, const std::vector<double>& xs, const std::vector<double>& ys,
          const char* id, const char* colour) {
  if (xs.size() == 1) {
    svg += fmt::format(R"(<circle id="{}" class="point" cx="{:.2f}" cy="{:.2f}" r="3" fill="{}"/>)"
                       "\n",
                       id, p.x(xs[0]), p.y(ys[0]), colour);
    return;
  }
  svg += fmt::format(R"(<polyline id="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>)"
                     "\n",
                     id, colour, points_attr(p, xs, ys));
}

}  // namespace

std::vector<PlotSeries> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read metrics CSV {}", path.string()));
  std::string header;
  if (!std::getline(in, header)) throw ConfigError(fmt::format("{}: empty CSV", path.string()));

  const std::string merged_header = std::string("replicate,") + kMetricsHeader;
  bool merged = false;
  if (header == merged_header) {
    merged = true;
  } else if (header != kMetricsHeader) {
    throw ConfigError(fmt::format("{}: unexpected CSV header", path.string()));
  }

  std::map<std::string, PlotSeries> series;
  std::vector<std::string> order;
  std::string line_text;
  std::size_t line_no = 1;
  while (std::getline(in, line_text)) {
    ++line_no;
    if (line_text.empty()) continue;
    const auto cells = split(line_text);
    const std::string name = merged ? fmt::format("{}#rep{}", path.filename().string(), cells.at(0))
                                    : path.filename().string();
    try {
      auto row = parse_row(cells, merged ? 1 : 0);
      if (!series.contains(name)) {
        order.push_back(name);
        series[name].name = name;
      }
      series[name].rows.push_back(row);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("{}:{}: malformed metrics row", path.string(), line_no));
    }
  }
  if (order.empty()) throw ConfigError(fmt::format("{}: empty CSV (no data rows)", path.string()));

  std::vector<PlotSeries> out;
  for (const auto& name : order) out.push_back(std::move(series[name]));
  return out;
}

std::string render_svg(const std::vector<PlotSeries>& series) {
  if (series.empty()) throw ConfigError("render_svg: no series");
  const Envelope env = envelope(series);

  const double width = 800, height = 620;
  const double x0 = env.steps.front(), x1 = env.steps.back();
  const double er_top = std::max(1e-6, *std::max_element(env.er_max.begin(), env.er_max.end()) * 1.05);
  const Panel er_panel{80, 40, 680, 230, x0, x1, 0.0, er_top};
  const Panel success_panel{80, 340, 680, 230, x0, x1, 0.0, 1.0};

  std::string svg;
  svg += fmt::format(
      R"(<svg xmlns="http://www.w3.org/2000/svg" width="{:.0f}" height="{:.0f}" viewBox="0 0 {:.0f} {:.0f}">)"
      "\n",
      width, height, width, height);
  svg += R"(<rect width="100%" height="100%" fill="white"/>)" "\n";
  svg += R"(<text x="400" y="24" font-size="15" text-anchor="middle">Aggregation error and decision success</text>)" "\n";

  axes(svg, er_panel, "Er");
  if (env.steps.size() > 1 && series.size() > 1) {
    std::vector<double> xs = env.steps;
    std::vector<double> ys = env.er_max;
    xs.insert(xs.end(), env.steps.rbegin(), env.steps.rend());
    ys.insert(ys.end(), env.er_min.rbegin(), env.er_min.rend());
    svg += fmt::format(R"(<polygon id="er-band" fill="#b2f0f0" stroke="none" points="{}"/>)" "\n",
                       points_attr(er_panel, xs, ys));
  }
  line(svg, er_panel, env.steps, env.er_mean, "er-line", "#1f4fd1");

  axes(svg, success_panel, "success rate (moving average)");
  line(svg, success_panel, env.steps, env.decision, "decision-line", "#d62728");
  line(svg, success_panel, env.steps, env.bayes, "bayes-line", "#2ca02c");
  svg += R"(<text x="420" y="612" font-size="12" text-anchor="middle">training step</text>)" "\n";
  svg += R"(<text x="600" y="360" font-size="11" fill="#d62728">principal</text>)" "\n";
  svg += R"(<text x="600" y="376" font-size="11" fill="#2ca02c">Bayes benchmark</text>)" "\n";
  svg += "</svg>\n";
  return svg;
}

void emit_plot(const std::vector<std::filesystem::path>& csvs, const std::filesystem::path& out) {
  if (csvs.empty()) throw ConfigError("plot: no input CSV files");
  std::vector<PlotSeries> all;
  for (const auto& path : csvs) {
    auto s = read_metrics_csv(path);
    all.insert(all.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  const std::string svg = render_svg(all);
  std::ofstream file(out, std::ios::binary);
  if (!file) throw IoError(fmt::format("cannot write {}", out.string()));
  file << svg;
  if (!file) throw IoError(fmt::format("failed writing {}", out.string()));
}

}  // namespace proxy_market
