#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "proxy_market/experiment.hpp"

namespace proxy_market {

struct PlotSeries {
  std::string name;
  std::vector<MetricsRow> rows;
};

/// Reads a metrics CSV. A merged file (leading `replicate` column) yields one
/// series per replicate. Throws IoError when unreadable, ConfigError when the
/// file has no data rows or an unexpected header.
[[nodiscard]] std::vector<PlotSeries> read_metrics_csv(const std::filesystem::path& path);

/// Two stacked panels: Er against step with a min-max band across series, and
/// the decision and Bayes success moving averages against step.
[[nodiscard]] std::string render_svg(const std::vector<PlotSeries>& series);

void emit_plot(const std::vector<std::filesystem::path>& csvs, const std::filesystem::path& out);

}  // namespace proxy_market
