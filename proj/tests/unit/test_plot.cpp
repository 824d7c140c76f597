#include <doctest.h>

#include <sstream>
#include <string>

#include "proxy_market/errors.hpp"
#include "proxy_market/plot.hpp"
#include "test_support.hpp"

using namespace proxy_market;
using test_support::slurp;
using test_support::TempDir;
using test_support::write_file;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

const std::string kRows =
    "1000,0.01,1,1,1,1,0.001\n"
    "2000,0.005,0,1,0.5,1,0.002\n"
    "3000,0.002,1,0,0.666666666667,0.666666666667,-0.001\n";

}  // namespace

TEST_SUITE("plot") {
  TEST_CASE("single row renders points without a band") {
    TempDir dir;
    write_file(dir.path() / "one.csv", std::string(kMetricsHeader) + "\n1,0.004,1,1,1,1,0\n");
    emit_plot({dir.path() / "one.csv"}, dir.path() / "one.svg");
    const auto svg = slurp(dir.path() / "one.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("er-band") == std::string::npos);
    CHECK(count(svg, "class=\"point\"") >= 1);
  }

  TEST_CASE("identical replicates collapse the band onto the line") {
    TempDir dir;
    std::string merged = std::string("replicate,") + kMetricsHeader + "\n";
    for (int r = 0; r < 2; ++r) {
      std::istringstream lines(kRows);
      for (std::string line; std::getline(lines, line);) merged += std::to_string(r) + "," + line + "\n";
    }
    write_file(dir.path() / "merged.csv", merged);
    auto series = read_metrics_csv(dir.path() / "merged.csv");
    REQUIRE(series.size() == 2);
    CHECK(series[0].rows.size() == 3);

    const auto svg = render_svg(series);
    const auto band = svg.find("id=\"er-band\"");
    REQUIRE(band != std::string::npos);
    // Upper and lower envelopes coincide: the polygon retraces the line.
    const auto points_at = svg.find("points=\"", band) + 8;
    const auto band_points = svg.substr(points_at, svg.find('"', points_at) - points_at);
    const auto line = svg.find("id=\"er-line\"");
    REQUIRE(line != std::string::npos);
    const auto line_at = svg.find("points=\"", line) + 8;
    const auto line_points = svg.substr(line_at, svg.find('"', line_at) - line_at);
    CHECK(band_points.find(line_points) == 0);
  }

  TEST_CASE("multiple files and both success lines") {
    TempDir dir;
    write_file(dir.path() / "a.csv", std::string(kMetricsHeader) + "\n" + kRows);
    write_file(dir.path() / "b.csv", std::string(kMetricsHeader) + "\n" + kRows);
    emit_plot({dir.path() / "a.csv", dir.path() / "b.csv"}, dir.path() / "out.svg");
    const auto svg = slurp(dir.path() / "out.svg");
    CHECK(svg.find("decision-line") != std::string::npos);
    CHECK(svg.find("bayes-line") != std::string::npos);
    CHECK(svg.find("er-band") != std::string::npos);
  }

  TEST_CASE("errors") {
    TempDir dir;
    write_file(dir.path() / "empty.csv", std::string(kMetricsHeader) + "\n");
    try {
      (void)read_metrics_csv(dir.path() / "empty.csv");
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("empty.csv") != std::string::npos);
    }
    write_file(dir.path() / "blank.csv", "");
    CHECK_THROWS_AS((void)read_metrics_csv(dir.path() / "blank.csv"), ConfigError);
    write_file(dir.path() / "header.csv", "a,b,c\n1,2,3\n");
    CHECK_THROWS_AS((void)read_metrics_csv(dir.path() / "header.csv"), ConfigError);
    CHECK_THROWS_AS((void)read_metrics_csv(dir.path() / "missing.csv"), IoError);
  }
}
