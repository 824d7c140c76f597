#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "proxy_market/config.hpp"
#include "proxy_market/errors.hpp"
#include "proxy_market/experiment.hpp"
#include "proxy_market/oracle_suite.hpp"
#include "proxy_market/plot.hpp"
#include "proxy_market/version.hpp"

namespace pm = proxy_market;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct RunFlags {
  std::string config;
  std::optional<std::string> mechanism;
  std::optional<std::size_t> steps;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> agents;
  std::optional<std::size_t> replicates;
  std::optional<std::string> out;
};

pm::RunConfig resolve(const RunFlags& flags) {
  pm::RunConfig cfg = flags.config.empty() ? pm::parse_config("{}") : pm::load_config(flags.config);
  if (flags.mechanism) cfg.mechanism = pm::parse_mechanism(*flags.mechanism);
  if (flags.steps) cfg.steps = *flags.steps;
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.agents) cfg.world.agents = *flags.agents;
  if (flags.replicates) cfg.replicates = *flags.replicates;
  if (flags.out) cfg.output_dir = *flags.out;
  cfg.validate();
  return cfg;
}

int run(const RunFlags& flags) {
  const auto cfg = resolve(flags);
  const auto summary = pm::run_experiment(cfg);
  for (const auto& r : summary.replicates) {
    std::cout << fmt::format(
        "replicate {}: seed {} | trailing Er {:.6f} | decision MA {:.4f} | bayes MA {:.4f} | {:.1f}s\n",
        r.replicate, r.seed, r.trailing_er, r.final_decision_success_ma, r.final_bayes_success_ma,
        r.wall_seconds);
  }
  std::cout << fmt::format("wrote {} and {}\n", summary.merged_csv.string(), summary.summary_json.string());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proxy-scored decision mechanisms: simulation and experiment harness"};
  app.set_version_flag("--version", std::string(pm::kVersion));
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "train a mechanism and write metrics");
  run_cmd->add_option("--config", run_flags.config, "JSON run config (defaults when omitted)");
  run_cmd->add_option("--mechanism", run_flags.mechanism, "m1|m2|m3");
  run_cmd->add_option("--steps", run_flags.steps, "training rounds per replicate");
  run_cmd->add_option("--seed", run_flags.seed, "master seed");
  run_cmd->add_option("--agents", run_flags.agents, "agent count");
  run_cmd->add_option("--replicates", run_flags.replicates, "independent replicates");
  run_cmd->add_option("--out", run_flags.out, "output directory");

  std::vector<std::string> plot_inputs;
  std::string plot_output;
  auto* plot_cmd = app.add_subcommand("plot", "render metrics CSVs to an SVG");
  plot_cmd->add_option("--in", plot_inputs, "metrics CSV files")->required()->expected(1, -1);
  plot_cmd->add_option("--out", plot_output, "SVG output path")->required();

  std::string oracle_config;
  auto* oracle_cmd = app.add_subcommand("eval-oracle", "run the exact-oracle property checks");
  oracle_cmd->add_option("--config", oracle_config, "JSON run config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run_cmd) return run(run_flags);
    if (*plot_cmd) {
      std::vector<std::filesystem::path> paths(plot_inputs.begin(), plot_inputs.end());
      pm::emit_plot(paths, plot_output);
      std::cout << "wrote " << plot_output << '\n';
      return kExitOk;
    }
    if (*oracle_cmd) {
      const auto cfg = oracle_config.empty() ? pm::parse_config("{}") : pm::load_config(oracle_config);
      const auto results = pm::eval_oracle(cfg, std::cout);
      for (const auto& r : results) {
        if (!r.skipped && !r.passed) return kExitValidation;
      }
      return kExitOk;
    }
  } catch (const pm::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const pm::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}
