#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "proxy_market/agents.hpp"
#include "proxy_market/mechanisms.hpp"
#include "proxy_market/scoring.hpp"
#include "proxy_market/world.hpp"

namespace proxy_market {

/// Principal step size when principal_alpha is unset. Its reward is a 0/1
/// outcome rather than a small score delta, so it gets a larger step than the
/// agents.
inline constexpr double kPrincipalAlpha = 0.01;

/// Principal hyperparameters. Unset fields other than alpha fall back to the
/// agents' values.
struct PrincipalOverrides {
  std::optional<double> alpha;
  std::optional<std::size_t> buffer_capacity;
  std::optional<std::size_t> batch_size;
  std::optional<double> baseline_rho;
  std::optional<double> init_range;

  friend bool operator==(const PrincipalOverrides&, const PrincipalOverrides&) = default;
};

struct RunConfig {
  Mechanism mechanism = Mechanism::m1;
  std::size_t steps = 2'000'000;
  std::size_t replicates = 1;
  std::uint64_t seed = 1;
  WorldConfig world;

  LearnerParams agent;
  double sigma = 0.1;
  PrincipalOverrides principal_overrides;

  double advisor_share = 0.1;
  std::optional<std::size_t> advisor_index;  // defaults to the last agent
  std::size_t peer_window = 50;
  AnnouncementStrategy peer_strategy = AnnouncementStrategy::truthful;
  PeerPair peers{0, 1};

  ScoringRule scoring_rule = ScoringRule::brier;
  std::optional<std::vector<double>> prior;  // defaults to even odds

  std::size_t eval_interval = 1000;
  std::optional<std::size_t> eval_window;  // defaults to min(10000, steps)
  std::size_t eval_rounds = 50;            // eval rounds per probe
  std::string output_dir = "out";

  [[nodiscard]] LearnerParams principal() const;
  [[nodiscard]] std::size_t resolved_eval_window() const;
  [[nodiscard]] std::size_t resolved_advisor() const;
  [[nodiscard]] Eigen::VectorXd resolved_prior() const;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Builds a config from a JSON object; absent keys keep their defaults,
/// unknown keys are rejected. Validates the result.
[[nodiscard]] RunConfig config_from_json(const nlohmann::json& j);

/// Explicitly stored fields only; optional fallbacks that are unset stay absent.
[[nodiscard]] nlohmann::json to_json(const RunConfig& cfg);

/// Parses JSON text. Syntax errors raise ParseError with line and column of
/// `source`.
[[nodiscard]] RunConfig parse_config(std::string_view text, std::string_view source = "<config>");

/// Throws IoError when the file cannot be read.
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

}  // namespace proxy_market
