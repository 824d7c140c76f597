#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "proxy_market/config.hpp"
#include "proxy_market/scoring.hpp"
#include "proxy_market/world.hpp"

namespace proxy_market {

struct CheckResult {
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
};

/// Expected score on a 0.01 grid is uniquely maximized by the truthful report.
[[nodiscard]] CheckResult check_scoring_propriety(ScoringRule rule);

/// posterior_outcome, ideal_proxy_forecast and bayes_decision against joint
/// enumeration for every configuration with 1-3 agents plus the principal,
/// under both assignment policies. Requires k = 2.
[[nodiscard]] CheckResult check_oracle_enumeration(const WorldConfig& cfg);

/// Truthful advisor success >= flipped in every configuration, > in some.
[[nodiscard]] CheckResult check_advisor_deviation(const WorldConfig& cfg, std::size_t agents = 3);

/// Exact expected peer score of truthful peers is positive and beats
/// always_one, always_zero, random and flip.
[[nodiscard]] CheckResult check_peer_strategies(const WorldConfig& cfg, std::size_t window);

/// Mechanism-3 rounds with truthful peers: mean first-peer score against the
/// exact expectation for the same history fill schedule, within 3 batch-means
/// standard errors.
[[nodiscard]] CheckResult check_peer_monte_carlo(const WorldConfig& cfg, std::size_t window,
                                                 std::size_t rounds, std::uint64_t seed);

/// Sampled worlds: frequency of a 1 proxy signal, bucketed by the agents'
/// evidence on the proxy action, against the ideal forecast (4 standard errors).
[[nodiscard]] CheckResult check_forecast_monte_carlo(const WorldConfig& cfg, std::size_t rounds,
                                                     std::uint64_t seed);

/// Runs every check that applies to `cfg`, printing one line per check.
/// Exhaustive checks are skipped with a notice unless k = 2.
std::vector<CheckResult> eval_oracle(const RunConfig& cfg, std::ostream& out);

}  // namespace proxy_market
