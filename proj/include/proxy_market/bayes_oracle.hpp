#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "proxy_market/scoring.hpp"
#include "proxy_market/world.hpp"

namespace proxy_market {

/// Exact references for one round: the ideal forecast of the proxy signal for
/// every action and the outcome posterior it derives from.
struct PosteriorReport {
  Eigen::VectorXd forecast;   // P(proxy signal = 1 | forecasters' signals), per action
  Eigen::VectorXd posterior;  // P(outcome = 1 | forecasters' signals), per action
};

struct BayesDecision {
  std::size_t action = 0;
  Eigen::VectorXd posterior;  // P(outcome = 1 | all signals), per action
};

/// Posterior P(outcome = 1 | signals) for one action, computed in log-odds.
/// A prior of exactly 0 or 1 is absorbing and returned unchanged.
[[nodiscard]] Probability posterior_outcome(std::span<const int> signals, Probability prior,
                                            const WorldConfig& cfg);

/// Forecast of a fresh signal about an action whose outcome posterior is q.
[[nodiscard]] Probability ideal_proxy_forecast(Probability q, const WorldConfig& cfg);

/// Sum of squared differences. Throws ConfigError on a length mismatch.
[[nodiscard]] double aggregation_error(const Eigen::VectorXd& final_report,
                                       const Eigen::VectorXd& ideal);

/// Signals grouped by action, drawn from agents accepted by `include`.
[[nodiscard]] std::vector<std::vector<int>> signals_by_action(
    const WorldState& world, std::size_t actions,
    const std::function<bool(std::size_t agent)>& include);

/// Ideal proxy forecasts using only the signals of agents accepted by `include`.
[[nodiscard]] PosteriorReport ideal_report(const WorldState& world, const WorldConfig& cfg,
                                           const std::function<bool(std::size_t)>& include);

/// Ideal proxy forecasts from every agent signal in the world.
[[nodiscard]] PosteriorReport ideal_report(const WorldState& world, const WorldConfig& cfg);

/// Outcome posteriors per action from per-action signal lists, then the argmax
/// (ties, up to kTieTolerance, go to the lowest index).
[[nodiscard]] BayesDecision bayes_decision(const std::vector<std::vector<int>>& signals,
                                           const WorldConfig& cfg);

/// Bayes-optimal decision given every agent signal and the principal's.
[[nodiscard]] BayesDecision bayes_decision(const WorldState& world, const WorldConfig& cfg);

/// (3k x k) linear policy whose output is the outcome-posterior log-odds of
/// the incoming report updated by the participant's own signal. Used as the
/// converged policy for agents and principal: exact when the incoming report
/// is itself an outcome posterior and p_outcome = 0.5.
[[nodiscard]] Eigen::MatrixXd posterior_policy(const WorldConfig& cfg);

/// Lowest index whose entry is within `tol` of the maximum.
[[nodiscard]] std::size_t argmax_lowest(const Eigen::VectorXd& values, double tol = 0.0);

/// Posteriors closer than this count as tied in bayes_decision; evidence that
/// cancels exactly (one 1-signal and one 0-signal) leaves ~1e-16 residue in
/// log-odds arithmetic.
inline constexpr double kTieTolerance = 1e-12;

}  // namespace proxy_market
