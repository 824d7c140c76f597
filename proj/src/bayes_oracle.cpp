#include "proxy_market/bayes_oracle.hpp"

#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "proxy_market/errors.hpp"
#include "proxy_market/logit.hpp"

namespace proxy_market {

namespace {

double log_ratio(double num, double den) {
  if (num == den) return 0.0;
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  if (num == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(num) - std::log(den);
}

}  // namespace

Probability posterior_outcome(std::span<const int> signals, Probability prior,
                              const WorldConfig& cfg) {
  if (prior.value() == 0.0 || prior.value() == 1.0) return prior;

  long ones = 0;
  long zeros = 0;
  for (int s : signals) (s == 1 ? ones : zeros) += 1;

  const double lr_one = log_ratio(cfg.likelihood_true, cfg.likelihood_false);
  const double lr_zero = log_ratio(1.0 - cfg.likelihood_true, 1.0 - cfg.likelihood_false);
  // A certain signal (likelihood 0 or 1) settles the outcome; both kinds together
  // cannot happen under the model.
  const double from_ones = ones > 0 ? static_cast<double>(ones) * lr_one : 0.0;
  const double from_zeros = zeros > 0 ? static_cast<double>(zeros) * lr_zero : 0.0;
  if (std::isinf(from_ones) && std::isinf(from_zeros)) {
    throw ConfigError("posterior_outcome: evidence has zero probability under the world model");
  }
  const double log_odds = logit(prior.value()) + from_ones + from_zeros;
  return Probability(logistic(log_odds));
}

Probability ideal_proxy_forecast(Probability q, const WorldConfig& cfg) {
  return Probability(cfg.likelihood_true * q.value() + cfg.likelihood_false * (1.0 - q.value()));
}

double aggregation_error(const Eigen::VectorXd& final_report, const Eigen::VectorXd& ideal) {
  if (final_report.size() != ideal.size()) {
    throw ConfigError(fmt::format("aggregation_error: length mismatch ({} vs {})",
                                  final_report.size(), ideal.size()));
  }
  return (final_report - ideal).squaredNorm();
}

std::vector<std::vector<int>> signals_by_action(const WorldState& world, std::size_t actions,
                                                const std::function<bool(std::size_t)>& include) {
  std::vector<std::vector<int>> grouped(actions);
  for (const auto& s : world.agent_signals) {
    if (include(s.agent)) grouped.at(s.action).push_back(s.value);
  }
  return grouped;
}

PosteriorReport ideal_report(const WorldState& world, const WorldConfig& cfg,
                             const std::function<bool(std::size_t)>& include) {
  const auto grouped = signals_by_action(world, cfg.actions, include);
  const auto k = static_cast<Eigen::Index>(cfg.actions);
  PosteriorReport report{Eigen::VectorXd(k), Eigen::VectorXd(k)};
  for (Eigen::Index a = 0; a < k; ++a) {
    const auto q = posterior_outcome(grouped[a], Probability(cfg.p_outcome), cfg);
    report.posterior[a] = q;
    report.forecast[a] = ideal_proxy_forecast(q, cfg);
  }
  return report;
}

PosteriorReport ideal_report(const WorldState& world, const WorldConfig& cfg) {
  return ideal_report(world, cfg, [](std::size_t) { return true; });
}

Eigen::MatrixXd posterior_policy(const WorldConfig& cfg) {
  const auto k = static_cast<Eigen::Index>(cfg.actions);
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(3 * k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    theta(3 * a, a) = log_ratio(cfg.likelihood_true, cfg.likelihood_false);
    theta(3 * a + 1, a) = log_ratio(1.0 - cfg.likelihood_true, 1.0 - cfg.likelihood_false);
    theta(3 * a + 2, a) = 1.0;
  }
  return theta;
}

std::size_t argmax_lowest(const Eigen::VectorXd& values, double tol) {
  const double top = values.maxCoeff();
  for (Eigen::Index a = 0; a < values.size(); ++a) {
    if (values[a] >= top - tol) return static_cast<std::size_t>(a);
  }
  return 0;
}

BayesDecision bayes_decision(const std::vector<std::vector<int>>& signals, const WorldConfig& cfg) {
  const auto k = static_cast<Eigen::Index>(signals.size());
  BayesDecision decision{0, Eigen::VectorXd(k)};
  for (Eigen::Index a = 0; a < k; ++a) {
    decision.posterior[a] = posterior_outcome(signals[a], Probability(cfg.p_outcome), cfg);
  }
  decision.action = argmax_lowest(decision.posterior, kTieTolerance);
  return decision;
}

BayesDecision bayes_decision(const WorldState& world, const WorldConfig& cfg) {
  auto grouped = signals_by_action(world, cfg.actions, [](std::size_t) { return true; });
  if (world.principal_signal) {
    grouped.at(world.principal_signal->action).push_back(world.principal_signal->value);
  }
  return bayes_decision(grouped, cfg);
}

}  // namespace proxy_market
