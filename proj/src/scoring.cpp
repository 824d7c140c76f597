#include "proxy_market/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/core.h>

#include "proxy_market/errors.hpp"

namespace proxy_market {

Probability::Probability(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ConfigError(fmt::format("probability out of range: {}", value));
  }
}

std::string_view to_string(ScoringRule rule) {
  switch (rule) {
    case ScoringRule::brier:
      return "brier";
    case ScoringRule::log:
      return "log";
  }
  return "brier";
}

ScoringRule parse_scoring_rule(std::string_view name) {
  if (name == "brier") return ScoringRule::brier;
  if (name == "log") return ScoringRule::log;
  throw ConfigError(fmt::format("scoring_rule: unknown rule '{}' (expected brier|log)", name));
}

Score brier_score(Probability report, int obs) {
  const double diff = report.value() - static_cast<double>(obs);
  return -diff * diff;
}

Score log_score(Probability report, int obs) {
  const double r = std::clamp(report.value(), kLogScoreEpsilon, 1.0 - kLogScoreEpsilon);
  return obs == 1 ? std::log(r) : std::log1p(-r);
}

Score score(ScoringRule rule, Probability report, int obs) {
  return rule == ScoringRule::log ? log_score(report, obs) : brier_score(report, obs);
}

Score market_reward(Probability curr, Probability prev, int obs, ScoringRule rule) {
  return score(rule, curr, obs) - score(rule, prev, obs);
}

std::vector<Score> score_round(std::span<const Eigen::VectorXd> reports,
                               const Eigen::VectorXd& prior, const ProxyObservation& proxy,
                               ScoringRule rule) {
  if (reports.empty()) throw ConfigError("score_round: empty report sequence");
  const auto k = prior.size();
  if (proxy.action >= static_cast<std::size_t>(k)) {
    throw ConfigError(fmt::format("score_round: proxy action {} out of range for k={}",
                                  proxy.action, k));
  }
  if (proxy.value != 0 && proxy.value != 1) {
    throw ConfigError(fmt::format("score_round: proxy value {} is not binary", proxy.value));
  }
  for (std::size_t e = 0; e < reports.size(); ++e) {
    if (reports[e].size() != k) {
      throw ConfigError(fmt::format("score_round: report {} has {} entries, expected {}", e,
                                    reports[e].size(), k));
    }
  }

  const auto a = static_cast<Eigen::Index>(proxy.action);
  std::vector<Score> scores;
  scores.reserve(reports.size());
  Score prev = score(rule, Probability(prior[a]), proxy.value);
  for (const auto& report : reports) {
    const Score curr = score(rule, Probability(report[a]), proxy.value);
    scores.push_back(curr - prev);
    prev = curr;
  }
  return scores;
}

}  // namespace proxy_market
