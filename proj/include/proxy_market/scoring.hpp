#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace proxy_market {

/// A probability in [0, 1]. Construction rejects anything else, NaN included.
class Probability {
 public:
  constexpr Probability() = default;
  explicit Probability(double value);

  [[nodiscard]] constexpr double value() const { return value_; }
  constexpr operator double() const { return value_; }  // NOLINT(google-explicit-constructor)

 private:
  double value_ = 0.5;
};

using Score = double;

/// A verifiable binary signal about one action, used to settle forecasts.
struct ProxyObservation {
  std::size_t action = 0;  // zero-based
  int value = 0;           // 0 or 1

  friend bool operator==(const ProxyObservation&, const ProxyObservation&) = default;
};

enum class ScoringRule { brier, log };

[[nodiscard]] std::string_view to_string(ScoringRule rule);
[[nodiscard]] ScoringRule parse_scoring_rule(std::string_view name);

inline constexpr double kLogScoreEpsilon = 1e-9;

/// Negative quadratic loss -(r - d)^2. Perfect forecasts score 0.
[[nodiscard]] Score brier_score(Probability report, int obs);

/// ln(r) for obs = 1, ln(1 - r) for obs = 0, with r clamped to [eps, 1 - eps].
[[nodiscard]] Score log_score(Probability report, int obs);

[[nodiscard]] Score score(ScoringRule rule, Probability report, int obs);

/// Market-scoring payment: s(curr, obs) - s(prev, obs).
[[nodiscard]] Score market_reward(Probability curr, Probability prev, int obs, ScoringRule rule);

/// Scores a sequence of reports against the proxy. Entry E is
/// s(report_E[a], d) - s(report_{E-1}[a], d) with a = proxy.action and
/// report_{-1} = prior. Only the proxy-action component is read, so the
/// principal's eventual decision cannot influence any score.
///
/// Throws ConfigError on an empty sequence, a vector whose length differs from
/// the prior's, an entry outside [0, 1], or a proxy action out of range.
[[nodiscard]] std::vector<Score> score_round(std::span<const Eigen::VectorXd> reports,
                                             const Eigen::VectorXd& prior,
                                             const ProxyObservation& proxy, ScoringRule rule);

}  // namespace proxy_market
