#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Core>

#include "proxy_market/agents.hpp"

namespace proxy_market {

struct ActionDistribution {
  Eigen::VectorXd probs;  // softmax of the principal's preferences
  std::size_t chosen = 0;
};

/// Softmax of ctx^T * theta with max-subtraction.
[[nodiscard]] ActionDistribution principal_distribution(const ContextVector& ctx,
                                                        const PolicyMatrix& theta);

/// Train: categorical draw from dist.probs. Eval: argmax, ties to the lowest index.
[[nodiscard]] std::size_t select_action(Rng& rng, const ActionDistribution& dist, Mode mode);

struct PrincipalExperience {
  ContextVector context;
  ActionDistribution distribution;
  int outcome = 0;  // realized outcome of the chosen action
  std::size_t action = 0;
  double baseline = 0.0;
};

/// Softmax REINFORCE in matrix form: column A gets C * (outcome - B) * (1 - phi(A)),
/// every other column a gets -C * (outcome - B) * phi(a).
[[nodiscard]] PolicyMatrix principal_gradient(const PrincipalExperience& exp, double baseline);

void accumulate_principal_gradient(const PrincipalExperience& exp, PolicyMatrix& grad);

struct Decision {
  std::size_t action = 0;
  ActionDistribution distribution;
};

class Principal {
 public:
  Principal(std::size_t actions, const LearnerParams& params, std::uint64_t seed);

  /// Context from the proxy signal (indicator slots) and the final report
  /// (log-odds slots), then softmax and selection. The step stays pending for learn().
  Decision decide(const std::optional<SignalEvidence>& own_signal,
                  const Eigen::VectorXd& final_report, Mode mode);

  /// Completes the pending decision with its realized outcome.
  void learn(int outcome);

  /// Pushes `exp` (its baseline is overwritten with the current one), updates
  /// the baseline, then applies one mini-batch update once a batch is available.
  void learn(PrincipalExperience exp);

  [[nodiscard]] const PolicyMatrix& theta() const { return theta_; }
  void set_theta(const PolicyMatrix& theta);
  [[nodiscard]] double baseline() const { return baseline_.value(); }
  [[nodiscard]] std::size_t buffer_size() const { return buffer_.size(); }

 private:
  std::size_t actions_;
  LearnerParams params_;
  Rng rng_;
  PolicyMatrix theta_;
  PolicyMatrix grad_;
  ReplayBuffer<PrincipalExperience> buffer_;
  Baseline baseline_;
  std::optional<PrincipalExperience> pending_;
  std::vector<std::size_t> batch_;
};

}  // namespace proxy_market
