#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "proxy_market/errors.hpp"
#include "proxy_market/logit.hpp"
#include "proxy_market/rng.hpp"
#include "proxy_market/scoring.hpp"

namespace proxy_market {

/// 3k entries. For action a: [3a] = 1 iff a 1-signal was seen for a,
/// [3a + 1] = 1 iff a 0-signal was seen, [3a + 2] = log-odds of the incoming
/// report for a.
using ContextVector = Eigen::VectorXd;

/// (3k x k) weights mapping a context row vector to k report means.
using PolicyMatrix = Eigen::MatrixXd;

enum class Mode { train, eval };

/// A participant's own signal, as seen from inside the policy.
struct SignalEvidence {
  std::size_t action = 0;
  int value = 0;
};

inline constexpr double kContextClamp = 1e-6;

/// ln(p / (1 - p)) with p clamped to [kContextClamp, 1 - kContextClamp].
[[nodiscard]] double clamped_logit(double p);

[[nodiscard]] ContextVector build_context(const std::optional<SignalEvidence>& own_signal,
                                          const Eigen::VectorXd& incoming);

/// ctx^T * theta. Throws ConfigError when ctx.size() != theta.rows().
[[nodiscard]] Eigen::VectorXd policy_mean(const ContextVector& ctx, const PolicyMatrix& theta);

/// Uniform in [-range, range], drawn column-major.
[[nodiscard]] PolicyMatrix random_policy(Rng& rng, std::size_t actions, double range);

struct ReportPair {
  Eigen::VectorXd log_odds;  // sampled X
  Eigen::VectorXd probs;     // logistic(X)
  Eigen::VectorXd mean;      // mu
};

/// X[a] ~ Normal(mean[a], sigma^2). sigma = 0 returns X = mean exactly.
[[nodiscard]] ReportPair sample_report(Rng& rng, const Eigen::VectorXd& mean, double sigma);

struct Experience {
  ContextVector context;
  Eigen::VectorXd mean;
  Eigen::VectorXd sample;
  Score reward = 0.0;
  double baseline = 0.0;  // the learner's baseline at the time the reward arrived
};

/// C * (R - B) * (X - mu)^T / sigma^2.
[[nodiscard]] PolicyMatrix agent_gradient(const Experience& exp, double baseline, double sigma);

/// grad += agent_gradient(exp, exp.baseline, sigma), without temporaries.
void accumulate_agent_gradient(const Experience& exp, double sigma, PolicyMatrix& grad);

/// theta + alpha * mean(gradients). Throws ConfigError on an empty batch.
[[nodiscard]] PolicyMatrix update_policy(const PolicyMatrix& theta,
                                         std::span<const PolicyMatrix> gradients, double alpha);

/// Bounded FIFO; once full, each push overwrites the oldest entry.
template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
    items_.reserve(capacity);
  }

  void push(const T& item) {
    if (items_.size() < capacity_) {
      items_.push_back(item);
    } else {
      items_[next_] = item;
    }
    next_ = (next_ + 1) % capacity_;
  }

  /// `count` slot indices drawn uniformly with replacement.
  void sample_indices(Rng& rng, std::size_t count, std::vector<std::size_t>& out) const {
    if (count > items_.size()) throw UsageError("replay buffer holds fewer items than the batch");
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    out.resize(count);
    for (auto& i : out) i = pick(rng);
  }

  [[nodiscard]] const T& operator[](std::size_t i) const { return items_[i]; }
  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<T> items_;
};

/// Exponential moving average of rewards, starting from 0.
class Baseline {
 public:
  explicit Baseline(double rho);
  void observe(double reward) { value_ += rho_ * (reward - value_); }
  [[nodiscard]] double value() const { return value_; }
  void set_value(double v) { value_ = v; }

 private:
  double rho_;
  double value_ = 0.0;
};

/// Hyperparameters shared by agents and the principal.
struct LearnerParams {
  double alpha = 0.004;
  std::size_t buffer_capacity = 4096;
  std::size_t batch_size = 64;
  double baseline_rho = 0.01;
  double init_range = 0.1;

  void validate(const char* prefix) const;
  friend bool operator==(const LearnerParams&, const LearnerParams&) = default;
};

/// A forecaster with a linear log-odds policy trained by REINFORCE from replay.
class Agent {
 public:
  Agent(std::size_t actions, const LearnerParams& params, double sigma, std::uint64_t seed);

  /// Builds the context, computes the mean and samples a report (train) or
  /// returns the mean itself (eval). Train mode keeps the step pending for learn().
  ReportPair act(const std::optional<SignalEvidence>& own_signal, const Eigen::VectorXd& incoming,
                 Mode mode);

  /// Stores the pending step with `reward`, updates the baseline and, once the
  /// buffer holds a full batch, applies one mini-batch update.
  /// Throws UsageError when no train-mode act() is pending.
  void learn(Score reward);

  [[nodiscard]] const PolicyMatrix& theta() const { return theta_; }
  void set_theta(const PolicyMatrix& theta);
  [[nodiscard]] double baseline() const { return baseline_.value(); }
  [[nodiscard]] std::size_t buffer_size() const { return buffer_.size(); }
  [[nodiscard]] std::size_t actions() const { return actions_; }
  [[nodiscard]] double sigma() const { return sigma_; }

 private:
  std::size_t actions_;
  LearnerParams params_;
  double sigma_;
  Rng rng_;
  PolicyMatrix theta_;
  PolicyMatrix grad_;
  ReplayBuffer<Experience> buffer_;
  Baseline baseline_;
  std::optional<Experience> pending_;
  std::vector<std::size_t> batch_;
};

}  // namespace proxy_market
