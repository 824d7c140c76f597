#include "proxy_market/principal.hpp"

#include <cmath>

#include "proxy_market/bayes_oracle.hpp"

namespace proxy_market {

ActionDistribution principal_distribution(const ContextVector& ctx, const PolicyMatrix& theta) {
  const Eigen::VectorXd logits = policy_mean(ctx, theta);
  const double top = logits.maxCoeff();
  ActionDistribution dist{(logits.array() - top).exp().matrix(), 0};
  dist.probs /= dist.probs.sum();
  return dist;
}

std::size_t select_action(Rng& rng, const ActionDistribution& dist, Mode mode) {
  if (mode == Mode::eval) return argmax_lowest(dist.probs);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cumulative = 0.0;
  const auto last = dist.probs.size() - 1;
  for (Eigen::Index a = 0; a < last; ++a) {
    cumulative += dist.probs[a];
    if (u < cumulative) return static_cast<std::size_t>(a);
  }
  return static_cast<std::size_t>(last);
}

void accumulate_principal_gradient(const PrincipalExperience& exp, PolicyMatrix& grad) {
  const double advantage = static_cast<double>(exp.outcome) - exp.baseline;
  Eigen::VectorXd coeff = -exp.distribution.probs;
  coeff[static_cast<Eigen::Index>(exp.action)] += 1.0;
  grad.noalias() += exp.context * ((advantage * coeff).transpose());
}

PolicyMatrix principal_gradient(const PrincipalExperience& exp, double baseline) {
  PolicyMatrix grad = PolicyMatrix::Zero(exp.context.size(), exp.distribution.probs.size());
  PrincipalExperience copy = exp;
  copy.baseline = baseline;
  accumulate_principal_gradient(copy, grad);
  return grad;
}

Principal::Principal(std::size_t actions, const LearnerParams& params, std::uint64_t seed)
    : actions_(actions),
      params_(params),
      rng_(seed),
      buffer_(params.buffer_capacity),
      baseline_(params.baseline_rho) {
  params_.validate("principal_");
  theta_ = random_policy(rng_, actions, params.init_range);
  grad_ = PolicyMatrix::Zero(theta_.rows(), theta_.cols());
}

void Principal::set_theta(const PolicyMatrix& theta) {
  if (theta.rows() != theta_.rows() || theta.cols() != theta_.cols()) {
    throw ConfigError("set_theta: policy matrix shape mismatch");
  }
  theta_ = theta;
}

Decision Principal::decide(const std::optional<SignalEvidence>& own_signal,
                           const Eigen::VectorXd& final_report, Mode mode) {
  if (final_report.size() != static_cast<Eigen::Index>(actions_)) {
    throw ConfigError("decide: final report has the wrong number of actions");
  }
  ContextVector ctx = build_context(own_signal, final_report);
  ActionDistribution dist = principal_distribution(ctx, theta_);
  dist.chosen = select_action(rng_, dist, mode);
  if (mode == Mode::train) {
    pending_ = PrincipalExperience{std::move(ctx), dist, 0, dist.chosen, 0.0};
  }
  return Decision{dist.chosen, std::move(dist)};
}

void Principal::learn(int outcome) {
  if (!pending_) throw UsageError("Principal::learn called without a pending train-mode decide()");
  PrincipalExperience exp = std::move(*pending_);
  pending_.reset();
  exp.outcome = outcome;
  learn(std::move(exp));
}

void Principal::learn(PrincipalExperience exp) {
  exp.baseline = baseline_.value();
  baseline_.observe(static_cast<double>(exp.outcome));
  buffer_.push(exp);

  if (buffer_.size() < params_.batch_size) return;
  buffer_.sample_indices(rng_, params_.batch_size, batch_);
  grad_.setZero();
  for (auto i : batch_) accumulate_principal_gradient(buffer_[i], grad_);
  theta_ += (params_.alpha / static_cast<double>(batch_.size())) * grad_;
}

}  // namespace proxy_market
