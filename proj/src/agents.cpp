#include "proxy_market/agents.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

namespace proxy_market {

double clamped_logit(double p) {
  return logit(std::clamp(p, kContextClamp, 1.0 - kContextClamp));
}

ContextVector build_context(const std::optional<SignalEvidence>& own_signal,
                            const Eigen::VectorXd& incoming) {
  const auto k = incoming.size();
  ContextVector ctx = ContextVector::Zero(3 * k);
  for (Eigen::Index a = 0; a < k; ++a) ctx[3 * a + 2] = clamped_logit(incoming[a]);
  if (own_signal) {
    const auto a = static_cast<Eigen::Index>(own_signal->action);
    if (a >= k) throw ConfigError("build_context: signal action out of range");
    ctx[3 * a + (own_signal->value == 1 ? 0 : 1)] = 1.0;
  }
  return ctx;
}

Eigen::VectorXd policy_mean(const ContextVector& ctx, const PolicyMatrix& theta) {
  if (ctx.size() != theta.rows()) {
    throw ConfigError(fmt::format("policy_mean: context has {} entries, policy has {} rows",
                                  ctx.size(), theta.rows()));
  }
  return theta.transpose() * ctx;
}

PolicyMatrix random_policy(Rng& rng, std::size_t actions, double range) {
  const auto k = static_cast<Eigen::Index>(actions);
  PolicyMatrix theta(3 * k, k);
  std::uniform_real_distribution<double> init(-range, range);
  for (Eigen::Index c = 0; c < theta.cols(); ++c) {
    for (Eigen::Index r = 0; r < theta.rows(); ++r) theta(r, c) = init(rng);
  }
  return theta;
}

ReportPair sample_report(Rng& rng, const Eigen::VectorXd& mean, double sigma) {
  if (!(sigma >= 0.0)) throw ConfigError("sample_report: sigma must be non-negative");
  ReportPair report{mean, Eigen::VectorXd(mean.size()), mean};
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (Eigen::Index a = 0; a < mean.size(); ++a) report.log_odds[a] += noise(rng);
  }
  for (Eigen::Index a = 0; a < mean.size(); ++a) report.probs[a] = logistic(report.log_odds[a]);
  return report;
}

void accumulate_agent_gradient(const Experience& exp, double sigma, PolicyMatrix& grad) {
  const double scale = (exp.reward - exp.baseline) / (sigma * sigma);
  grad.noalias() += exp.context * ((exp.sample - exp.mean).transpose() * scale);
}

PolicyMatrix agent_gradient(const Experience& exp, double baseline, double sigma) {
  PolicyMatrix grad = PolicyMatrix::Zero(exp.context.size(), exp.mean.size());
  Experience copy = exp;
  copy.baseline = baseline;
  accumulate_agent_gradient(copy, sigma, grad);
  return grad;
}

PolicyMatrix update_policy(const PolicyMatrix& theta, std::span<const PolicyMatrix> gradients,
                           double alpha) {
  if (gradients.empty()) throw ConfigError("update_policy: empty gradient batch");
  PolicyMatrix sum = PolicyMatrix::Zero(theta.rows(), theta.cols());
  for (const auto& g : gradients) sum += g;
  return theta + (alpha / static_cast<double>(gradients.size())) * sum;
}

Baseline::Baseline(double rho) : rho_(rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("baseline_rho must be in (0, 1]");
}

void LearnerParams::validate(const char* prefix) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ConfigError(fmt::format("{}alpha: must be positive", prefix));
  }
  if (buffer_capacity == 0) throw ConfigError(fmt::format("{}buffer_capacity: must be positive", prefix));
  if (batch_size == 0) throw ConfigError(fmt::format("{}batch_size: must be positive", prefix));
  if (batch_size > buffer_capacity) {
    throw ConfigError(fmt::format("{}batch_size: exceeds buffer_capacity", prefix));
  }
  if (!(baseline_rho > 0.0 && baseline_rho <= 1.0)) {
    throw ConfigError(fmt::format("{}baseline_rho: must be in (0, 1]", prefix));
  }
  if (!(init_range >= 0.0) || !std::isfinite(init_range)) {
    throw ConfigError(fmt::format("{}init_range: must be non-negative", prefix));
  }
}

Agent::Agent(std::size_t actions, const LearnerParams& params, double sigma, std::uint64_t seed)
    : actions_(actions),
      params_(params),
      sigma_(sigma),
      rng_(seed),
      buffer_(params.buffer_capacity),
      baseline_(params.baseline_rho) {
  params_.validate("");
  if (!(sigma > 0.0)) throw ConfigError("sigma: must be positive");
  theta_ = random_policy(rng_, actions, params.init_range);
  grad_ = PolicyMatrix::Zero(theta_.rows(), theta_.cols());
}

void Agent::set_theta(const PolicyMatrix& theta) {
  if (theta.rows() != theta_.rows() || theta.cols() != theta_.cols()) {
    throw ConfigError("set_theta: policy matrix shape mismatch");
  }
  theta_ = theta;
}

ReportPair Agent::act(const std::optional<SignalEvidence>& own_signal,
                      const Eigen::VectorXd& incoming, Mode mode) {
  if (incoming.size() != static_cast<Eigen::Index>(actions_)) {
    throw ConfigError("act: incoming report has the wrong number of actions");
  }
  ContextVector ctx = build_context(own_signal, incoming);
  Eigen::VectorXd mean = policy_mean(ctx, theta_);
  if (mode == Mode::eval) {
    return sample_report(rng_, mean, 0.0);
  }
  ReportPair report = sample_report(rng_, mean, sigma_);
  pending_ = Experience{std::move(ctx), report.mean, report.log_odds, 0.0, 0.0};
  return report;
}

void Agent::learn(Score reward) {
  if (!pending_) throw UsageError("Agent::learn called without a pending train-mode act()");
  pending_->reward = reward;
  pending_->baseline = baseline_.value();
  buffer_.push(*pending_);
  pending_.reset();
  baseline_.observe(reward);

  if (buffer_.size() < params_.batch_size) return;
  buffer_.sample_indices(rng_, params_.batch_size, batch_);
  grad_.setZero();
  for (auto i : batch_) accumulate_agent_gradient(buffer_[i], sigma_, grad_);
  theta_ += (params_.alpha / static_cast<double>(batch_.size())) * grad_;
}

}  // namespace proxy_market
