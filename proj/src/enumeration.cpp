#include "proxy_market/enumeration.hpp"

namespace proxy_market::enumeration {

namespace {

double signal_likelihood(int signal, int outcome, const WorldConfig& cfg) {
  const double p_one = outcome == 1 ? cfg.likelihood_true : cfg.likelihood_false;
  return signal == 1 ? p_one : 1.0 - p_one;
}

std::vector<int> outcome_vector(std::size_t bits, std::size_t actions) {
  std::vector<int> outcomes(actions);
  for (std::size_t a = 0; a < actions; ++a) outcomes[a] = static_cast<int>((bits >> a) & 1U);
  return outcomes;
}

}  // namespace

double joint_probability(const std::vector<int>& outcomes, const std::vector<Evidence>& evidence,
                         const WorldConfig& cfg) {
  double p = 1.0;
  for (int o : outcomes) p *= o == 1 ? cfg.p_outcome : 1.0 - cfg.p_outcome;
  for (const auto& e : evidence) p *= signal_likelihood(e.value, outcomes.at(e.action), cfg);
  return p;
}

Eigen::VectorXd posterior(const std::vector<Evidence>& evidence, const WorldConfig& cfg) {
  const auto k = cfg.actions;
  Eigen::VectorXd numer = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  double total = 0.0;
  for (std::size_t bits = 0; bits < (std::size_t{1} << k); ++bits) {
    const auto outcomes = outcome_vector(bits, k);
    const double p = joint_probability(outcomes, evidence, cfg);
    total += p;
    for (std::size_t a = 0; a < k; ++a) {
      if (outcomes[a] == 1) numer[static_cast<Eigen::Index>(a)] += p;
    }
  }
  return numer / total;
}

Eigen::VectorXd proxy_forecast(const std::vector<Evidence>& evidence, const WorldConfig& cfg) {
  const auto k = cfg.actions;
  Eigen::VectorXd numer = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  double total = 0.0;
  for (std::size_t bits = 0; bits < (std::size_t{1} << k); ++bits) {
    const auto outcomes = outcome_vector(bits, k);
    const double p = joint_probability(outcomes, evidence, cfg);
    total += p;
    for (std::size_t a = 0; a < k; ++a) {
      numer[static_cast<Eigen::Index>(a)] += p * signal_likelihood(1, outcomes[a], cfg);
    }
  }
  return numer / total;
}

std::size_t argmax_with_tolerance(const Eigen::VectorXd& values, double tol) {
  const double top = values.maxCoeff();
  for (Eigen::Index a = 0; a < values.size(); ++a) {
    if (values[a] >= top - tol) return static_cast<std::size_t>(a);
  }
  return 0;
}

void for_each_configuration(
    std::size_t slots, std::size_t actions,
    const std::function<void(const std::vector<std::size_t>&, const std::vector<int>&)>& visit) {
  std::size_t assignments = 1;
  for (std::size_t i = 0; i < slots; ++i) assignments *= actions;

  std::vector<std::size_t> assignment(slots);
  std::vector<int> signals(slots);
  for (std::size_t code = 0; code < assignments; ++code) {
    std::size_t rest = code;
    for (std::size_t i = 0; i < slots; ++i) {
      assignment[i] = rest % actions;
      rest /= actions;
    }
    for (std::size_t bits = 0; bits < (std::size_t{1} << slots); ++bits) {
      for (std::size_t i = 0; i < slots; ++i) signals[i] = static_cast<int>((bits >> i) & 1U);
      visit(assignment, signals);
    }
  }
}

}  // namespace proxy_market::enumeration
