#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "proxy_market/world.hpp"

namespace proxy_market::enumeration {

/// An observed signal about one action, without its owner.
struct Evidence {
  std::size_t action = 0;
  int value = 0;
};

/// P(outcomes, evidence) under the world model, by direct product.
[[nodiscard]] double joint_probability(const std::vector<int>& outcomes,
                                       const std::vector<Evidence>& evidence,
                                       const WorldConfig& cfg);

/// P(outcome_a = 1 | evidence) for every a, summing the joint over all 2^k
/// outcome vectors.
[[nodiscard]] Eigen::VectorXd posterior(const std::vector<Evidence>& evidence,
                                        const WorldConfig& cfg);

/// P(a fresh signal about action a is 1 | evidence) for every a, summing over
/// outcome vectors and the fresh signal.
[[nodiscard]] Eigen::VectorXd proxy_forecast(const std::vector<Evidence>& evidence,
                                             const WorldConfig& cfg);

/// Lowest index whose value is within `tol` of the maximum.
[[nodiscard]] std::size_t argmax_with_tolerance(const Eigen::VectorXd& values, double tol);

/// Every assignment of `slots` participants to actions, combined with every
/// signal vector: k^slots * 2^slots calls.
void for_each_configuration(
    std::size_t slots, std::size_t actions,
    const std::function<void(const std::vector<std::size_t>& assignment,
                             const std::vector<int>& signals)>& visit);

}  // namespace proxy_market::enumeration
