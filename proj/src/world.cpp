#include "proxy_market/world.hpp"

#include <cmath>

#include <fmt/core.h>

#include "proxy_market/errors.hpp"

namespace proxy_market {

std::string_view to_string(AssignmentPolicy policy) {
  return policy == AssignmentPolicy::round_robin ? "round_robin" : "uniform_random";
}

AssignmentPolicy parse_assignment_policy(std::string_view name) {
  if (name == "uniform_random" || name == "uniform") return AssignmentPolicy::uniform_random;
  if (name == "round_robin") return AssignmentPolicy::round_robin;
  throw ConfigError(
      fmt::format("world.assignment: unknown policy '{}' (expected uniform_random|round_robin)", name));
}

void WorldConfig::validate() const {
  if (actions < 2) throw ConfigError("world.actions: must be at least 2");
  if (agents < 1) throw ConfigError("world.agents: must be at least 1");
  if (!(p_outcome > 0.0 && p_outcome < 1.0)) {
    throw ConfigError(fmt::format("world.p_outcome: {} is not in (0, 1)", p_outcome));
  }
  if (!(likelihood_true >= 0.0 && likelihood_true <= 1.0)) {
    throw ConfigError(fmt::format("world.likelihood_true: {} is not in [0, 1]", likelihood_true));
  }
  if (!(likelihood_false >= 0.0 && likelihood_false <= 1.0)) {
    throw ConfigError(fmt::format("world.likelihood_false: {} is not in [0, 1]", likelihood_false));
  }
  if (!(likelihood_false < likelihood_true)) {
    throw ConfigError(fmt::format(
        "world.likelihood_true: signals are uninformative (likelihood_true={} must exceed "
        "likelihood_false={})",
        likelihood_true, likelihood_false));
  }
}

std::vector<int> sample_outcomes(Rng& rng, const WorldConfig& cfg) {
  std::bernoulli_distribution draw(cfg.p_outcome);
  std::vector<int> outcomes(cfg.actions);
  for (auto& o : outcomes) o = draw(rng) ? 1 : 0;
  return outcomes;
}

int sample_signal(Rng& rng, int outcome, const WorldConfig& cfg) {
  std::bernoulli_distribution draw(outcome == 1 ? cfg.likelihood_true : cfg.likelihood_false);
  return draw(rng) ? 1 : 0;
}

std::vector<std::size_t> assign_actions(Rng& rng, const WorldConfig& cfg, std::size_t slots) {
  std::vector<std::size_t> actions(slots);
  if (cfg.assignment == AssignmentPolicy::round_robin) {
    for (std::size_t i = 0; i < slots; ++i) actions[i] = i % cfg.actions;
    return actions;
  }
  std::uniform_int_distribution<std::size_t> pick(0, cfg.actions - 1);
  for (auto& a : actions) a = pick(rng);
  return actions;
}

WorldState sample_world(Rng& rng, const WorldConfig& cfg, const WorldLayout& layout) {
  WorldState world;
  world.outcomes = sample_outcomes(rng, cfg);

  const std::size_t slots = layout.agent_slots + (layout.principal_signal ? 1 : 0);
  auto assignment = assign_actions(rng, cfg, slots);
  if (layout.shared_action) {
    const auto [first, second] = *layout.shared_action;
    if (first >= layout.agent_slots || second >= layout.agent_slots) {
      throw ConfigError("sample_world: shared-action agent index out of range");
    }
    assignment[second] = assignment[first];
  }

  world.agent_signals.reserve(layout.agent_slots);
  for (std::size_t i = 0; i < layout.agent_slots; ++i) {
    const auto action = assignment[i];
    world.agent_signals.push_back({i, action, sample_signal(rng, world.outcomes[action], cfg)});
  }
  if (layout.principal_signal) {
    const auto action = assignment.back();
    world.principal_signal = ProxyObservation{action, sample_signal(rng, world.outcomes[action], cfg)};
  }
  return world;
}

WorldState sample_world(Rng& rng, const WorldConfig& cfg) {
  return sample_world(rng, cfg, WorldLayout{cfg.agents, true, std::nullopt});
}

}  // namespace proxy_market
