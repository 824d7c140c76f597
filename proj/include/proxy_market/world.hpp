#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "proxy_market/rng.hpp"
#include "proxy_market/scoring.hpp"

namespace proxy_market {

enum class AssignmentPolicy { uniform_random, round_robin };

[[nodiscard]] std::string_view to_string(AssignmentPolicy policy);
[[nodiscard]] AssignmentPolicy parse_assignment_policy(std::string_view name);

struct WorldConfig {
  std::size_t actions = 2;
  std::size_t agents = 3;
  double p_outcome = 0.5;
  double likelihood_true = 2.0 / 3.0;   // P(signal = 1 | outcome = 1)
  double likelihood_false = 1.0 / 3.0;  // P(signal = 1 | outcome = 0)
  AssignmentPolicy assignment = AssignmentPolicy::uniform_random;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  friend bool operator==(const WorldConfig&, const WorldConfig&) = default;
};

/// The observation of one agent: which action it saw and what it saw.
struct AgentSignal {
  std::size_t agent = 0;
  std::size_t action = 0;
  int value = 0;

  friend bool operator==(const AgentSignal&, const AgentSignal&) = default;
};

struct WorldState {
  std::vector<int> outcomes;                       // one per action
  std::optional<ProxyObservation> principal_signal;
  std::vector<AgentSignal> agent_signals;          // indexed by agent

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

/// Which participants draw a signal in a round.
struct WorldLayout {
  std::size_t agent_slots = 0;
  bool principal_signal = true;
  /// Agents forced onto the same action (the second copies the first's
  /// assignment before signals are drawn).
  std::optional<std::pair<std::size_t, std::size_t>> shared_action;
};

/// k independent Bernoulli(p_outcome) draws.
[[nodiscard]] std::vector<int> sample_outcomes(Rng& rng, const WorldConfig& cfg);

[[nodiscard]] int sample_signal(Rng& rng, int outcome, const WorldConfig& cfg);

/// Action index per slot. Round-robin gives slot i action i mod k.
[[nodiscard]] std::vector<std::size_t> assign_actions(Rng& rng, const WorldConfig& cfg,
                                                      std::size_t slots);

/// Draws outcomes, then all assignments, then all signals. Agent slots come
/// first; the principal, when present, takes the last slot.
[[nodiscard]] WorldState sample_world(Rng& rng, const WorldConfig& cfg, const WorldLayout& layout);

/// Default layout: cfg.agents agents plus a principal signal.
[[nodiscard]] WorldState sample_world(Rng& rng, const WorldConfig& cfg);

}  // namespace proxy_market
