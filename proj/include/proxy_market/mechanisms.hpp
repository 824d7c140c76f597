#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "proxy_market/agents.hpp"
#include "proxy_market/bayes_oracle.hpp"
#include "proxy_market/principal.hpp"
#include "proxy_market/scoring.hpp"
#include "proxy_market/world.hpp"

namespace proxy_market {

enum class Mechanism { m1, m2, m3 };
enum class ProxySource { principal, advisor, peer };

/// How an advisor or peer turns its signal into an announcement. Everything
/// other than `truthful` exists to measure the payoff of deviating.
enum class AnnouncementStrategy { truthful, always_one, always_zero, flip, random };

[[nodiscard]] std::string_view to_string(Mechanism m);
[[nodiscard]] Mechanism parse_mechanism(std::string_view name);
[[nodiscard]] std::string_view to_string(ProxySource s);
[[nodiscard]] std::string_view to_string(AnnouncementStrategy s);
[[nodiscard]] AnnouncementStrategy parse_strategy(std::string_view name);

/// `random` draws from rng; every other strategy leaves it untouched.
[[nodiscard]] int announce(AnnouncementStrategy strategy, int signal, Rng& rng);

/// Inputs fixed for the whole run.
struct RoundSetup {
  WorldConfig world;
  ScoringRule rule = ScoringRule::brier;
  Eigen::VectorXd prior;  // report prior for the first forecaster
};

/// Even-odds prior for k actions.
[[nodiscard]] Eigen::VectorXd even_odds(std::size_t actions);

struct OracleBenchmarks {
  PosteriorReport ideal;  // ideal final report from the forecasters' signals
  double er = 0.0;        // squared error of the final report against ideal.forecast
  BayesDecision bayes;    // from every signal in the round
  int bayes_success = 0;  // outcome of the Bayes decision
};

struct RoundRecord {
  std::size_t step = 0;
  Mechanism mechanism = Mechanism::m1;
  WorldState world;
  std::vector<std::size_t> forecasters;  // agent index of each report, in order
  std::vector<Eigen::VectorXd> reports;  // probability reports, in order
  std::vector<Score> scores;             // one per report
  ProxySource proxy_source = ProxySource::principal;
  std::optional<std::size_t> proxy_agent;  // advisor or first peer
  ProxyObservation proxy;
  Decision decision;
  int outcome = 0;  // realized outcome of the decided action
  OracleBenchmarks oracle;
  std::optional<double> advisor_payment;
  std::optional<std::pair<int, int>> peer_announcements;
  std::optional<std::pair<Score, Score>> peer_scores;

  [[nodiscard]] const Eigen::VectorXd& final_report() const { return reports.back(); }
};

/// Past announcements of one peer, at most `window` of them.
class PeerHistory {
 public:
  explicit PeerHistory(std::size_t window);

  void push(int announcement);
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] std::size_t window() const { return window_; }
  /// Fraction of 1-announcements among the stored entries (0 when empty).
  [[nodiscard]] double fraction_ones() const;

 private:
  std::size_t window_;
  std::deque<int> entries_;
  std::size_t ones_ = 0;
};

/// Output agreement minus the agreement rate two history-matched blind
/// reporters would reach: 1[own == peer] - (f_own f_peer + (1 - f_own)(1 - f_peer)).
/// Returns 0 while either history is empty.
[[nodiscard]] Score dg_peer_score(int own_report, int peer_report, const PeerHistory& own_history,
                                  const PeerHistory& peer_history);

/// Recomputes agent scores from what a record stores; never reads the decision.
[[nodiscard]] std::vector<Score> rescore(const RoundRecord& record, const RoundSetup& setup);

// Each mechanism comes in two forms: resolve_* plays a round on a given world,
// run_* samples the world from rng first. In train mode every participant
// learns; agent scores are settled and learned from before the principal
// decides. Eval mode neither learns nor touches participant RNG streams.

RoundRecord resolve_round_m1(const WorldState& world, const RoundSetup& setup,
                             std::span<Agent> agents, Principal& principal, Mode mode);
RoundRecord run_round_m1(const RoundSetup& setup, std::span<Agent> agents, Principal& principal,
                         Rng& rng, Mode mode);

/// M2 world layout: every agent draws a signal, the principal none.
[[nodiscard]] WorldLayout advisor_layout(std::size_t agents);

/// The advisor announces its signal as the proxy and is paid share * outcome.
/// Throws ConfigError on fewer than 2 agents, an advisor index out of range or
/// a share outside [0, 1].
RoundRecord resolve_round_m2(const WorldState& world, const RoundSetup& setup,
                             std::span<Agent> agents, std::size_t advisor, double share,
                             Principal& principal, Rng& rng, Mode mode,
                             AnnouncementStrategy strategy = AnnouncementStrategy::truthful);
RoundRecord run_round_m2(const RoundSetup& setup, std::span<Agent> agents, std::size_t advisor,
                         double share, Principal& principal, Rng& rng, Mode mode,
                         AnnouncementStrategy strategy = AnnouncementStrategy::truthful);

struct PeerPair {
  std::size_t first = 0;  // supplies the proxy
  std::size_t second = 1;

  friend bool operator==(const PeerPair&, const PeerPair&) = default;
};

/// M3 world layout: both peers see the same action, the principal no signal.
[[nodiscard]] WorldLayout peer_layout(std::size_t agents, PeerPair peers);

/// Peers announce (the first with `first_strategy`, the second truthfully) and
/// are scored against each other; the first peer's announcement is the proxy.
/// Histories are appended in train mode only.
/// Throws ConfigError on fewer than 3 agents, equal or out-of-range peers, or
/// peers that were not assigned the same action.
RoundRecord resolve_round_m3(const WorldState& world, const RoundSetup& setup,
                             std::span<Agent> agents, PeerPair peers,
                             std::pair<PeerHistory, PeerHistory>& histories, Principal& principal,
                             Rng& rng, Mode mode,
                             AnnouncementStrategy first_strategy = AnnouncementStrategy::truthful);
RoundRecord run_round_m3(const RoundSetup& setup, std::span<Agent> agents, PeerPair peers,
                         std::pair<PeerHistory, PeerHistory>& histories, Principal& principal,
                         Rng& rng, Mode mode,
                         AnnouncementStrategy first_strategy = AnnouncementStrategy::truthful);

// Exhaustive payoff comparisons.

struct AdvisorCase {
  std::vector<std::size_t> assignment;  // per agent
  std::vector<int> signals;             // per agent
  double probability = 0.0;             // under uniform-random assignment
  double truthful_success = 0.0;        // P(decided outcome = 1) with a truthful advisor
  double deviating_success = 0.0;       // same, with the advisor's announcement flipped
};

/// Enumerates every assignment and signal vector of `agents` agents. The
/// forecasters aggregate exactly and the principal takes the Bayes decision on
/// the announced proxy plus the forecasters' signals; success is scored with
/// the true posterior of the decided action.
[[nodiscard]] std::vector<AdvisorCase> enumerate_advisor_deviation(const WorldConfig& cfg,
                                                                   std::size_t agents,
                                                                   std::size_t advisor);

/// One-round joint statistics of two peers' announcements about a shared action.
struct PeerJoint {
  double agree = 0.0;
  double own_one = 0.0;
  double peer_one = 0.0;
  double both_one = 0.0;
  double both_zero = 0.0;
};

/// Enumerates the shared outcome, both signals, and any strategy coin flips.
[[nodiscard]] PeerJoint peer_joint(const WorldConfig& cfg, AnnouncementStrategy own,
                                   AnnouncementStrategy peer);

/// Exact expected dg_peer_score when both histories hold `history_length`
/// past rounds drawn from the same strategy pair.
[[nodiscard]] double expected_peer_score(const WorldConfig& cfg, AnnouncementStrategy own,
                                         AnnouncementStrategy peer, std::size_t history_length);

}  // namespace proxy_market
