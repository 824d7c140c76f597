#include "proxy_market/mechanisms.hpp"

#include <fmt/core.h>

#include "proxy_market/enumeration.hpp"
#include "proxy_market/errors.hpp"

namespace proxy_market {

std::string_view to_string(Mechanism m) {
  switch (m) {
    case Mechanism::m1:
      return "m1";
    case Mechanism::m2:
      return "m2";
    case Mechanism::m3:
      return "m3";
  }
  return "m1";
}

Mechanism parse_mechanism(std::string_view name) {
  if (name == "m1") return Mechanism::m1;
  if (name == "m2") return Mechanism::m2;
  if (name == "m3") return Mechanism::m3;
  throw ConfigError(fmt::format("mechanism: unknown mechanism '{}' (expected m1|m2|m3)", name));
}

std::string_view to_string(ProxySource s) {
  switch (s) {
    case ProxySource::principal:
      return "principal";
    case ProxySource::advisor:
      return "advisor";
    case ProxySource::peer:
      return "peer";
  }
  return "principal";
}

std::string_view to_string(AnnouncementStrategy s) {
  switch (s) {
    case AnnouncementStrategy::truthful:
      return "truthful";
    case AnnouncementStrategy::always_one:
      return "always_one";
    case AnnouncementStrategy::always_zero:
      return "always_zero";
    case AnnouncementStrategy::flip:
      return "flip";
    case AnnouncementStrategy::random:
      return "random";
  }
  return "truthful";
}

AnnouncementStrategy parse_strategy(std::string_view name) {
  if (name == "truthful") return AnnouncementStrategy::truthful;
  if (name == "always_one" || name == "always-1") return AnnouncementStrategy::always_one;
  if (name == "always_zero" || name == "always-0") return AnnouncementStrategy::always_zero;
  if (name == "flip") return AnnouncementStrategy::flip;
  if (name == "random") return AnnouncementStrategy::random;
  throw ConfigError(fmt::format(
      "peer_strategy: unknown strategy '{}' (expected truthful|always_one|always_zero|flip|random)",
      name));
}

namespace {

int announce_with_coin(AnnouncementStrategy strategy, int signal, int coin) {
  switch (strategy) {
    case AnnouncementStrategy::truthful:
      return signal;
    case AnnouncementStrategy::always_one:
      return 1;
    case AnnouncementStrategy::always_zero:
      return 0;
    case AnnouncementStrategy::flip:
      return 1 - signal;
    case AnnouncementStrategy::random:
      return coin;
  }
  return signal;
}

void check_agents(const WorldState& world, std::span<Agent> agents) {
  if (world.agent_signals.size() != agents.size()) {
    throw ConfigError(fmt::format("round: world has {} agent signals for {} agents",
                                  world.agent_signals.size(), agents.size()));
  }
}

// Sequential elicitation from `rec.forecasters`, scoring against `rec.proxy`,
// and (train) agent learning. Runs before any decision exists.
void elicit(RoundRecord& rec, const RoundSetup& setup, std::span<Agent> agents, Mode mode) {
  Eigen::VectorXd incoming = setup.prior;
  rec.reports.reserve(rec.forecasters.size());
  for (auto idx : rec.forecasters) {
    const auto& s = rec.world.agent_signals[idx];
    ReportPair report = agents[idx].act(SignalEvidence{s.action, s.value}, incoming, mode);
    rec.reports.push_back(report.probs);
    incoming = std::move(report.probs);
  }
  rec.scores = score_round(rec.reports, setup.prior, rec.proxy, setup.rule);
  if (mode == Mode::train) {
    for (std::size_t i = 0; i < rec.forecasters.size(); ++i) {
      agents[rec.forecasters[i]].learn(rec.scores[i]);
    }
  }
}

void decide(RoundRecord& rec, const RoundSetup& setup, Principal& principal, Mode mode) {
  rec.decision =
      principal.decide(SignalEvidence{rec.proxy.action, rec.proxy.value}, rec.final_report(), mode);
  rec.outcome = rec.world.outcomes.at(rec.decision.action);
  if (mode == Mode::train) principal.learn(rec.outcome);

  std::vector<bool> forecaster(rec.world.agent_signals.size(), false);
  for (auto idx : rec.forecasters) forecaster[idx] = true;
  rec.oracle.ideal =
      ideal_report(rec.world, setup.world, [&](std::size_t agent) { return forecaster[agent]; });
  rec.oracle.er = aggregation_error(rec.final_report(), rec.oracle.ideal.forecast);
  rec.oracle.bayes = bayes_decision(rec.world, setup.world);
  rec.oracle.bayes_success = rec.world.outcomes.at(rec.oracle.bayes.action);
}

}  // namespace

int announce(AnnouncementStrategy strategy, int signal, Rng& rng) {
  int coin = 0;
  if (strategy == AnnouncementStrategy::random) coin = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
  return announce_with_coin(strategy, signal, coin);
}

Eigen::VectorXd even_odds(std::size_t actions) {
  return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(actions), 0.5);
}

PeerHistory::PeerHistory(std::size_t window) : window_(window) {
  if (window == 0) throw ConfigError("peer_window: must be positive");
}

void PeerHistory::push(int announcement) {
  entries_.push_back(announcement);
  ones_ += announcement == 1 ? 1 : 0;
  if (entries_.size() > window_) {
    ones_ -= entries_.front() == 1 ? 1 : 0;
    entries_.pop_front();
  }
}

double PeerHistory::fraction_ones() const {
  if (entries_.empty()) return 0.0;
  return static_cast<double>(ones_) / static_cast<double>(entries_.size());
}

Score dg_peer_score(int own_report, int peer_report, const PeerHistory& own_history,
                    const PeerHistory& peer_history) {
  if (own_history.empty() || peer_history.empty()) return 0.0;
  const double f_own = own_history.fraction_ones();
  const double f_peer = peer_history.fraction_ones();
  const double agreement = own_report == peer_report ? 1.0 : 0.0;
  return agreement - (f_own * f_peer + (1.0 - f_own) * (1.0 - f_peer));
}

std::vector<Score> rescore(const RoundRecord& record, const RoundSetup& setup) {
  return score_round(record.reports, setup.prior, record.proxy, setup.rule);
}

RoundRecord resolve_round_m1(const WorldState& world, const RoundSetup& setup,
                             std::span<Agent> agents, Principal& principal, Mode mode) {
  if (agents.empty()) throw ConfigError("m1: at least one agent is required");
  check_agents(world, agents);
  if (!world.principal_signal) throw ConfigError("m1: the principal has no signal this round");

  RoundRecord rec;
  rec.mechanism = Mechanism::m1;
  rec.world = world;
  rec.proxy_source = ProxySource::principal;
  rec.proxy = *world.principal_signal;
  for (std::size_t i = 0; i < agents.size(); ++i) rec.forecasters.push_back(i);

  elicit(rec, setup, agents, mode);
  decide(rec, setup, principal, mode);
  return rec;
}

RoundRecord run_round_m1(const RoundSetup& setup, std::span<Agent> agents, Principal& principal,
                         Rng& rng, Mode mode) {
  if (agents.empty()) throw ConfigError("m1: at least one agent is required");
  const auto world = sample_world(rng, setup.world, WorldLayout{agents.size(), true, std::nullopt});
  return resolve_round_m1(world, setup, agents, principal, mode);
}

WorldLayout advisor_layout(std::size_t agents) { return WorldLayout{agents, false, std::nullopt}; }

RoundRecord resolve_round_m2(const WorldState& world, const RoundSetup& setup,
                             std::span<Agent> agents, std::size_t advisor, double share,
                             Principal& principal, Rng& rng, Mode mode,
                             AnnouncementStrategy strategy) {
  if (agents.size() < 2) throw ConfigError("m2: needs an advisor and at least one forecaster");
  if (advisor >= agents.size()) {
    throw ConfigError(fmt::format("advisor_index: {} out of range for {} agents", advisor, agents.size()));
  }
  if (!(share >= 0.0 && share <= 1.0)) throw ConfigError("advisor_share: must be in [0, 1]");
  check_agents(world, agents);

  RoundRecord rec;
  rec.mechanism = Mechanism::m2;
  rec.world = world;
  rec.proxy_source = ProxySource::advisor;
  rec.proxy_agent = advisor;
  const auto& own = world.agent_signals[advisor];
  rec.proxy = ProxyObservation{own.action, announce(strategy, own.value, rng)};
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (i != advisor) rec.forecasters.push_back(i);
  }

  elicit(rec, setup, agents, mode);
  decide(rec, setup, principal, mode);
  rec.advisor_payment = share * static_cast<double>(rec.outcome);
  return rec;
}

RoundRecord run_round_m2(const RoundSetup& setup, std::span<Agent> agents, std::size_t advisor,
                         double share, Principal& principal, Rng& rng, Mode mode,
                         AnnouncementStrategy strategy) {
  const auto world = sample_world(rng, setup.world, advisor_layout(agents.size()));
  return resolve_round_m2(world, setup, agents, advisor, share, principal, rng, mode, strategy);
}

WorldLayout peer_layout(std::size_t agents, PeerPair peers) {
  return WorldLayout{agents, false, std::make_pair(peers.first, peers.second)};
}

RoundRecord resolve_round_m3(const WorldState& world, const RoundSetup& setup,
                             std::span<Agent> agents, PeerPair peers,
                             std::pair<PeerHistory, PeerHistory>& histories, Principal& principal,
                             Rng& rng, Mode mode, AnnouncementStrategy first_strategy) {
  if (agents.size() < 3) throw ConfigError("m3: needs two peers and at least one forecaster");
  if (peers.first == peers.second) throw ConfigError("peers: indices must differ");
  if (peers.first >= agents.size() || peers.second >= agents.size()) {
    throw ConfigError(fmt::format("peers: index out of range for {} agents", agents.size()));
  }
  check_agents(world, agents);
  const auto& first = world.agent_signals[peers.first];
  const auto& second = world.agent_signals[peers.second];
  if (first.action != second.action) throw ConfigError("m3: peers must observe the same action");

  RoundRecord rec;
  rec.mechanism = Mechanism::m3;
  rec.world = world;
  rec.proxy_source = ProxySource::peer;
  rec.proxy_agent = peers.first;

  const int first_says = announce(first_strategy, first.value, rng);
  const int second_says = second.value;
  rec.peer_announcements = std::make_pair(first_says, second_says);
  rec.peer_scores = std::make_pair(
      dg_peer_score(first_says, second_says, histories.first, histories.second),
      dg_peer_score(second_says, first_says, histories.second, histories.first));
  rec.proxy = ProxyObservation{first.action, first_says};
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (i != peers.first && i != peers.second) rec.forecasters.push_back(i);
  }

  elicit(rec, setup, agents, mode);
  decide(rec, setup, principal, mode);
  if (mode == Mode::train) {
    histories.first.push(first_says);
    histories.second.push(second_says);
  }
  return rec;
}

RoundRecord run_round_m3(const RoundSetup& setup, std::span<Agent> agents, PeerPair peers,
                         std::pair<PeerHistory, PeerHistory>& histories, Principal& principal,
                         Rng& rng, Mode mode, AnnouncementStrategy first_strategy) {
  if (peers.first >= agents.size() || peers.second >= agents.size()) {
    throw ConfigError(fmt::format("peers: index out of range for {} agents", agents.size()));
  }
  const auto world = sample_world(rng, setup.world, peer_layout(agents.size(), peers));
  return resolve_round_m3(world, setup, agents, peers, histories, principal, rng, mode,
                          first_strategy);
}

std::vector<AdvisorCase> enumerate_advisor_deviation(const WorldConfig& cfg, std::size_t agents,
                                                     std::size_t advisor) {
  if (agents < 2 || advisor >= agents) throw ConfigError("advisor deviation: invalid agent layout");
  std::vector<AdvisorCase> cases;
  enumeration::for_each_configuration(
      agents, cfg.actions,
      [&](const std::vector<std::size_t>& assignment, const std::vector<int>& signals) {
        std::vector<enumeration::Evidence> evidence;
        std::vector<std::vector<int>> forecaster_signals(cfg.actions);
        for (std::size_t i = 0; i < agents; ++i) {
          evidence.push_back({assignment[i], signals[i]});
          if (i != advisor) forecaster_signals[assignment[i]].push_back(signals[i]);
        }

        double probability = 0.0;
        for (std::size_t bits = 0; bits < (std::size_t{1} << cfg.actions); ++bits) {
          std::vector<int> outcomes(cfg.actions);
          for (std::size_t a = 0; a < cfg.actions; ++a) outcomes[a] = static_cast<int>((bits >> a) & 1U);
          probability += enumeration::joint_probability(outcomes, evidence, cfg);
        }
        for (std::size_t i = 0; i < agents; ++i) probability /= static_cast<double>(cfg.actions);
        const Eigen::VectorXd truth = enumeration::posterior(evidence, cfg);

        auto success_with = [&](int announced) {
          auto grouped = forecaster_signals;
          grouped[assignment[advisor]].push_back(announced);
          const auto action = bayes_decision(grouped, cfg).action;
          return truth[static_cast<Eigen::Index>(action)];
        };
        cases.push_back(AdvisorCase{assignment, signals, probability, success_with(signals[advisor]),
                                    success_with(1 - signals[advisor])});
      });
  return cases;
}

PeerJoint peer_joint(const WorldConfig& cfg, AnnouncementStrategy own, AnnouncementStrategy peer) {
  const int own_coins = own == AnnouncementStrategy::random ? 2 : 1;
  const int peer_coins = peer == AnnouncementStrategy::random ? 2 : 1;
  PeerJoint joint;
  for (int outcome = 0; outcome <= 1; ++outcome) {
    const double p_outcome = outcome == 1 ? cfg.p_outcome : 1.0 - cfg.p_outcome;
    const double p_one = outcome == 1 ? cfg.likelihood_true : cfg.likelihood_false;
    for (int s_own = 0; s_own <= 1; ++s_own) {
      for (int s_peer = 0; s_peer <= 1; ++s_peer) {
        const double p_signals = (s_own == 1 ? p_one : 1.0 - p_one) * (s_peer == 1 ? p_one : 1.0 - p_one);
        for (int c_own = 0; c_own < own_coins; ++c_own) {
          for (int c_peer = 0; c_peer < peer_coins; ++c_peer) {
            const double w = p_outcome * p_signals / (own_coins * peer_coins);
            const int a = announce_with_coin(own, s_own, c_own);
            const int b = announce_with_coin(peer, s_peer, c_peer);
            if (a == b) joint.agree += w;
            if (a == 1) joint.own_one += w;
            if (b == 1) joint.peer_one += w;
            if (a == 1 && b == 1) joint.both_one += w;
            if (a == 0 && b == 0) joint.both_zero += w;
          }
        }
      }
    }
  }
  return joint;
}

double expected_peer_score(const WorldConfig& cfg, AnnouncementStrategy own,
                           AnnouncementStrategy peer, std::size_t history_length) {
  if (history_length == 0) return 0.0;
  const PeerJoint j = peer_joint(cfg, own, peer);
  const double n = static_cast<double>(history_length);
  // E[f_own f_peer] over n past rounds: same-round pairs are correlated through
  // the shared outcome, cross-round pairs are independent.
  const double both_one = j.both_one / n + (1.0 - 1.0 / n) * j.own_one * j.peer_one;
  const double both_zero =
      j.both_zero / n + (1.0 - 1.0 / n) * (1.0 - j.own_one) * (1.0 - j.peer_one);
  return j.agree - (both_one + both_zero);
}

}  // namespace proxy_market
