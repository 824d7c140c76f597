#include "proxy_market/oracle_suite.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <fmt/core.h>

#include "proxy_market/bayes_oracle.hpp"
#include "proxy_market/enumeration.hpp"
#include "proxy_market/mechanisms.hpp"

namespace proxy_market {

CheckResult check_scoring_propriety(ScoringRule rule) {
  CheckResult result{fmt::format("propriety[{}]", to_string(rule)), true, false, ""};
  std::size_t failures = 0;
  for (int i = 0; i <= 100; ++i) {
    const double p = i / 100.0;
    auto expected = [&](int j) {
      const Probability r(j / 100.0);
      return p * score(rule, r, 1) + (1.0 - p) * score(rule, r, 0);
    };
    const double truthful = expected(i);
    for (int j = 0; j <= 100; ++j) {
      if (j != i && !(expected(j) < truthful)) {
        ++failures;
        break;
      }
    }
  }
  result.passed = failures == 0;
  result.detail = fmt::format("101 grid points, {} without a unique truthful maximum", failures);
  return result;
}

namespace {

WorldState world_from(const std::vector<std::size_t>& assignment, const std::vector<int>& signals,
                      std::size_t agents, std::size_t actions) {
  WorldState world;
  world.outcomes.assign(actions, 0);
  for (std::size_t i = 0; i < agents; ++i) world.agent_signals.push_back({i, assignment[i], signals[i]});
  world.principal_signal = ProxyObservation{assignment[agents], signals[agents]};
  return world;
}

}  // namespace

CheckResult check_oracle_enumeration(const WorldConfig& cfg) {
  CheckResult result{"oracle-enumeration", true, false, ""};
  if (cfg.actions != 2) {
    result.skipped = true;
    result.detail = fmt::format("exhaustive branch needs k = 2 (configured k = {})", cfg.actions);
    return result;
  }
  constexpr double kTol = 1e-12;
  std::size_t configs = 0;
  std::size_t failures = 0;
  double worst = 0.0;

  auto check = [&](std::size_t agents, const std::vector<std::size_t>& assignment,
                   const std::vector<int>& signals) {
    ++configs;
    const WorldState world = world_from(assignment, signals, agents, cfg.actions);
    std::vector<enumeration::Evidence> agent_evidence;
    for (const auto& s : world.agent_signals) agent_evidence.push_back({s.action, s.value});
    auto all_evidence = agent_evidence;
    all_evidence.push_back({world.principal_signal->action, world.principal_signal->value});

    const auto ideal = ideal_report(world, cfg);
    const Eigen::VectorXd brute_q = enumeration::posterior(agent_evidence, cfg);
    const Eigen::VectorXd brute_f = enumeration::proxy_forecast(agent_evidence, cfg);
    const auto decision = bayes_decision(world, cfg);
    const Eigen::VectorXd brute_q_all = enumeration::posterior(all_evidence, cfg);

    const double err = std::max({(ideal.posterior - brute_q).cwiseAbs().maxCoeff(),
                                 (ideal.forecast - brute_f).cwiseAbs().maxCoeff(),
                                 (decision.posterior - brute_q_all).cwiseAbs().maxCoeff()});
    worst = std::max(worst, err);
    const bool same_action = decision.action == enumeration::argmax_with_tolerance(brute_q_all, kTol);
    if (err > kTol || !same_action) ++failures;
  };

  for (std::size_t agents = 1; agents <= 3; ++agents) {
    const std::size_t slots = agents + 1;
    enumeration::for_each_configuration(
        slots, cfg.actions, [&](const auto& assignment, const auto& signals) {
          check(agents, assignment, signals);
        });
    WorldConfig rr = cfg;
    rr.assignment = AssignmentPolicy::round_robin;
    Rng unused(0);
    const auto fixed = assign_actions(unused, rr, slots);
    for (std::size_t bits = 0; bits < (std::size_t{1} << slots); ++bits) {
      std::vector<int> signals(slots);
      for (std::size_t i = 0; i < slots; ++i) signals[i] = static_cast<int>((bits >> i) & 1U);
      check(agents, fixed, signals);
    }
  }
  result.passed = failures == 0;
  result.detail = fmt::format("{} configurations, {} mismatches, max abs deviation {:.3g}", configs,
                              failures, worst);
  return result;
}

CheckResult check_advisor_deviation(const WorldConfig& cfg, std::size_t agents) {
  CheckResult result{"advisor-deviation", true, false, ""};
  if (cfg.actions != 2) {
    result.skipped = true;
    result.detail = fmt::format("exhaustive branch needs k = 2 (configured k = {})", cfg.actions);
    return result;
  }
  const auto cases = enumerate_advisor_deviation(cfg, agents, agents - 1);
  std::size_t worse = 0;
  std::size_t strictly_better = 0;
  double expected_truthful = 0.0;
  double expected_flipped = 0.0;
  for (const auto& c : cases) {
    if (c.truthful_success < c.deviating_success - 1e-12) ++worse;
    if (c.truthful_success > c.deviating_success + 1e-12) ++strictly_better;
    expected_truthful += c.probability * c.truthful_success;
    expected_flipped += c.probability * c.deviating_success;
  }
  result.passed = worse == 0 && strictly_better > 0;
  result.detail = fmt::format(
      "{} configurations: truthful worse in {}, strictly better in {}; E[success] {:.6f} vs {:.6f}",
      cases.size(), worse, strictly_better, expected_truthful, expected_flipped);
  return result;
}

CheckResult check_peer_strategies(const WorldConfig& cfg, std::size_t window) {
  CheckResult result{"peer-strategies", true, false, ""};
  using S = AnnouncementStrategy;
  const double truthful = expected_peer_score(cfg, S::truthful, S::truthful, window);
  result.passed = truthful > 0.0;
  result.detail = fmt::format("truthful {:.6f}", truthful);
  for (auto deviation : {S::always_one, S::always_zero, S::random, S::flip}) {
    const double v = expected_peer_score(cfg, deviation, S::truthful, window);
    result.passed = result.passed && truthful > v;
    result.detail += fmt::format(", {} {:.6f}", to_string(deviation), v);
  }
  return result;
}

CheckResult check_peer_monte_carlo(const WorldConfig& cfg, std::size_t window, std::size_t rounds,
                                   std::uint64_t seed) {
  CheckResult result{"peer-monte-carlo", true, false, ""};
  WorldConfig world = cfg;
  world.agents = 3;
  world.validate();
  RoundSetup setup{world, ScoringRule::brier, even_odds(world.actions)};
  const LearnerParams params;
  std::vector<Agent> agents;
  for (std::size_t i = 0; i < world.agents; ++i) {
    agents.emplace_back(world.actions, params, 0.3, derive_seed(seed, 16 + i));
  }
  Principal principal(world.actions, params, derive_seed(seed, 2));
  std::pair<PeerHistory, PeerHistory> histories{PeerHistory(window), PeerHistory(window)};
  Rng rng(derive_seed(seed, 0));

  const std::size_t batches = 100;
  const std::size_t per_batch = std::max<std::size_t>(1, rounds / batches);
  std::vector<double> batch_means;
  double total = 0.0;
  double expected = 0.0;
  double batch_sum = 0.0;
  for (std::size_t t = 0; t < per_batch * batches; ++t) {
    const auto rec = run_round_m3(setup, agents, PeerPair{0, 1}, histories, principal, rng, Mode::train);
    const double s = rec.peer_scores->first;
    total += s;
    batch_sum += s;
    expected += expected_peer_score(world, AnnouncementStrategy::truthful,
                                    AnnouncementStrategy::truthful, std::min(t, window));
    if ((t + 1) % per_batch == 0) {
      batch_means.push_back(batch_sum / static_cast<double>(per_batch));
      batch_sum = 0.0;
    }
  }
  const double n = static_cast<double>(per_batch * batches);
  const double mean = total / n;
  expected /= n;
  double var = 0.0;
  const double bm_mean = mean;
  for (double b : batch_means) var += (b - bm_mean) * (b - bm_mean);
  var /= static_cast<double>(batch_means.size() - 1);
  const double se = std::sqrt(var / static_cast<double>(batch_means.size()));
  result.passed = mean > 0.0 && std::abs(mean - expected) <= 3.0 * se;
  result.detail = fmt::format("{} rounds: mean {:.6f}, exact {:.6f}, SE {:.6f} ({:.2f} SE)",
                              per_batch * batches, mean, expected, se,
                              se > 0 ? std::abs(mean - expected) / se : 0.0);
  return result;
}

CheckResult check_forecast_monte_carlo(const WorldConfig& cfg, std::size_t rounds, std::uint64_t seed) {
  CheckResult result{"forecast-monte-carlo", true, false, ""};
  Rng rng(seed);
  // (ones, zeros) seen by agents on the principal's action -> (count, principal ones)
  std::map<std::pair<int, int>, std::pair<std::size_t, std::size_t>> buckets;
  for (std::size_t t = 0; t < rounds; ++t) {
    const auto world = sample_world(rng, cfg);
    const auto proxy = *world.principal_signal;
    int ones = 0;
    int zeros = 0;
    for (const auto& s : world.agent_signals) {
      if (s.action == proxy.action) (s.value == 1 ? ones : zeros) += 1;
    }
    auto& b = buckets[{ones, zeros}];
    ++b.first;
    b.second += static_cast<std::size_t>(proxy.value);
  }
  std::size_t checked = 0;
  double worst = 0.0;
  for (const auto& [key, counts] : buckets) {
    if (counts.first < 500) continue;
    std::vector<int> signals(static_cast<std::size_t>(key.first), 1);
    signals.insert(signals.end(), static_cast<std::size_t>(key.second), 0);
    const double f = ideal_proxy_forecast(posterior_outcome(signals, Probability(cfg.p_outcome), cfg), cfg);
    const double freq = static_cast<double>(counts.second) / static_cast<double>(counts.first);
    const double se = std::sqrt(f * (1.0 - f) / static_cast<double>(counts.first));
    worst = std::max(worst, std::abs(freq - f) / se);
    ++checked;
  }
  result.passed = checked > 0 && worst <= 4.0;
  result.detail = fmt::format("{} rounds, {} evidence buckets, worst deviation {:.2f} SE", rounds,
                              checked, worst);
  return result;
}

std::vector<CheckResult> eval_oracle(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  std::vector<CheckResult> results;
  results.push_back(check_scoring_propriety(ScoringRule::brier));
  results.push_back(check_scoring_propriety(ScoringRule::log));
  if (cfg.world.actions != 2) {
    out << fmt::format("notice: exhaustive enumeration skipped (requires k = 2, configured k = {})\n",
                       cfg.world.actions);
  }
  results.push_back(check_oracle_enumeration(cfg.world));
  results.push_back(check_advisor_deviation(cfg.world));
  results.push_back(check_peer_strategies(cfg.world, cfg.peer_window));
  results.push_back(check_peer_monte_carlo(cfg.world, cfg.peer_window, 100'000, cfg.seed));
  results.push_back(check_forecast_monte_carlo(cfg.world, 200'000, cfg.seed));
  for (const auto& r : results) {
    out << fmt::format("{} {}: {}\n", r.skipped ? "SKIP" : (r.passed ? "PASS" : "FAIL"), r.name, r.detail);
  }
  return results;
}

}  // namespace proxy_market
