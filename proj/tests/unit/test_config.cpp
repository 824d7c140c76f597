#include <doctest.h>

#include <filesystem>
#include <string>

#include "proxy_market/config.hpp"
#include "proxy_market/errors.hpp"
#include "proxy_market/rng.hpp"

using namespace proxy_market;

TEST_SUITE("config") {
  TEST_CASE("empty object gives the defaults") {
    const auto cfg = parse_config("{}");
    CHECK(cfg == RunConfig{});
    CHECK(cfg.mechanism == Mechanism::m1);
    CHECK(cfg.world.actions == 2);
    CHECK(cfg.world.agents == 3);
    CHECK(cfg.steps == 2'000'000);
    CHECK(cfg.sigma == 0.1);
    CHECK(cfg.agent.alpha == 0.004);
    CHECK(cfg.principal().alpha == kPrincipalAlpha);
    CHECK(cfg.principal().batch_size == cfg.agent.batch_size);
    CHECK(cfg.principal().baseline_rho == cfg.agent.baseline_rho);
    CHECK(cfg.resolved_eval_window() == 10'000);
    CHECK(cfg.resolved_advisor() == 2);
    CHECK(cfg.resolved_prior() == Eigen::Vector2d(0.5, 0.5));
  }

  TEST_CASE("uninformative likelihoods are rejected") {
    try {
      (void)parse_config(R"({"world": {"likelihood_true": 0.2, "likelihood_false": 0.6}})");
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("likelihood") != std::string::npos);
    }
  }

  TEST_CASE("malformed JSON names the line") {
    try {
      (void)parse_config("{\n  \"steps\": 10,\n  \"seed\": ,\n}", "bad.json");
      FAIL("expected a ParseError");
    } catch (const ParseError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("bad.json:3") != std::string::npos);
      CHECK(msg.find("\"seed\"") != std::string::npos);
    }
  }

  TEST_CASE("field errors") {
    CHECK_THROWS_AS((void)parse_config(R"({"stepz": 10})"), ConfigError);
    CHECK_THROWS_AS((void)parse_config(R"({"world": {"agentz": 3}})"), ConfigError);
    CHECK_THROWS_AS((void)parse_config(R"({"steps": -4})"), ConfigError);
    CHECK_THROWS_AS((void)parse_config(R"({"steps": "many"})"), ConfigError);
    CHECK_THROWS_AS((void)parse_config(R"({"world": {"agents": 0}})"), ConfigError);
    CHECK_THROWS_AS((void)parse_config(R"({"mechanism": "m9"})"), ConfigError);
    CHECK_THROWS_AS((void)parse_config(R"({"mechanism": "m2", "advisor_index": 3})"), ConfigError);
    CHECK_THROWS_AS((void)parse_config(R"({"mechanism": "m3", "world": {"agents": 2}})"), ConfigError);
    CHECK_THROWS_AS((void)parse_config(R"({"prior": [0.5]})"), ConfigError);
    CHECK_THROWS_AS((void)parse_config(R"({"steps": 100, "eval_window": 500})"), ConfigError);
    CHECK_THROWS_AS((void)parse_config(R"({"principal_alpha": 0})"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[]"), ConfigError);
  }

  TEST_CASE("principal overrides fall back per field") {
    auto cfg = parse_config(R"({"alpha": 0.02, "principal_batch_size": 16})");
    CHECK(cfg.principal().alpha == kPrincipalAlpha);
    cfg = parse_config(R"({"principal_alpha": 0.02, "principal_batch_size": 16})");
    CHECK(cfg.principal().alpha == 0.02);
    CHECK(cfg.principal().batch_size == 16);
    CHECK(cfg.agent.batch_size == 64);
  }

  TEST_CASE("short runs shrink the default eval window") {
    CHECK(parse_config(R"({"steps": 300})").resolved_eval_window() == 300);
  }

  TEST_CASE("round trip on randomized configs") {
    Rng rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 300; ++t) {
      RunConfig cfg;
      cfg.mechanism = static_cast<Mechanism>(t % 3);
      cfg.steps = 1 + rng() % 100'000;
      cfg.replicates = 1 + rng() % 4;
      cfg.seed = rng();
      cfg.world.actions = 2 + rng() % 3;
      cfg.world.agents = 3 + rng() % 4;
      cfg.world.p_outcome = 0.05 + 0.9 * u(rng);
      cfg.world.likelihood_false = 0.5 * u(rng);
      cfg.world.likelihood_true = cfg.world.likelihood_false + 0.01 + 0.45 * u(rng);
      cfg.world.assignment = t % 2 ? AssignmentPolicy::round_robin : AssignmentPolicy::uniform_random;
      cfg.agent.alpha = 0.001 + u(rng);
      cfg.agent.buffer_capacity = 64 + rng() % 1000;
      cfg.agent.batch_size = 1 + rng() % 64;
      cfg.sigma = 0.05 + u(rng);
      if (t % 4 == 0) cfg.principal_overrides.alpha = 0.5 * u(rng) + 0.001;
      if (t % 5 == 0) cfg.principal_overrides.batch_size = 8;
      if (t % 3 == 1) cfg.advisor_index = rng() % cfg.world.agents;
      cfg.advisor_share = u(rng);
      cfg.peer_window = 1 + rng() % 100;
      cfg.peer_strategy = static_cast<AnnouncementStrategy>(t % 5);
      cfg.peers = PeerPair{1, 2};
      cfg.scoring_rule = t % 2 ? ScoringRule::log : ScoringRule::brier;
      if (t % 7 == 0) cfg.prior = std::vector<double>(cfg.world.actions, 0.3);
      cfg.eval_interval = 1 + rng() % 5000;
      if (t % 2 == 0) cfg.eval_window = 1 + rng() % cfg.steps;
      cfg.eval_rounds = 1 + rng() % 100;
      cfg.output_dir = "out_" + std::to_string(t);
      REQUIRE_NOTHROW(cfg.validate());
      const auto text = to_json(cfg).dump(2);
      CAPTURE(text);
      CHECK(parse_config(text) == cfg);
    }
  }

  TEST_CASE("unset optionals stay out of the dump") {
    const auto j = to_json(RunConfig{});
    CHECK_FALSE(j.contains("advisor_index"));
    CHECK_FALSE(j.contains("eval_window"));
    CHECK_FALSE(j.contains("principal_alpha"));
  }

  TEST_CASE("missing files raise an I/O error") {
    CHECK_THROWS_AS((void)load_config("/nonexistent/dir/cfg.json"), IoError);
  }
}
