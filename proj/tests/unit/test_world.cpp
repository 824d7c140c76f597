#include <doctest.h>

#include <array>
#include <cmath>

#include "proxy_market/errors.hpp"
#include "proxy_market/world.hpp"

using namespace proxy_market;

TEST_SUITE("world") {
  TEST_CASE("degenerate outcome priors") {
    Rng rng(1);
    WorldConfig cfg;
    cfg.actions = 4;
    cfg.p_outcome = 1.0;
    for (int v : sample_outcomes(rng, cfg)) CHECK(v == 1);
    cfg.p_outcome = 0.0;
    for (int v : sample_outcomes(rng, cfg)) CHECK(v == 0);
  }

  TEST_CASE("outcome frequency") {
    Rng rng(2);
    WorldConfig cfg;
    long ones = 0;
    const int n = 100'000;
    for (int i = 0; i < n; ++i) ones += sample_outcomes(rng, cfg)[0];
    CHECK(std::abs(ones / double(n) - 0.5) < 0.01);
  }

  TEST_CASE("signal frequencies") {
    Rng rng(3);
    WorldConfig cfg;
    const int n = 100'000;
    long given_one = 0, given_zero = 0;
    for (int i = 0; i < n; ++i) {
      given_one += sample_signal(rng, 1, cfg);
      given_zero += sample_signal(rng, 0, cfg);
    }
    CHECK(std::abs(given_one / double(n) - 2.0 / 3.0) < 0.01);
    CHECK(std::abs(given_zero / double(n) - 1.0 / 3.0) < 0.01);
    cfg.likelihood_true = 1.0;
    for (int i = 0; i < 1000; ++i) CHECK(sample_signal(rng, 1, cfg) == 1);
  }

  TEST_CASE("round-robin assignment") {
    Rng rng(4);
    WorldConfig cfg;
    cfg.agents = 2;
    cfg.assignment = AssignmentPolicy::round_robin;
    CHECK(assign_actions(rng, cfg, 3) == std::vector<std::size_t>{0, 1, 0});
    cfg.actions = 1;
    for (auto a : assign_actions(rng, cfg, 5)) CHECK(a == 0);
  }

  TEST_CASE("uniform assignment frequency per slot") {
    Rng rng(5);
    WorldConfig cfg;
    const int n = 100'000;
    std::array<long, 4> zeros{};
    for (int i = 0; i < n; ++i) {
      auto a = assign_actions(rng, cfg, 4);
      for (std::size_t s = 0; s < 4; ++s) zeros[s] += a[s] == 0;
    }
    for (auto z : zeros) CHECK(std::abs(z / double(n) - 0.5) < 0.01);
  }

  TEST_CASE("validation") {
    WorldConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.likelihood_false = cfg.likelihood_true;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.actions = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.agents = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.p_outcome = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.likelihood_true = 1.2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  TEST_CASE("sampled world shape") {
    Rng rng(6);
    WorldConfig cfg;
    cfg.actions = 3;
    cfg.agents = 5;
    for (int i = 0; i < 100; ++i) {
      auto w = sample_world(rng, cfg);
      CHECK(w.outcomes.size() == 3);
      REQUIRE(w.principal_signal.has_value());
      CHECK(w.principal_signal->action < 3);
      REQUIRE(w.agent_signals.size() == 5);
      for (std::size_t j = 0; j < 5; ++j) {
        CHECK(w.agent_signals[j].agent == j);
        CHECK(w.agent_signals[j].action < 3);
        CHECK((w.agent_signals[j].value == 0 || w.agent_signals[j].value == 1));
      }
    }
  }

  TEST_CASE("principal signal conditional frequency") {
    Rng rng(7);
    WorldConfig cfg;
    long hits = 0, total = 0;
    for (int i = 0; i < 100'000; ++i) {
      auto w = sample_world(rng, cfg);
      if (w.outcomes[w.principal_signal->action] == 1) {
        ++total;
        hits += w.principal_signal->value;
      }
    }
    CHECK(std::abs(hits / double(total) - 2.0 / 3.0) < 0.01);
  }

  TEST_CASE("agents on the same action agree at 5/9 given a good action") {
    Rng rng(8);
    WorldConfig cfg;
    cfg.agents = 2;
    long agree = 0, total = 0;
    for (int i = 0; i < 200'000; ++i) {
      auto w = sample_world(rng, cfg);
      const auto& a = w.agent_signals[0];
      const auto& b = w.agent_signals[1];
      if (a.action != b.action || w.outcomes[a.action] != 1) continue;
      ++total;
      agree += a.value == b.value;
    }
    CHECK(total > 40'000);
    CHECK(std::abs(agree / double(total) - 5.0 / 9.0) < 0.01);
  }

  TEST_CASE("same seed gives the same world stream") {
    WorldConfig cfg;
    Rng a(99), b(99);
    for (int i = 0; i < 1000; ++i) CHECK(sample_world(a, cfg) == sample_world(b, cfg));
  }

  TEST_CASE("layout without principal signal and with a shared action") {
    Rng rng(10);
    WorldConfig cfg;
    cfg.actions = 5;
    WorldLayout layout{4, false, std::pair<std::size_t, std::size_t>{1, 3}};
    for (int i = 0; i < 500; ++i) {
      auto w = sample_world(rng, cfg, layout);
      CHECK_FALSE(w.principal_signal.has_value());
      CHECK(w.agent_signals.size() == 4);
      CHECK(w.agent_signals[1].action == w.agent_signals[3].action);
    }
  }

  TEST_CASE("stationary signal statistics across the stream") {
    // Chi-square on (assigned action, signal) cells in early vs late draws.
    Rng rng(11);
    WorldConfig cfg;
    std::array<std::array<double, 4>, 2> counts{};
    for (int half = 0; half < 2; ++half) {
      for (int i = 0; i < 50'000; ++i) {
        auto w = sample_world(rng, cfg);
        const auto& s = w.agent_signals[0];
        counts[half][s.action * 2 + s.value] += 1;
      }
    }
    double chi = 0.0;
    for (int c = 0; c < 4; ++c) {
      double total = counts[0][c] + counts[1][c];
      for (int h = 0; h < 2; ++h) {
        double e = total / 2.0;
        chi += (counts[h][c] - e) * (counts[h][c] - e) / e;
      }
    }
    CHECK(chi < 16.27);  // chi-square(3) at p = 0.001
  }

  TEST_CASE("assignment policy names") {
    CHECK(parse_assignment_policy("round_robin") == AssignmentPolicy::round_robin);
    CHECK(parse_assignment_policy(to_string(AssignmentPolicy::uniform_random)) ==
          AssignmentPolicy::uniform_random);
    CHECK_THROWS_AS((void)parse_assignment_policy("shuffle"), ConfigError);
  }
}
