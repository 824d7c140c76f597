#include <doctest.h>

#include <cmath>
#include <vector>

#include "proxy_market/agents.hpp"
#include "proxy_market/bayes_oracle.hpp"
#include "proxy_market/errors.hpp"
#include "proxy_market/logit.hpp"
#include "proxy_market/scoring.hpp"

using namespace proxy_market;

namespace {

bool all_zero(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff() == 0.0; }

// E[f(X)] for X ~ N(mean, sigma^2), midpoint rule over +-8 sigma.
template <typename F>
double gaussian_expectation(double mean, double sigma, F f) {
  const int n = 4000;
  const double lo = -8.0, hi = 8.0, h = (hi - lo) / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = lo + (i + 0.5) * h;
    sum += f(mean + sigma * z) * std::exp(-0.5 * z * z);
  }
  return sum * h / std::sqrt(2.0 * M_PI);
}

}  // namespace

TEST_SUITE("agents") {
  TEST_CASE("context examples") {
    auto c = build_context(SignalEvidence{0, 1}, Eigen::Vector2d(0.5, 0.5));
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(6);
    expected[0] = 1.0;
    CHECK(c == expected);

    CHECK(all_zero(build_context(std::nullopt, Eigen::Vector2d(0.5, 0.5))));

    c = build_context(SignalEvidence{1, 0}, Eigen::Vector2d(2.0 / 3.0, 0.5));
    CHECK(c[2] == doctest::Approx(std::log(2.0)));
    CHECK(c[4] == 1.0);
    CHECK(c[0] + c[1] + c[3] + c[5] == 0.0);
  }

  TEST_CASE("context clamps extreme reports") {
    auto c = build_context(std::nullopt, Eigen::Vector2d(0.0, 1.0));
    CHECK(std::isfinite(c[2]));
    CHECK(c[2] == doctest::Approx(clamped_logit(kContextClamp)));
    CHECK(c[5] == doctest::Approx(-c[2]));
  }

  TEST_CASE("policy mean") {
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(6, 2);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(6);
    c[0] = 1.0;
    CHECK(all_zero(policy_mean(c, theta)));
    theta(0, 0) = 0.7;
    theta(0, 1) = -0.2;
    CHECK(policy_mean(c, theta) == Eigen::Vector2d(0.7, -0.2));
    CHECK_THROWS_AS((void)policy_mean(Eigen::VectorXd::Zero(5), theta), ConfigError);

    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
      auto th = random_policy(rng, 3, 2.0);
      Eigen::VectorXd ctx = random_policy(rng, 1, 5.0).col(0).head(3).replicate(3, 1);
      auto mu = policy_mean(ctx, th);
      for (int a = 0; a < 3; ++a) {
        double dot = 0.0;
        for (int r = 0; r < 9; ++r) dot += ctx[r] * th(r, a);
        CHECK(std::abs(mu[a] - dot) < 1e-12);
      }
    }
  }

  TEST_CASE("random policy stays in range") {
    Rng rng(4);
    auto th = random_policy(rng, 2, 0.1);
    CHECK(th.rows() == 6);
    CHECK(th.cwiseAbs().maxCoeff() <= 0.1);
  }

  TEST_CASE("sample_report") {
    Rng rng(5);
    Eigen::Vector2d mean(0.4, -1.2);
    auto exact = sample_report(rng, mean, 0.0);
    CHECK(exact.log_odds == mean);
    CHECK(exact.probs[0] == doctest::Approx(logistic(0.4)));
    CHECK(sample_report(rng, Eigen::Vector2d::Zero(), 0.0).probs[0] == 0.5);

    const int n = 100'000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = sample_report(rng, Eigen::VectorXd::Zero(1), 1.0).log_odds[0];
      sum += x;
      sq += x * x;
    }
    const double m = sum / n;
    CHECK(std::abs(m) < 0.02);
    CHECK(std::abs(sq / n - m * m - 1.0) < 0.05);
  }

  TEST_CASE("gradient examples") {
    Experience e;
    e.context = Eigen::VectorXd::Zero(6);
    e.context[0] = 1.0;
    e.mean = Eigen::Vector2d(0.1, 0.2);
    e.sample = Eigen::Vector2d(0.6, -0.3);
    e.reward = 2.5;
    CHECK(all_zero(agent_gradient(e, 2.5, 1.0)));
    Experience same = e;
    same.sample = same.mean;
    CHECK(all_zero(agent_gradient(same, 0.0, 1.0)));

    auto g = agent_gradient(e, 0.5, 1.0);
    CHECK(g(0, 0) == doctest::Approx(1.0));
    CHECK(g(0, 1) == doctest::Approx(-1.0));
    CHECK(g.bottomRows(5).cwiseAbs().maxCoeff() == 0.0);

    PolicyMatrix acc = PolicyMatrix::Zero(6, 2);
    e.baseline = 0.5;
    accumulate_agent_gradient(e, 1.0, acc);
    CHECK(acc.isApprox(g));
  }

  TEST_CASE("update_policy") {
    Rng rng(6);
    auto theta = random_policy(rng, 2, 1.0);
    auto g = random_policy(rng, 2, 1.0);
    std::vector<PolicyMatrix> zero{PolicyMatrix::Zero(6, 2)};
    CHECK(update_policy(theta, zero, 0.5) == theta);
    std::vector<PolicyMatrix> single{g};
    CHECK(update_policy(theta, single, 1.0).isApprox(theta + g));
    std::vector<PolicyMatrix> cancel{g, -g};
    CHECK(update_policy(theta, cancel, 1.0).isApprox(theta));
    CHECK_THROWS_AS((void)update_policy(theta, std::vector<PolicyMatrix>{}, 1.0), ConfigError);
  }

  TEST_CASE("replay buffer") {
    ReplayBuffer<int> buf(3);
    Rng rng(7);
    std::vector<std::size_t> idx;
    CHECK_THROWS_AS(buf.sample_indices(rng, 1, idx), UsageError);
    for (int i = 0; i < 5; ++i) buf.push(i);
    CHECK(buf.size() == 3);
    CHECK(buf.capacity() == 3);
    std::vector<int> held{buf[0], buf[1], buf[2]};
    std::sort(held.begin(), held.end());
    CHECK(held == std::vector<int>{2, 3, 4});

    std::vector<long> hits(3, 0);
    for (int i = 0; i < 30'000; ++i) {
      buf.sample_indices(rng, 3, idx);
      for (auto j : idx) ++hits[j];
    }
    for (auto h : hits) CHECK(std::abs(h / 90'000.0 - 1.0 / 3.0) < 0.01);
    CHECK_THROWS_AS(buf.sample_indices(rng, 4, idx), UsageError);
  }

  TEST_CASE("baseline validation and tracking") {
    CHECK_THROWS_AS(Baseline(0.0), ConfigError);
    CHECK_THROWS_AS(Baseline(1.5), ConfigError);
    Baseline b(0.01);
    CHECK(b.value() == 0.0);
    for (int i = 0; i < 10'000; ++i) b.observe(0.37);
    CHECK(std::abs(b.value() - 0.37) < 1e-3);
  }

  TEST_CASE("eval mode with zero policy reports even odds") {
    LearnerParams p;
    Agent agent(2, p, 0.3, 11);
    agent.set_theta(PolicyMatrix::Zero(6, 2));
    auto r = agent.act(SignalEvidence{0, 1}, Eigen::Vector2d(0.5, 0.5), Mode::eval);
    CHECK(r.probs == Eigen::Vector2d(0.5, 0.5));
    CHECK_THROWS_AS(agent.learn(0.0), UsageError);
  }

  TEST_CASE("train mode draws differ but the mean does not") {
    Agent agent(2, LearnerParams{}, 0.3, 12);
    auto a = agent.act(SignalEvidence{0, 1}, Eigen::Vector2d(0.5, 0.5), Mode::train);
    agent.learn(0.0);
    auto b = agent.act(SignalEvidence{0, 1}, Eigen::Vector2d(0.5, 0.5), Mode::train);
    CHECK(a.mean == b.mean);
    CHECK(a.log_odds != b.log_odds);
  }

  TEST_CASE("warm-up leaves the policy untouched") {
    LearnerParams p;
    p.batch_size = 8;
    Agent agent(2, p, 0.3, 13);
    const auto theta = agent.theta();
    for (std::size_t i = 0; i < 7; ++i) {
      (void)agent.act(SignalEvidence{0, 1}, Eigen::Vector2d(0.5, 0.5), Mode::train);
      agent.learn(1.0);
      CHECK(agent.buffer_size() == i + 1);
      CHECK(agent.theta() == theta);
    }
    (void)agent.act(SignalEvidence{0, 1}, Eigen::Vector2d(0.5, 0.5), Mode::train);
    agent.learn(1.0);
    CHECK(agent.theta() != theta);
  }

  TEST_CASE("constant reward: baseline converges and updates vanish") {
    LearnerParams p;
    p.batch_size = 4;
    p.buffer_capacity = 16;
    Agent agent(2, p, 0.3, 14);
    for (int i = 0; i < 10'000; ++i) {
      (void)agent.act(SignalEvidence{1, 0}, Eigen::Vector2d(0.4, 0.6), Mode::train);
      agent.learn(-0.8);
    }
    CHECK(std::abs(agent.baseline() + 0.8) < 1e-3);
    const auto before = agent.theta();
    for (int i = 0; i < 100; ++i) {
      (void)agent.act(SignalEvidence{1, 0}, Eigen::Vector2d(0.4, 0.6), Mode::train);
      agent.learn(-0.8);
    }
    CHECK((agent.theta() - before).cwiseAbs().maxCoeff() < 1e-4);
  }

  TEST_CASE("capacity-1 batch-1 learning is plain REINFORCE") {
    LearnerParams p;
    p.batch_size = 1;
    p.buffer_capacity = 1;
    p.alpha = 0.05;
    p.baseline_rho = 0.1;
    Agent agent(2, p, 0.3, 15);
    Rng rng(16);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int step = 0; step < 50; ++step) {
      const auto theta = agent.theta();
      const double baseline = agent.baseline();
      auto r = agent.act(SignalEvidence{0, step % 2}, Eigen::Vector2d(0.3, 0.8), Mode::train);
      const double reward = u(rng);
      agent.learn(reward);
      Experience e{build_context(SignalEvidence{0, step % 2}, Eigen::Vector2d(0.3, 0.8)), r.mean,
                   r.log_odds, reward, baseline};
      CHECK(agent.theta().isApprox(theta + p.alpha * agent_gradient(e, baseline, 0.3)));
    }
  }

  TEST_CASE("gradient estimator is unbiased") {
    // E[R] for R(X) = s(logistic(X_0), d) - c, differentiated in mu by quadrature.
    const double sigma = 0.5, c = 0.1;
    const Eigen::Vector2d mu(0.3, -0.4);
    for (auto rule : {ScoringRule::brier, ScoringRule::log}) {
      for (int d : {0, 1}) {
        auto reward = [&](double x0) { return score(rule, Probability(logistic(x0)), d) - c; };
        const double h = 1e-4;
        const double fd =
            (gaussian_expectation(mu[0] + h, sigma, reward) - gaussian_expectation(mu[0] - h, sigma, reward)) /
            (2.0 * h);

        Rng rng(static_cast<std::uint64_t>(17 + d));
        Experience e;
        e.context = Eigen::VectorXd::Zero(6);
        e.context[0] = 1.0;
        e.mean = mu;
        const double baseline = gaussian_expectation(mu[0], sigma, reward);
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(6, 2);
        const int n = 100'000;
        for (int i = 0; i < n; ++i) {
          auto r = sample_report(rng, mu, sigma);
          e.sample = r.log_odds;
          e.reward = reward(r.log_odds[0]);
          acc += agent_gradient(e, baseline, sigma);
        }
        acc /= n;
        CAPTURE(fd);
        CAPTURE(acc(0, 0));
        REQUIRE(std::abs(fd) > 0.01);
        CHECK(std::abs(acc(0, 0) - fd) < 0.05 * std::abs(fd));
        CHECK(std::abs(acc(0, 1)) < 0.02);  // R does not depend on X_1
      }
    }
  }

  TEST_CASE("posterior policy reports the oracle forecast for one agent") {
    WorldConfig w;
    Agent agent(2, LearnerParams{}, 0.3, 18);
    agent.set_theta(posterior_policy(w));
    auto r = agent.act(SignalEvidence{0, 1}, Eigen::Vector2d(0.5, 0.5), Mode::eval);
    CHECK(r.probs[0] == doctest::Approx(2.0 / 3.0));
    CHECK(r.probs[1] == doctest::Approx(0.5));
    CHECK_THROWS_AS(agent.set_theta(PolicyMatrix::Zero(5, 2)), ConfigError);
  }

  TEST_CASE("learner parameters are validated") {
    LearnerParams p;
    CHECK_NOTHROW(p.validate("agent"));
    p.batch_size = 0;
    CHECK_THROWS_AS(p.validate("agent"), ConfigError);
    p = {};
    p.batch_size = p.buffer_capacity + 1;
    CHECK_THROWS_AS(p.validate("agent"), ConfigError);
    p = {};
    p.alpha = -1.0;
    CHECK_THROWS_AS(p.validate("agent"), ConfigError);
  }
}
