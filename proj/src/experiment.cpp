#include "proxy_market/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include <fmt/core.h>

#include "proxy_market/errors.hpp"

namespace proxy_market {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Sub-stream ids within a replicate seed.
constexpr std::uint64_t kWorldStream = 0;
constexpr std::uint64_t kEvalStream = 1;
constexpr std::uint64_t kPrincipalStream = 2;
constexpr std::uint64_t kAgentStreamBase = 16;

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

double mean_of(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  if (end <= begin) return 0.0;
  return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(begin),
                         v.begin() + static_cast<std::ptrdiff_t>(end), 0.0) /
         static_cast<double>(end - begin);
}

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
  const auto probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw IoError(fmt::format("output directory {} is not writable", dir.string()));
  }
  fs::remove(probe, ec);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  return out;
}

}  // namespace

std::string format_metrics_row(const MetricsRow& row) {
  return fmt::format("{},{:.12g},{},{},{:.12g},{:.12g},{:.12g}", row.step, row.er,
                     row.decision_success, row.bayes_success, row.decision_success_ma,
                     row.bayes_success_ma, row.mean_agent_score);
}

void MovingAverage::push(int value) {
  values_.push_back(value);
  sum_ += value;
  if (values_.size() > window_) {
    sum_ -= values_.front();
    values_.pop_front();
  }
}

double MovingAverage::value() const {
  return values_.empty() ? 0.0 : static_cast<double>(sum_) / static_cast<double>(values_.size());
}

bool agrees_with_bayes(const RoundRecord& record, std::size_t action) {
  const auto& q = record.oracle.bayes.posterior;
  return q[static_cast<Eigen::Index>(action)] >= q.maxCoeff() - kTieTolerance;
}

Simulation::Simulation(const RunConfig& cfg, std::uint64_t replicate_seed)
    : cfg_(cfg),
      setup_{cfg.world, cfg.scoring_rule, cfg.resolved_prior()},
      principal_(cfg.world.actions, cfg.principal(), derive_seed(replicate_seed, kPrincipalStream)),
      world_rng_(derive_seed(replicate_seed, kWorldStream)),
      eval_rng_(derive_seed(replicate_seed, kEvalStream)),
      histories_{PeerHistory(cfg.peer_window), PeerHistory(cfg.peer_window)} {
  cfg_.validate();
  agents_.reserve(cfg.world.agents);
  for (std::size_t i = 0; i < cfg.world.agents; ++i) {
    agents_.emplace_back(cfg.world.actions, cfg.agent, cfg.sigma,
                         derive_seed(replicate_seed, kAgentStreamBase + i));
  }
}

RoundRecord Simulation::play(Rng& rng, Mode mode) {
  switch (cfg_.mechanism) {
    case Mechanism::m1:
      return run_round_m1(setup_, agents_, principal_, rng, mode);
    case Mechanism::m2:
      return run_round_m2(setup_, agents_, cfg_.resolved_advisor(), cfg_.advisor_share, principal_,
                          rng, mode);
    case Mechanism::m3:
      return run_round_m3(setup_, agents_, cfg_.peers, histories_, principal_, rng, mode,
                          cfg_.peer_strategy);
  }
  throw ConfigError("unknown mechanism");
}

RoundRecord Simulation::train_step() {
  RoundRecord rec = play(world_rng_, Mode::train);
  rec.step = ++step_;
  return rec;
}

RoundRecord Simulation::eval_round() {
  RoundRecord rec = play(eval_rng_, Mode::eval);
  rec.step = step_;
  return rec;
}

std::size_t Simulation::first_forecaster() const {
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (cfg_.mechanism == Mechanism::m2 && i == cfg_.resolved_advisor()) continue;
    if (cfg_.mechanism == Mechanism::m3 && (i == cfg_.peers.first || i == cfg_.peers.second)) continue;
    return i;
  }
  return 0;
}

json Simulation::checkpoint() const {
  json agents = json::array();
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    agents.push_back({{"index", i}, {"theta", matrix_json(agents_[i].theta())},
                      {"baseline", agents_[i].baseline()}});
  }
  return json{{"step", step_},
              {"mechanism", std::string(to_string(cfg_.mechanism))},
              {"agents", std::move(agents)},
              {"principal",
               {{"theta", matrix_json(principal_.theta())}, {"baseline", principal_.baseline()}}}};
}

std::uint64_t replicate_seed(std::uint64_t master, std::size_t replicate) {
  return derive_seed(master, replicate);
}

ReplicateSummary run_replicate(const RunConfig& cfg, std::size_t replicate, std::ostream& csv,
                               json* checkpoint) {
  const auto started = std::chrono::steady_clock::now();
  ReplicateSummary summary;
  summary.replicate = replicate;
  summary.seed = replicate_seed(cfg.seed, replicate);

  Simulation sim(cfg, summary.seed);
  const std::size_t window = cfg.resolved_eval_window();
  MovingAverage decision_ma(window);
  MovingAverage bayes_ma(window);
  std::vector<double> er_values;
  std::deque<int> agreement;
  std::size_t agreement_sum = 0;

  csv << kMetricsHeader << '\n';
  auto probe = [&] {
    for (std::size_t r = 0; r < cfg.eval_rounds; ++r) {
      const RoundRecord rec = sim.eval_round();
      MetricsRow row;
      row.step = rec.step;
      row.er = rec.oracle.er;
      row.decision_success = rec.outcome;
      row.bayes_success = rec.oracle.bayes_success;
      decision_ma.push(row.decision_success);
      bayes_ma.push(row.bayes_success);
      row.decision_success_ma = decision_ma.value();
      row.bayes_success_ma = bayes_ma.value();
      row.mean_agent_score =
          std::accumulate(rec.scores.begin(), rec.scores.end(), 0.0) / static_cast<double>(rec.scores.size());
      csv << format_metrics_row(row) << '\n';

      er_values.push_back(row.er);
      const int agrees = agrees_with_bayes(rec, rec.decision.action) ? 1 : 0;
      agreement.push_back(agrees);
      agreement_sum += static_cast<std::size_t>(agrees);
      if (agreement.size() > window) {
        agreement_sum -= static_cast<std::size_t>(agreement.front());
        agreement.pop_front();
      }
    }
  };

  for (std::size_t t = 1; t <= cfg.steps; ++t) {
    sim.train_step();
    if (t % cfg.eval_interval == 0 || t == cfg.steps) probe();
  }
  csv.flush();
  if (!csv) throw IoError("failed writing metrics CSV");

  const std::size_t n = er_values.size();
  summary.eval_rows = n;
  summary.final_decision_success_ma = decision_ma.value();
  summary.final_bayes_success_ma = bayes_ma.value();
  summary.trailing_er = mean_of(er_values, n - std::min(n, window), n);
  summary.trailing_bayes_agreement =
      agreement.empty() ? 0.0 : static_cast<double>(agreement_sum) / static_cast<double>(agreement.size());
  const std::size_t decile = std::max<std::size_t>(1, n / 10);
  summary.first_decile_er = mean_of(er_values, 0, std::min(n, decile));
  summary.last_decile_er = mean_of(er_values, n - std::min(n, decile), n);

  const std::size_t first = sim.first_forecaster();
  const auto report = sim.agents()[first].act(SignalEvidence{0, 1}, sim.setup().prior, Mode::eval);
  summary.first_forecaster_report = report.probs[0];
  const int one[] = {1};
  summary.first_forecaster_ideal =
      ideal_proxy_forecast(posterior_outcome(one, Probability(cfg.world.p_outcome), cfg.world), cfg.world);

  if (checkpoint != nullptr) {
    *checkpoint = sim.checkpoint();
    (*checkpoint)["replicate"] = replicate;
    (*checkpoint)["seed"] = summary.seed;
  }
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return summary;
}

std::size_t worker_count(std::size_t replicates) {
  std::size_t threads = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PROXY_MARKET_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) threads = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(threads, replicates));
}

namespace {

json summary_json(const ReplicateSummary& s) {
  return json{{"replicate", s.replicate},
              {"seed", s.seed},
              {"eval_rows", s.eval_rows},
              {"final_decision_success_ma", s.final_decision_success_ma},
              {"final_bayes_success_ma", s.final_bayes_success_ma},
              {"trailing_er", s.trailing_er},
              {"trailing_bayes_agreement", s.trailing_bayes_agreement},
              {"first_decile_er", s.first_decile_er},
              {"last_decile_er", s.last_decile_er},
              {"first_forecaster_report", s.first_forecaster_report},
              {"first_forecaster_ideal", s.first_forecaster_ideal},
              {"wall_seconds", s.wall_seconds},
              {"metrics_csv", s.metrics_csv.string()},
              {"checkpoint", s.checkpoint.string()}};
}

}  // namespace

ExperimentSummary run_experiment(const RunConfig& cfg, std::size_t threads) {
  cfg.validate();
  const fs::path dir(cfg.output_dir);
  ensure_writable(dir);
  const auto started = std::chrono::steady_clock::now();

  {
    auto out = open_output(dir / "config.json");
    out << to_json(cfg).dump(2) << '\n';
  }

  ExperimentSummary result;
  result.replicates.resize(cfg.replicates);
  const std::size_t workers = threads == 0 ? worker_count(cfg.replicates) : std::min(threads, cfg.replicates);

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto work = [&] {
    for (std::size_t r = next++; r < cfg.replicates; r = next++) {
      try {
        const auto csv_path = dir / fmt::format("metrics_rep{}.csv", r);
        const auto ckpt_path = dir / fmt::format("checkpoint_rep{}.json", r);
        auto csv = open_output(csv_path);
        json checkpoint;
        ReplicateSummary s = run_replicate(cfg, r, csv, &checkpoint);
        auto ckpt = open_output(ckpt_path);
        ckpt << checkpoint.dump(2) << '\n';
        s.metrics_csv = csv_path;
        s.checkpoint = ckpt_path;
        result.replicates[r] = std::move(s);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (error) std::rethrow_exception(error);

  result.merged_csv = dir / "metrics.csv";
  {
    auto merged = open_output(result.merged_csv);
    merged << "replicate," << kMetricsHeader << '\n';
    for (const auto& s : result.replicates) {
      std::ifstream in(s.metrics_csv, std::ios::binary);
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) merged << s.replicate << ',' << line << '\n';
    }
  }

  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json reps = json::array();
  for (const auto& s : result.replicates) reps.push_back(summary_json(s));
  result.summary_json = dir / "summary.json";
  auto out = open_output(result.summary_json);
  out << json{{"mechanism", std::string(to_string(cfg.mechanism))},
              {"steps", cfg.steps},
              {"seed", cfg.seed},
              {"replicates", std::move(reps)},
              {"wall_seconds", result.wall_seconds}}
             .dump(2)
      << '\n';
  return result;
}

}  // namespace proxy_market
