#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "proxy_market/config.hpp"
#include "proxy_market/mechanisms.hpp"

namespace proxy_market {

/// One evaluation round as persisted in the metrics CSV.
struct MetricsRow {
  std::size_t step = 0;
  double er = 0.0;
  int decision_success = 0;
  int bayes_success = 0;
  double decision_success_ma = 0.0;
  double bayes_success_ma = 0.0;
  double mean_agent_score = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "step,er,decision_success,bayes_success,decision_success_ma,bayes_success_ma,mean_agent_score";

[[nodiscard]] std::string format_metrics_row(const MetricsRow& row);

/// Mean of the last `window` binary values.
class MovingAverage {
 public:
  explicit MovingAverage(std::size_t window) : window_(window) {}
  void push(int value);
  [[nodiscard]] double value() const;

 private:
  std::size_t window_;
  std::deque<int> values_;
  long sum_ = 0;
};

/// Whether `action` is one of the Bayes-optimal actions of `record`.
[[nodiscard]] bool agrees_with_bayes(const RoundRecord& record, std::size_t action);

/// All state of one replicate: world stream, participants, peer histories.
class Simulation {
 public:
  Simulation(const RunConfig& cfg, std::uint64_t replicate_seed);

  /// One training round; advances the step counter.
  RoundRecord train_step();

  /// One evaluation round from the independent eval stream. Deterministic
  /// reports, argmax decisions, no learning; leaves training state unchanged.
  RoundRecord eval_round();

  [[nodiscard]] std::size_t step() const { return step_; }
  [[nodiscard]] const RoundSetup& setup() const { return setup_; }
  [[nodiscard]] std::vector<Agent>& agents() { return agents_; }
  [[nodiscard]] const std::vector<Agent>& agents() const { return agents_; }
  [[nodiscard]] Principal& principal() { return principal_; }
  [[nodiscard]] const Principal& principal() const { return principal_; }

  /// Index of the first agent that forecasts under the configured mechanism.
  [[nodiscard]] std::size_t first_forecaster() const;

  [[nodiscard]] nlohmann::json checkpoint() const;

 private:
  RoundRecord play(Rng& rng, Mode mode);

  RunConfig cfg_;
  RoundSetup setup_;
  std::vector<Agent> agents_;
  Principal principal_;
  Rng world_rng_;
  Rng eval_rng_;
  std::pair<PeerHistory, PeerHistory> histories_;
  std::size_t step_ = 0;
};

struct ReplicateSummary {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::size_t eval_rows = 0;
  double final_decision_success_ma = 0.0;
  double final_bayes_success_ma = 0.0;
  double trailing_er = 0.0;            // mean over the last eval_window eval rows
  double trailing_bayes_agreement = 0.0;
  double first_decile_er = 0.0;
  double last_decile_er = 0.0;
  double first_forecaster_report = 0.0;  // eval report for a lone 1-signal on action 0
  double first_forecaster_ideal = 0.0;
  double wall_seconds = 0.0;
  std::filesystem::path metrics_csv;
  std::filesystem::path checkpoint;
};

struct ExperimentSummary {
  std::vector<ReplicateSummary> replicates;
  double wall_seconds = 0.0;
  std::filesystem::path summary_json;
  std::filesystem::path merged_csv;
};

/// Seed of replicate r under master seed s: derive_seed(s, r).
[[nodiscard]] std::uint64_t replicate_seed(std::uint64_t master, std::size_t replicate);

/// Trains one replicate for cfg.steps rounds, probing with cfg.eval_rounds
/// eval rounds after every eval_interval steps and after the last step.
/// Rows are streamed to `csv` (header included); the final policies go to
/// `checkpoint` when given.
ReplicateSummary run_replicate(const RunConfig& cfg, std::size_t replicate, std::ostream& csv,
                               nlohmann::json* checkpoint = nullptr);

/// Number of worker threads: PROXY_MARKET_THREADS if set, otherwise hardware
/// concurrency, capped by the replicate count.
[[nodiscard]] std::size_t worker_count(std::size_t replicates);

/// Runs every replicate and writes, under cfg.output_dir:
///   metrics_rep<r>.csv, checkpoint_rep<r>.json  per replicate
///   metrics.csv     all replicates, with a leading replicate column
///   config.json, summary.json
/// Throws IoError before simulating when the directory is not writable.
ExperimentSummary run_experiment(const RunConfig& cfg, std::size_t threads = 0);

}  // namespace proxy_market
