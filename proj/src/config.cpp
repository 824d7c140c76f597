#include "proxy_market/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "proxy_market/errors.hpp"

namespace proxy_market {

using nlohmann::json;

LearnerParams RunConfig::principal() const {
  LearnerParams p = agent;
  const auto& o = principal_overrides;
  p.alpha = o.alpha.value_or(kPrincipalAlpha);
  if (o.buffer_capacity) p.buffer_capacity = *o.buffer_capacity;
  if (o.batch_size) p.batch_size = *o.batch_size;
  if (o.baseline_rho) p.baseline_rho = *o.baseline_rho;
  if (o.init_range) p.init_range = *o.init_range;
  return p;
}

std::size_t RunConfig::resolved_eval_window() const {
  return eval_window.value_or(std::min<std::size_t>(10'000, steps));
}

std::size_t RunConfig::resolved_advisor() const {
  return advisor_index.value_or(world.agents == 0 ? 0 : world.agents - 1);
}

Eigen::VectorXd RunConfig::resolved_prior() const {
  if (!prior) return even_odds(world.actions);
  return Eigen::Map<const Eigen::VectorXd>(prior->data(), static_cast<Eigen::Index>(prior->size()));
}

void RunConfig::validate() const {
  world.validate();
  if (steps < 1) throw ConfigError("steps: must be at least 1");
  if (replicates < 1) throw ConfigError("replicates: must be at least 1");
  agent.validate("");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma: must be positive");
  principal().validate("principal_");

  if (!(advisor_share >= 0.0 && advisor_share <= 1.0)) {
    throw ConfigError("advisor_share: must be in [0, 1]");
  }
  if (peer_window < 1) throw ConfigError("peer_window: must be positive");
  if (eval_interval < 1) throw ConfigError("eval_interval: must be positive");
  if (eval_rounds < 1) throw ConfigError("eval_rounds: must be positive");
  const auto window = resolved_eval_window();
  if (window < 1) throw ConfigError("eval_window: must be positive");
  if (window > steps) throw ConfigError("eval_window: must not exceed steps");
  if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");

  if (prior) {
    if (prior->size() != world.actions) {
      throw ConfigError(fmt::format("prior: has {} entries, expected {}", prior->size(), world.actions));
    }
    for (double p : *prior) {
      if (!(p > 0.0 && p < 1.0)) throw ConfigError("prior: entries must be in (0, 1)");
    }
  }

  switch (mechanism) {
    case Mechanism::m1:
      break;
    case Mechanism::m2:
      if (world.agents < 2) throw ConfigError("world.agents: m2 needs at least 2 agents");
      if (resolved_advisor() >= world.agents) throw ConfigError("advisor_index: out of range");
      break;
    case Mechanism::m3:
      if (world.agents < 3) throw ConfigError("world.agents: m3 needs at least 3 agents");
      if (peers.first == peers.second) throw ConfigError("peers: indices must differ");
      if (peers.first >= world.agents || peers.second >= world.agents) {
        throw ConfigError("peers: index out of range");
      }
      break;
  }
}

namespace {

const std::set<std::string> kTopKeys = {
    "mechanism",       "steps",          "replicates",          "seed",
    "world",           "alpha",          "sigma",               "buffer_capacity",
    "batch_size",      "baseline_rho",   "init_range",          "principal_alpha",
    "principal_buffer_capacity",         "principal_batch_size", "principal_baseline_rho",
    "principal_init_range",              "advisor_share",       "advisor_index",
    "peer_window",     "peer_strategy",  "peers",               "scoring_rule",
    "prior",           "eval_interval",  "eval_window",         "eval_rounds",
    "output_dir"};

const std::set<std::string> kWorldKeys = {"actions",         "agents",           "p_outcome",
                                          "likelihood_true", "likelihood_false", "assignment"};

template <typename T>
T field(const json& obj, const char* key, const std::string& name) {
  try {
    if constexpr (std::is_unsigned_v<T>) {
      if (!obj.at(key).is_number_unsigned()) {
        throw ConfigError(fmt::format("{}: expected a non-negative integer", name));
      }
    }
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", name, e.what()));
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& prefix = "") {
  if (obj.contains(key)) out = field<T>(obj, key, prefix + key);
}

template <typename T>
void read(const json& obj, const char* key, std::optional<T>& out, const std::string& prefix = "") {
  if (obj.contains(key)) out = field<T>(obj, key, prefix + key);
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& prefix) {
  for (const auto& [key, _] : obj.items()) {
    if (!known.contains(key)) throw ConfigError(fmt::format("{}{}: unknown key", prefix, key));
  }
}

}  // namespace

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  reject_unknown(j, kTopKeys, "");

  RunConfig cfg;
  if (j.contains("mechanism")) cfg.mechanism = parse_mechanism(field<std::string>(j, "mechanism", "mechanism"));
  read(j, "steps", cfg.steps);
  read(j, "replicates", cfg.replicates);
  read(j, "seed", cfg.seed);

  if (j.contains("world")) {
    const auto& w = j.at("world");
    if (!w.is_object()) throw ConfigError("world: must be an object");
    reject_unknown(w, kWorldKeys, "world.");
    read(w, "actions", cfg.world.actions, "world.");
    read(w, "agents", cfg.world.agents, "world.");
    read(w, "p_outcome", cfg.world.p_outcome, "world.");
    read(w, "likelihood_true", cfg.world.likelihood_true, "world.");
    read(w, "likelihood_false", cfg.world.likelihood_false, "world.");
    if (w.contains("assignment")) {
      cfg.world.assignment = parse_assignment_policy(field<std::string>(w, "assignment", "world.assignment"));
    }
  }

  read(j, "alpha", cfg.agent.alpha);
  read(j, "sigma", cfg.sigma);
  read(j, "buffer_capacity", cfg.agent.buffer_capacity);
  read(j, "batch_size", cfg.agent.batch_size);
  read(j, "baseline_rho", cfg.agent.baseline_rho);
  read(j, "init_range", cfg.agent.init_range);
  auto& po = cfg.principal_overrides;
  read(j, "principal_alpha", po.alpha);
  read(j, "principal_buffer_capacity", po.buffer_capacity);
  read(j, "principal_batch_size", po.batch_size);
  read(j, "principal_baseline_rho", po.baseline_rho);
  read(j, "principal_init_range", po.init_range);

  read(j, "advisor_share", cfg.advisor_share);
  read(j, "advisor_index", cfg.advisor_index);
  read(j, "peer_window", cfg.peer_window);
  if (j.contains("peer_strategy")) {
    cfg.peer_strategy = parse_strategy(field<std::string>(j, "peer_strategy", "peer_strategy"));
  }
  if (j.contains("peers")) {
    const auto pair = field<std::vector<std::size_t>>(j, "peers", "peers");
    if (pair.size() != 2) throw ConfigError("peers: expected two agent indices");
    cfg.peers = PeerPair{pair[0], pair[1]};
  }
  if (j.contains("scoring_rule")) {
    cfg.scoring_rule = parse_scoring_rule(field<std::string>(j, "scoring_rule", "scoring_rule"));
  }
  read(j, "prior", cfg.prior);
  read(j, "eval_interval", cfg.eval_interval);
  read(j, "eval_window", cfg.eval_window);
  read(j, "eval_rounds", cfg.eval_rounds);
  read(j, "output_dir", cfg.output_dir);

  if (cfg.advisor_share == 0.0 && cfg.mechanism == Mechanism::m2) {
    std::cerr << "warning: advisor_share is 0; the advisor has no stake in the decision\n";
  }
  cfg.validate();
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json j;
  j["mechanism"] = std::string(to_string(cfg.mechanism));
  j["steps"] = cfg.steps;
  j["replicates"] = cfg.replicates;
  j["seed"] = cfg.seed;
  j["world"] = {{"actions", cfg.world.actions},
                {"agents", cfg.world.agents},
                {"p_outcome", cfg.world.p_outcome},
                {"likelihood_true", cfg.world.likelihood_true},
                {"likelihood_false", cfg.world.likelihood_false},
                {"assignment", std::string(to_string(cfg.world.assignment))}};
  j["alpha"] = cfg.agent.alpha;
  j["sigma"] = cfg.sigma;
  j["buffer_capacity"] = cfg.agent.buffer_capacity;
  j["batch_size"] = cfg.agent.batch_size;
  j["baseline_rho"] = cfg.agent.baseline_rho;
  j["init_range"] = cfg.agent.init_range;
  const auto& po = cfg.principal_overrides;
  if (po.alpha) j["principal_alpha"] = *po.alpha;
  if (po.buffer_capacity) j["principal_buffer_capacity"] = *po.buffer_capacity;
  if (po.batch_size) j["principal_batch_size"] = *po.batch_size;
  if (po.baseline_rho) j["principal_baseline_rho"] = *po.baseline_rho;
  if (po.init_range) j["principal_init_range"] = *po.init_range;
  j["advisor_share"] = cfg.advisor_share;
  if (cfg.advisor_index) j["advisor_index"] = *cfg.advisor_index;
  j["peer_window"] = cfg.peer_window;
  j["peer_strategy"] = std::string(to_string(cfg.peer_strategy));
  j["peers"] = {cfg.peers.first, cfg.peers.second};
  j["scoring_rule"] = std::string(to_string(cfg.scoring_rule));
  if (cfg.prior) j["prior"] = *cfg.prior;
  j["eval_interval"] = cfg.eval_interval;
  if (cfg.eval_window) j["eval_window"] = *cfg.eval_window;
  j["eval_rounds"] = cfg.eval_rounds;
  j["output_dir"] = cfg.output_dir;
  return j;
}

RunConfig parse_config(std::string_view text, std::string_view source) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::size_t line_start = text.rfind('\n', end == 0 ? 0 : end - 1);
    line_start = line_start == std::string_view::npos || end == 0 ? 0 : line_start + 1;
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    throw ParseError(fmt::format("{}:{}:{}: malformed JSON near '{}'", source, line, column,
                                 text.substr(line_start, line_end - line_start)));
  }
  return config_from_json(j);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read config file {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

}  // namespace proxy_market
