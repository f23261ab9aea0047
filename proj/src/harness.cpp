#include "macoptions/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

namespace macopt {

void RunConfig::validate() const {
  grid.validate();
  hyper.validate();
  if (episodes < 1) throw ConfigError("episodes must be at least 1");
  if (eval_runs < 1) throw ConfigError("eval runs must be at least 1");
  if (max_total_steps < 0) throw ConfigError("step budget must be non-negative");
}

namespace {

struct EpisodeContext {
  const GridConfig& grid;
  ControllerMode mode;
  const Hyperparams& hyper;
  int episode = 0;
  double epsilon = 0.0;
  /// Timesteps allowed before the episode is cut short; negative means unlimited.
  std::int64_t step_budget = -1;
};

// Learns when `Tables` is mutable.
template <typename Tables>
EpisodeRecord run_episode(const EpisodeContext& ep, Tables& tables, std::uint64_t reset_seed, Rng& rng,
                          const StepObserver& observer, std::uint64_t& planner_calls) {
  const ControllerContext ctx{ep.grid, ep.mode, ep.hyper, ep.epsilon};
  WorldState state = reset(ep.grid, reset_seed);
  Assignment assignment;
  EpisodeRecord rec;
  rec.episode = ep.episode;
  rec.epsilon = ep.epsilon;

  while (!is_terminal(state, ep.grid) && (ep.step_budget < 0 || state.step < ep.step_budget)) {
    ControllerStep step = [&] {
      if constexpr (std::is_const_v<Tables>)
        return controller_act(state, ctx, tables, std::move(assignment), rng);
      else
        return controller_step(state, ctx, tables, std::move(assignment), rng);
    }();
    for (const AgentTurn& t : step.turns) rec.total_reward += t.outcome.reward;
    planner_calls += static_cast<std::uint64_t>(step.planner_calls);
    if (observer) observer(ep.episode, step);
    state = std::move(step.state);
    assignment = std::move(step.assignment);
  }
  rec.steps_used = state.step;
  rec.gems_dropped = state.count_dropped();
  return rec;
}

}  // namespace

TrainResult train(const RunConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  TrainResult result;
  result.tables.mode = cfg.mode;
  Rng rng(derive_seed(cfg.hyper.seed, kActionStream, 0));

  for (int e = 0; e < cfg.episodes; ++e) {
    std::int64_t budget = -1;
    if (cfg.max_total_steps > 0) {
      budget = cfg.max_total_steps - result.total_steps;
      if (budget <= 0) break;
    }
    const EpisodeContext ep{cfg.grid, cfg.mode, cfg.hyper, e, cfg.hyper.epsilon_at(e, cfg.episodes), budget};
    EpisodeRecord rec = run_episode(ep, result.tables, derive_seed(cfg.hyper.seed, kLayoutStream, e), rng,
                                    observer, result.planner_calls);
    result.total_steps += rec.steps_used;
    result.log.push_back(rec);
  }
  return result;
}

EpisodeRecord play_episode(const GridConfig& grid, const TableSet& tables, std::uint64_t seed,
                           const StepObserver& observer) {
  const Hyperparams hyper;
  const EpisodeContext ep{grid, tables.mode, hyper, 0, 0.0, -1};
  Rng rng(derive_seed(seed, kActionStream, 1));
  std::uint64_t planner_calls = 0;
  return run_episode(ep, tables, derive_seed(seed, kLayoutStream, 0), rng, observer, planner_calls);
}

std::vector<EpisodeRecord> evaluate(const TableSet& tables, const RunConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  if (tables.mode != cfg.mode)
    throw ConfigError("tables were trained with method " + std::string(to_string(tables.mode.method)) +
                      (tables.mode.planner_enabled ? " (planner on)" : " (planner off)") + " but evaluation asks for " +
                      std::string(to_string(cfg.mode.method)) +
                      (cfg.mode.planner_enabled ? " (planner on)" : " (planner off)"));
  std::vector<EpisodeRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.eval_runs));
  for (int k = 0; k < cfg.eval_runs; ++k) {
    EpisodeRecord rec = play_episode(cfg.grid, tables, cfg.hyper.seed + static_cast<std::uint64_t>(k), observer);
    rec.episode = k;
    records.push_back(rec);
  }
  return records;
}

double discounted_return(const std::vector<double>& rewards, double gamma) {
  double g = 0.0;
  for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) g = *it + gamma * g;
  return g;
}

std::optional<int> episodes_to_threshold(const std::vector<EpisodeRecord>& log, double threshold, int window) {
  if (window < 1) throw ContractViolation("threshold window must be positive");
  const auto w = static_cast<std::size_t>(window);
  double sum = 0.0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    sum += log[i].total_reward;
    if (i >= w) sum -= log[i - w].total_reward;
    if (i + 1 >= w && sum / window >= threshold) return static_cast<int>(i + 1);
  }
  return std::nullopt;
}

double resolve_threshold(const RunConfig& cfg) {
  if (cfg.threshold) return *cfg.threshold;
  if (!std::holds_alternative<FixedLayout>(cfg.grid.layout))
    throw ConfigError("a random layout has no oracle episode return; set an explicit threshold");
  return 0.8 * oracle_episode_return(cfg.grid, cfg.hyper.gamma);
}

double mean_reward(const std::vector<EpisodeRecord>& records) {
  if (records.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : records) sum += r.total_reward;
  return sum / static_cast<double>(records.size());
}

double stddev_reward(const std::vector<EpisodeRecord>& records) {
  if (records.size() < 2) return 0.0;
  const double mean = mean_reward(records);
  double ss = 0.0;
  for (const auto& r : records) ss += (r.total_reward - mean) * (r.total_reward - mean);
  return std::sqrt(ss / static_cast<double>(records.size() - 1));
}

std::vector<ArmResult> run_arms(const RunConfig& base, const std::vector<ControllerMode>& modes,
                                unsigned max_threads) {
  base.validate();
  std::optional<double> threshold;
  if (base.threshold || std::holds_alternative<FixedLayout>(base.grid.layout)) threshold = resolve_threshold(base);

  std::vector<ArmResult> results(modes.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(modes.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < modes.size(); i = next++) try {
      RunConfig cfg = base;
      cfg.mode = modes[i];
      ArmResult& arm = results[i];
      arm.mode = modes[i];
      arm.training = train(cfg);
      arm.evaluation = evaluate(arm.training.tables, cfg);
      arm.mean_eval_reward = mean_reward(arm.evaluation);
      arm.std_eval_reward = stddev_reward(arm.evaluation);
      if (threshold) arm.episodes_to_threshold = episodes_to_threshold(arm.training.log, *threshold);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const unsigned threads =
      std::max(1u, std::min(max_threads == 0 ? static_cast<unsigned>(modes.size()) : max_threads,
                            static_cast<unsigned>(modes.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

std::vector<ArmResult> compare_methods(const RunConfig& base, unsigned max_threads) {
  const bool planner = base.mode.planner_enabled;
  return run_arms(base,
                  {{Method::RandomPolicy, planner}, {Method::FlatQ, planner}, {Method::OptionsQ, planner}},
                  max_threads);
}

std::vector<ArmResult> compare_planner(const RunConfig& base, unsigned max_threads) {
  if (base.mode.method != Method::OptionsQ) throw ConfigError("the planner comparison runs the q-options method");
  resolve_threshold(base);
  return run_arms(base, {{Method::OptionsQ, true}, {Method::OptionsQ, false}}, max_threads);
}

}  // namespace macopt
