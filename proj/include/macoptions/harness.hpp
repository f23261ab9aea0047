#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "macoptions/learner.hpp"

namespace macopt {

struct RunConfig {
  GridConfig grid;
  ControllerMode mode;
  Hyperparams hyper;
  int episodes = 6000;
  int eval_runs = 10;
  std::filesystem::path output_dir = "runs/latest";
  /// Training stops once this many timesteps have elapsed in total. 0 means no cap.
  std::int64_t max_total_steps = 0;
  /// Reward level for episodes-to-threshold. Defaults to 80% of the oracle episode return.
  std::optional<double> threshold;

  void validate() const;
};

struct EpisodeRecord {
  int episode = 0;
  /// Summed over all agents and steps.
  double total_reward = 0.0;
  int steps_used = 0;
  int gems_dropped = 0;
  double epsilon = 0.0;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct TrainResult {
  TableSet tables;
  std::vector<EpisodeRecord> log;
  std::uint64_t planner_calls = 0;
  std::int64_t total_steps = 0;
};

/// Called after every controller timestep with the episode index and the step result.
using StepObserver = std::function<void(int episode, const ControllerStep&)>;

/// Runs the training episodes with the annealed exploration schedule.
TrainResult train(const RunConfig& cfg, const StepObserver& observer = {});

/// Greedy episodes with seeds seed + run index. Throws ConfigError when the
/// tables were produced under a different mode.
std::vector<EpisodeRecord> evaluate(const TableSet& tables, const RunConfig& cfg,
                                    const StepObserver& observer = {});

/// A single greedy episode from reset(grid, seed).
EpisodeRecord play_episode(const GridConfig& grid, const TableSet& tables, std::uint64_t seed,
                           const StepObserver& observer = {});

// Exact solution of the pickup and drop subtasks

enum class Subtask : std::uint8_t { Pickup, Drop };
std::string_view to_string(Subtask t);
Subtask parse_subtask(std::string_view name);

class StateSpaceTooLarge : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

inline constexpr std::size_t kOracleMaxPairs = 1'000'000;

/// Bellman optimality iteration over every abstract state of the subtask until
/// the largest change drops below `tolerance`.
QTable value_iteration_oracle(const GridConfig& grid, Subtask task, double gamma, double tolerance = 1e-9,
                              std::size_t max_pairs = kOracleMaxPairs);

/// Oracle pickup and drop tables packaged for the options controller with a planner.
TableSet oracle_tables(const GridConfig& grid, double gamma);

/// Undiscounted total reward of a greedy episode under the oracle tables.
/// Requires a fixed layout.
double oracle_episode_return(const GridConfig& grid, double gamma);

/// Discounted return of the rewards, accumulated back to front.
double discounted_return(const std::vector<double>& rewards, double gamma);

// Experiment suites

/// Number of episodes trained when the trailing mean over `window` episodes first
/// reaches `threshold`. Empty when it never does.
std::optional<int> episodes_to_threshold(const std::vector<EpisodeRecord>& log, double threshold, int window = 50);

/// cfg.threshold, or 80% of the oracle episode return for fixed layouts.
double resolve_threshold(const RunConfig& cfg);

struct ArmResult {
  ControllerMode mode;
  TrainResult training;
  std::vector<EpisodeRecord> evaluation;
  double mean_eval_reward = 0.0;
  double std_eval_reward = 0.0;
  std::optional<int> episodes_to_threshold;
};

/// Trains and evaluates RandomPolicy, FlatQ and OptionsQ on the same grid and seed.
std::vector<ArmResult> compare_methods(const RunConfig& base, unsigned max_threads = 0);

/// OptionsQ with and without the planner.
std::vector<ArmResult> compare_planner(const RunConfig& base, unsigned max_threads = 0);

/// Runs every mode as an independent arm. `max_threads` 0 means one thread per arm.
std::vector<ArmResult> run_arms(const RunConfig& base, const std::vector<ControllerMode>& modes,
                                unsigned max_threads);

double mean_reward(const std::vector<EpisodeRecord>& records);
/// Sample standard deviation; 0 for fewer than two records.
double stddev_reward(const std::vector<EpisodeRecord>& records);

// Files

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

void write_metrics(const std::vector<EpisodeRecord>& records, const std::filesystem::path& path);
std::vector<EpisodeRecord> read_metrics(const std::filesystem::path& path);

struct QTableFile {
  TableSet tables;
  Hyperparams hyper;
};

void write_qtable(const TableSet& tables, const Hyperparams& hyper, const std::filesystem::path& path);
/// Throws FileError when missing, ParseError (with line) when malformed.
QTableFile read_qtable(const std::filesystem::path& path);

void write_summary(const std::vector<ArmResult>& rows, const std::filesystem::path& path);

/// Matplotlib script plotting reward per episode from `metrics_file`, which is
/// referenced relative to the script's own directory.
void write_plot_script(const std::filesystem::path& script_path, const std::string& metrics_file,
                       const std::string& title);

}  // namespace macopt
