#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "macoptions/errors.hpp"

namespace macopt {

struct Position {
  int row = 0;
  int col = 0;

  friend bool operator==(const Position&, const Position&) = default;
  friend auto operator<=>(const Position&, const Position&) = default;
};

std::string to_string(Position p);

/// The five primitive actions, indexed 0..4 in declaration order.
enum class Action : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3, NoOp = 4 };

inline constexpr std::size_t kNumActions = 5;
inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::Up, Action::Down, Action::Left, Action::Right, Action::NoOp};

constexpr std::size_t index_of(Action a) { return static_cast<std::size_t>(a); }
Action action_from_index(std::size_t i);
std::string_view to_string(Action a);

/// Destination cell of `a` from `p`, ignoring grid bounds.
constexpr Position displaced(Position p, Action a) {
  switch (a) {
    case Action::Up: return {p.row - 1, p.col};
    case Action::Down: return {p.row + 1, p.col};
    case Action::Left: return {p.row, p.col - 1};
    case Action::Right: return {p.row, p.col + 1};
    case Action::NoOp: return p;
  }
  return p;
}

inline constexpr double kIllegalReward = -5.0;
inline constexpr double kStepReward = -1.0;
inline constexpr double kAcquireReward = 50.0;
inline constexpr double kDropReward = 500.0;

struct FixedLayout {
  std::vector<Position> agents;
  std::vector<Position> gems;

  friend bool operator==(const FixedLayout&, const FixedLayout&) = default;
};

/// Agents and gems are drawn per episode from the reset seed.
struct RandomLayout {
  friend bool operator==(const RandomLayout&, const RandomLayout&) = default;
};

using Layout = std::variant<FixedLayout, RandomLayout>;

/// Deterministic starting layout used when none is given explicitly.
///
/// Agents take the corners first (top-left, bottom-right, top-right,
/// bottom-left), gems take the remaining corners and then the edge midpoints,
/// skipping the bank and occupied cells. Further entities fill the grid in
/// row-major order.
FixedLayout canonical_layout(int width, int height, int num_agents, int num_gems, Position bank);

struct GridConfig {
  int width = 11;
  int height = 11;
  Position bank{5, 5};
  int num_agents = 2;
  int num_gems = 3;
  int step_limit = 1000;
  /// Reward for NoOp. Set to -1 to charge NoOp like any other step.
  double noop_reward = 0.0;
  Layout layout;

  /// 11x11, bank at the center, 2 agents, 3 gems, 1000 steps, canonical layout.
  GridConfig();

  /// Bank at the center and the canonical fixed layout.
  static GridConfig centered(int width, int height, int num_agents, int num_gems,
                             int step_limit = 1000);

  bool contains(Position p) const {
    return p.row >= 0 && p.row < height && p.col >= 0 && p.col < width;
  }
  int cells() const { return width * height; }

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;

  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct OnGrid {
  Position cell;
  friend bool operator==(const OnGrid&, const OnGrid&) = default;
};
struct CarriedBy {
  int agent = 0;
  friend bool operator==(const CarriedBy&, const CarriedBy&) = default;
};
struct Dropped {
  friend bool operator==(const Dropped&, const Dropped&) = default;
};

using GemStatus = std::variant<OnGrid, CarriedBy, Dropped>;

struct WorldState {
  std::vector<Position> agents;
  std::vector<GemStatus> gems;
  int step = 0;

  /// Index of the gem carried by `agent`, if any.
  std::optional<int> carried_gem(int agent) const;
  bool is_carrying(int agent) const { return carried_gem(agent).has_value(); }
  std::optional<Position> gem_cell(int gem) const;
  int count_on_grid() const;
  int count_carried() const;
  int count_dropped() const;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

enum class StepEvent : std::uint8_t { Illegal, Acquired, Dropped, Moved, Idle };

std::string_view to_string(StepEvent e);

struct StepOutcome {
  double reward = 0.0;
  StepEvent event = StepEvent::Idle;
  /// Gem involved in an Acquired or Dropped event, -1 otherwise.
  int gem = -1;

  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

/// Initial state of an episode. The seed only matters for RandomLayout.
WorldState reset(const GridConfig& config, std::uint64_t seed);

/// True iff `action` keeps `agent` inside the grid.
bool is_legal(const WorldState& state, const GridConfig& config, int agent, Action action);

/// Moves one agent and applies the reward function in place.
///
/// Acquisition and drop happen automatically when the agent enters the gem or
/// bank cell. With `assigned_gem` only that gem can be acquired; without it the
/// lowest-indexed gem lying on the entered cell is taken.
StepOutcome apply_step(WorldState& state, const GridConfig& config, int agent, Action action,
                       std::optional<int> assigned_gem);

/// Value form of apply_step.
std::pair<WorldState, StepOutcome> step_agent(WorldState state, const GridConfig& config, int agent,
                                              Action action, std::optional<int> assigned_gem);

WorldState advance_step(WorldState state);

/// All gems dropped, or the step limit is reached.
bool is_terminal(const WorldState& state, const GridConfig& config);

}  // namespace macopt
