#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "macoptions/environment.hpp"
#include "macoptions/planner.hpp"

namespace macopt {

/// Agent and its assigned gem. Used by the pickup option.
struct PickupState {
  Position agent_pos;
  Position gem_pos;
  friend bool operator==(const PickupState&, const PickupState&) = default;
};

/// Agent position only; the bank is fixed and carrying is implied.
struct DropState {
  Position agent_pos;
  friend bool operator==(const DropState&, const DropState&) = default;
};

/// Flat Q-learning state. The target is the assigned gem while fetching, the
/// bank while carrying, and empty when the agent has nothing to do.
struct FlatState {
  Position agent_pos;
  std::optional<Position> target_pos;
  bool carrying = false;
  friend bool operator==(const FlatState&, const FlatState&) = default;
};

/// State used without a planner: every gem still on the grid is visible.
struct NoPlannerState {
  Position agent_pos;
  bool carrying = false;
  std::vector<std::optional<Position>> gem_cells;
  friend bool operator==(const NoPlannerState&, const NoPlannerState&) = default;
};

using AbstractState = std::variant<PickupState, DropState, FlatState, NoPlannerState>;

struct AbstractStateHash {
  std::size_t operator()(const AbstractState& s) const noexcept;
};

/// Throws ContractViolation unless `gem` is on the grid and `agent` is empty-handed.
AbstractState abstract_pickup(const WorldState& state, int agent, int gem);

/// Throws ContractViolation unless `agent` carries a gem.
AbstractState abstract_drop(const WorldState& state, int agent);

AbstractState abstract_flat(const WorldState& state, int agent, const Assignment& assignment, Position bank);

AbstractState abstract_no_planner(const WorldState& state, int agent);

// Canonical text form, e.g. "P,1,2,4,4", "D,7,3", "F,0,0,3,3,0", "F,9,9,_,0",
// "N,1,1,0,0:2,_,_". Parsing is the exact inverse.
std::string serialize(const AbstractState& s);
/// Throws ParseError on malformed input.
AbstractState parse_abstract_state(std::string_view text);

}  // namespace macopt
