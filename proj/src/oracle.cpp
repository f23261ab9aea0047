#include <algorithm>
#include <cmath>
#include <string>

#include "macoptions/harness.hpp"

namespace macopt {

std::string_view to_string(Subtask t) { return t == Subtask::Pickup ? "pickup" : "drop"; }

Subtask parse_subtask(std::string_view name) {
  if (name == "pickup") return Subtask::Pickup;
  if (name == "drop") return Subtask::Drop;
  throw ParseError("unknown subtask '" + std::string(name) + "' (expected pickup or drop)");
}

namespace {

constexpr int kTerminal = -1;

struct Transition {
  double reward = 0.0;
  int next = kTerminal;
};

// Abstract states of one subtask with their deterministic transitions.
struct SubtaskModel {
  std::vector<AbstractState> states;
  std::vector<std::array<Transition, kNumActions>> transitions;
};

SubtaskModel build_model(const GridConfig& grid, Subtask task) {
  const int w = grid.width;
  const int cells = grid.cells();
  auto cell_id = [w](Position p) { return p.row * w + p.col; };
  auto cell_at = [w](int id) { return Position{id / w, id % w}; };

  SubtaskModel model;
  // Pickup states are indexed gem_cell * cells + agent_cell; cells on the bank
  // hold no gem and are left out.
  std::vector<int> index(task == Subtask::Pickup ? static_cast<std::size_t>(cells) * cells : cells, -1);
  if (task == Subtask::Pickup) {
    for (int g = 0; g < cells; ++g) {
      if (cell_at(g) == grid.bank) continue;
      for (int a = 0; a < cells; ++a) {
        index[static_cast<std::size_t>(g) * cells + a] = static_cast<int>(model.states.size());
        model.states.push_back(PickupState{cell_at(a), cell_at(g)});
      }
    }
  } else {
    for (int a = 0; a < cells; ++a) {
      index[static_cast<std::size_t>(a)] = static_cast<int>(model.states.size());
      model.states.push_back(DropState{cell_at(a)});
    }
  }

  model.transitions.resize(model.states.size());
  for (std::size_t s = 0; s < model.states.size(); ++s) {
    const AbstractState& st = model.states[s];
    const Position agent = std::visit([](const auto& v) { return v.agent_pos; }, st);
    const Position goal = task == Subtask::Pickup ? std::get<PickupState>(st).gem_pos : grid.bank;
    for (Action a : kAllActions) {
      Transition& t = model.transitions[s][index_of(a)];
      const Position next = displaced(agent, a);
      if (!grid.contains(next)) {
        t = {kIllegalReward, static_cast<int>(s)};
      } else if (a == Action::NoOp) {
        t = {grid.noop_reward, static_cast<int>(s)};
      } else if (next == goal) {
        t = {task == Subtask::Pickup ? kAcquireReward : kDropReward, kTerminal};
      } else {
        const std::size_t key = task == Subtask::Pickup
                                    ? static_cast<std::size_t>(cell_id(goal)) * cells + cell_id(next)
                                    : static_cast<std::size_t>(cell_id(next));
        t = {kStepReward, index[key]};
      }
    }
  }
  return model;
}

}  // namespace

QTable value_iteration_oracle(const GridConfig& grid, Subtask task, double gamma, double tolerance,
                              std::size_t max_pairs) {
  if (grid.width < 3 || grid.height < 3 || !grid.contains(grid.bank))
    throw ConfigError("oracle needs a valid grid with the bank inside it");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");

  const auto cells = static_cast<std::size_t>(grid.cells());
  const std::size_t states = task == Subtask::Pickup ? (cells - 1) * cells : cells;
  if (states * kNumActions > max_pairs)
    throw StateSpaceTooLarge("the " + std::string(to_string(task)) + " subtask has " +
                             std::to_string(states * kNumActions) + " state-action pairs, above the limit of " +
                             std::to_string(max_pairs));

  const SubtaskModel model = build_model(grid, task);
  std::vector<double> value(model.states.size(), 0.0);
  std::vector<double> next_value(model.states.size(), 0.0);
  auto backup = [&](const Transition& t) {
    return t.next == kTerminal ? t.reward + 0.0 : t.reward + gamma * value[static_cast<std::size_t>(t.next)];
  };

  // Deterministic shortest-path structure: optimal values settle exactly after
  // as many sweeps as the longest optimal path, so the cap is generous.
  constexpr int kMaxSweeps = 1'000'000;
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    double change = 0.0;
    for (std::size_t s = 0; s < model.states.size(); ++s) {
      double best = backup(model.transitions[s][0]);
      for (std::size_t a = 1; a < kNumActions; ++a) best = std::max(best, backup(model.transitions[s][a]));
      next_value[s] = best;
      change = std::max(change, std::abs(best - value[s]));
    }
    value.swap(next_value);
    if (change < tolerance) break;
  }
  if (sweep == kMaxSweeps) throw ConfigError("value iteration did not converge");

  QTable q;
  for (std::size_t s = 0; s < model.states.size(); ++s)
    for (Action a : kAllActions) q.set(model.states[s], a, backup(model.transitions[s][index_of(a)]));
  return q;
}

TableSet oracle_tables(const GridConfig& grid, double gamma) {
  TableSet tables;
  tables.mode = {Method::OptionsQ, true};
  tables.pickup = value_iteration_oracle(grid, Subtask::Pickup, gamma);
  tables.drop = value_iteration_oracle(grid, Subtask::Drop, gamma);
  return tables;
}

double oracle_episode_return(const GridConfig& grid, double gamma) {
  if (!std::holds_alternative<FixedLayout>(grid.layout))
    throw ConfigError("the oracle episode return needs a fixed layout");
  return play_episode(grid, oracle_tables(grid, gamma), 0).total_reward;
}

}  // namespace macopt
