#include "macoptions/environment.hpp"

#include <algorithm>
#include <numeric>

#include "macoptions/random.hpp"

namespace macopt {

std::string to_string(Position p) {
  return "(" + std::to_string(p.row) + "," + std::to_string(p.col) + ")";
}

Action action_from_index(std::size_t i) {
  if (i >= kNumActions) throw ContractViolation("action index out of range: " + std::to_string(i));
  return kAllActions[i];
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Up: return "up";
    case Action::Down: return "down";
    case Action::Left: return "left";
    case Action::Right: return "right";
    case Action::NoOp: return "no-op";
  }
  return "?";
}

std::string_view to_string(StepEvent e) {
  switch (e) {
    case StepEvent::Illegal: return "illegal";
    case StepEvent::Acquired: return "acquired";
    case StepEvent::Dropped: return "dropped";
    case StepEvent::Moved: return "moved";
    case StepEvent::Idle: return "idle";
  }
  return "?";
}

namespace {

std::vector<Position> row_major(int width, int height) {
  std::vector<Position> cells;
  cells.reserve(static_cast<std::size_t>(width * height));
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) cells.push_back({r, c});
  return cells;
}

// Picks `count` cells from `preferred` then row-major order, skipping
// anything in `taken`. Falls back to reusing cells when the grid runs out.
std::vector<Position> pick_cells(const std::vector<Position>& preferred, int width, int height,
                                 int count, std::vector<Position>& taken, bool allow_reuse) {
  std::vector<Position> order = preferred;
  for (Position p : row_major(width, height)) order.push_back(p);

  std::vector<Position> out;
  for (Position p : order) {
    if (static_cast<int>(out.size()) == count) break;
    if (p.row < 0 || p.row >= height || p.col < 0 || p.col >= width) continue;
    if (std::find(taken.begin(), taken.end(), p) != taken.end()) continue;
    out.push_back(p);
    taken.push_back(p);
  }
  if (allow_reuse && !out.empty()) {
    for (std::size_t i = 0; static_cast<int>(out.size()) < count; ++i) out.push_back(out[i % out.size()]);
  }
  return out;
}

}  // namespace

FixedLayout canonical_layout(int width, int height, int num_agents, int num_gems, Position bank) {
  const int last_r = height - 1;
  const int last_c = width - 1;
  const int mid_r = last_r / 2;
  const int mid_c = last_c / 2;

  FixedLayout layout;
  std::vector<Position> taken{bank};
  layout.gems = pick_cells({{0, last_c}, {last_r, 0}, {mid_r, 0}, {mid_r, last_c}, {0, mid_c}, {last_r, mid_c}},
                           width, height, num_gems, taken, false);
  // Agents may share cells with each other but not start on a gem.
  std::vector<Position> agent_taken = layout.gems;
  agent_taken.push_back(bank);
  layout.agents = pick_cells({{0, 0}, {last_r, last_c}, {0, last_c}, {last_r, 0}}, width, height, num_agents,
                             agent_taken, true);
  return layout;
}

GridConfig::GridConfig() : layout(canonical_layout(width, height, num_agents, num_gems, bank)) {}

GridConfig GridConfig::centered(int width, int height, int num_agents, int num_gems, int step_limit) {
  GridConfig cfg;
  cfg.width = width;
  cfg.height = height;
  cfg.bank = {(height - 1) / 2, (width - 1) / 2};
  cfg.num_agents = num_agents;
  cfg.num_gems = num_gems;
  cfg.step_limit = step_limit;
  if (width >= 1 && height >= 1 && num_agents >= 0 && num_gems >= 0)
    cfg.layout = canonical_layout(width, height, num_agents, num_gems, cfg.bank);
  return cfg;
}

void GridConfig::validate() const {
  if (width < 3 || height < 3)
    throw ConfigError("grid must be at least 3x3, got " + std::to_string(width) + "x" + std::to_string(height));
  if (bank.row <= 0 || bank.row >= height - 1 || bank.col <= 0 || bank.col >= width - 1)
    throw ConfigError("bank " + to_string(bank) + " must lie strictly inside the grid");
  if (num_agents < 1) throw ConfigError("need at least one agent");
  if (num_gems < 1) throw ConfigError("need at least one gem");
  if (step_limit < 1) throw ConfigError("step limit must be positive");
  if (noop_reward != 0.0 && noop_reward != kStepReward)
    throw ConfigError("noop reward must be 0 or -1");

  if (const auto* fixed = std::get_if<FixedLayout>(&layout)) {
    if (static_cast<int>(fixed->agents.size()) != num_agents)
      throw ConfigError("layout lists " + std::to_string(fixed->agents.size()) + " agents, expected " +
                        std::to_string(num_agents));
    if (static_cast<int>(fixed->gems.size()) != num_gems)
      throw ConfigError("layout lists " + std::to_string(fixed->gems.size()) + " gems, expected " +
                        std::to_string(num_gems));
    for (std::size_t i = 0; i < fixed->agents.size(); ++i)
      if (!contains(fixed->agents[i]))
        throw ConfigError("agent " + std::to_string(i) + " at " + to_string(fixed->agents[i]) + " is off the grid");
    for (std::size_t j = 0; j < fixed->gems.size(); ++j) {
      const Position g = fixed->gems[j];
      if (!contains(g)) throw ConfigError("gem " + std::to_string(j) + " at " + to_string(g) + " is off the grid");
      if (g == bank) throw ConfigError("gem " + std::to_string(j) + " placed on the bank");
      for (std::size_t k = 0; k < j; ++k)
        if (fixed->gems[k] == g)
          throw ConfigError("gems " + std::to_string(k) + " and " + std::to_string(j) + " share cell " + to_string(g));
    }
  } else if (num_agents + num_gems > cells() - 1) {
    throw ConfigError("random layout needs " + std::to_string(num_agents + num_gems) +
                      " free cells besides the bank");
  }
}

std::optional<int> WorldState::carried_gem(int agent) const {
  for (std::size_t j = 0; j < gems.size(); ++j)
    if (const auto* c = std::get_if<CarriedBy>(&gems[j]); c && c->agent == agent) return static_cast<int>(j);
  return std::nullopt;
}

std::optional<Position> WorldState::gem_cell(int gem) const {
  if (const auto* g = std::get_if<OnGrid>(&gems.at(static_cast<std::size_t>(gem)))) return g->cell;
  return std::nullopt;
}

int WorldState::count_on_grid() const {
  return static_cast<int>(std::count_if(gems.begin(), gems.end(),
                                        [](const GemStatus& g) { return std::holds_alternative<OnGrid>(g); }));
}

int WorldState::count_carried() const {
  return static_cast<int>(std::count_if(gems.begin(), gems.end(),
                                        [](const GemStatus& g) { return std::holds_alternative<CarriedBy>(g); }));
}

int WorldState::count_dropped() const {
  return static_cast<int>(std::count_if(gems.begin(), gems.end(),
                                        [](const GemStatus& g) { return std::holds_alternative<Dropped>(g); }));
}

WorldState reset(const GridConfig& config, std::uint64_t seed) {
  config.validate();
  WorldState state;
  if (const auto* fixed = std::get_if<FixedLayout>(&config.layout)) {
    state.agents = fixed->agents;
    for (Position g : fixed->gems) state.gems.emplace_back(OnGrid{g});
    return state;
  }

  std::vector<Position> free_cells;
  for (Position p : row_major(config.width, config.height))
    if (p != config.bank) free_cells.push_back(p);
  Rng rng(derive_seed(seed, kLayoutStream, 0));
  std::shuffle(free_cells.begin(), free_cells.end(), rng);
  const auto gems = static_cast<std::size_t>(config.num_gems);
  for (std::size_t j = 0; j < gems; ++j) state.gems.emplace_back(OnGrid{free_cells[j]});
  for (int i = 0; i < config.num_agents; ++i) state.agents.push_back(free_cells[gems + static_cast<std::size_t>(i)]);
  return state;
}

bool is_legal(const WorldState& state, const GridConfig& config, int agent, Action action) {
  return config.contains(displaced(state.agents.at(static_cast<std::size_t>(agent)), action));
}

StepOutcome apply_step(WorldState& state, const GridConfig& config, int agent, Action action,
                       std::optional<int> assigned_gem) {
  if (agent < 0 || agent >= static_cast<int>(state.agents.size()))
    throw ContractViolation("agent index " + std::to_string(agent) + " out of range");
  const std::optional<int> carried = state.carried_gem(agent);
  if (assigned_gem) {
    const auto& status = state.gems.at(static_cast<std::size_t>(*assigned_gem));
    if (std::holds_alternative<Dropped>(status))
      throw ContractViolation("gem " + std::to_string(*assigned_gem) + " is assigned but already dropped");
    if (const auto* c = std::get_if<CarriedBy>(&status); c && c->agent != agent)
      throw ContractViolation("gem " + std::to_string(*assigned_gem) + " is carried by another agent");
  }

  Position& pos = state.agents[static_cast<std::size_t>(agent)];
  const Position next = displaced(pos, action);
  if (!config.contains(next)) return {kIllegalReward, StepEvent::Illegal, -1};
  if (action == Action::NoOp) return {config.noop_reward, StepEvent::Idle, -1};

  pos = next;
  if (carried) {
    if (pos == config.bank) {
      state.gems[static_cast<std::size_t>(*carried)] = Dropped{};
      return {kDropReward, StepEvent::Dropped, *carried};
    }
    return {kStepReward, StepEvent::Moved, -1};
  }

  if (assigned_gem) {
    auto& status = state.gems[static_cast<std::size_t>(*assigned_gem)];
    if (const auto* g = std::get_if<OnGrid>(&status); g && g->cell == pos) {
      status = CarriedBy{agent};
      return {kAcquireReward, StepEvent::Acquired, *assigned_gem};
    }
    return {kStepReward, StepEvent::Moved, -1};
  }

  for (std::size_t j = 0; j < state.gems.size(); ++j) {
    if (const auto* g = std::get_if<OnGrid>(&state.gems[j]); g && g->cell == pos) {
      state.gems[j] = CarriedBy{agent};
      return {kAcquireReward, StepEvent::Acquired, static_cast<int>(j)};
    }
  }
  return {kStepReward, StepEvent::Moved, -1};
}

std::pair<WorldState, StepOutcome> step_agent(WorldState state, const GridConfig& config, int agent,
                                              Action action, std::optional<int> assigned_gem) {
  const StepOutcome outcome = apply_step(state, config, agent, action, assigned_gem);
  return {std::move(state), outcome};
}

WorldState advance_step(WorldState state) {
  ++state.step;
  return state;
}

bool is_terminal(const WorldState& state, const GridConfig& config) {
  return state.step >= config.step_limit || state.count_dropped() == static_cast<int>(state.gems.size());
}

}  // namespace macopt
