#include "macoptions/planner.hpp"

#include <limits>
#include <string>

namespace macopt {

std::optional<int> Assignment::gem_of(int agent) const {
  if (auto it = agent_to_gem_.find(agent); it != agent_to_gem_.end()) return it->second;
  return std::nullopt;
}

std::optional<int> Assignment::agent_of(int gem) const {
  if (auto it = gem_to_agent_.find(gem); it != gem_to_agent_.end()) return it->second;
  return std::nullopt;
}

void Assignment::bind(int agent, int gem) {
  if (agent_to_gem_.contains(agent))
    throw ContractViolation("agent " + std::to_string(agent) + " already holds an assignment");
  if (gem_to_agent_.contains(gem)) throw ContractViolation("gem " + std::to_string(gem) + " is already assigned");
  agent_to_gem_.emplace(agent, gem);
  gem_to_agent_.emplace(gem, agent);
}

void Assignment::unbind_gem(int gem) {
  auto it = gem_to_agent_.find(gem);
  if (it == gem_to_agent_.end()) throw ContractViolation("gem " + std::to_string(gem) + " is not assigned");
  agent_to_gem_.erase(it->second);
  gem_to_agent_.erase(it);
}

bool Assignment::consistent_with(const WorldState& state) const {
  if (agent_to_gem_.size() != gem_to_agent_.size()) return false;
  for (const auto& [agent, gem] : agent_to_gem_) {
    auto back = gem_to_agent_.find(gem);
    if (back == gem_to_agent_.end() || back->second != agent) return false;
    if (agent < 0 || agent >= static_cast<int>(state.agents.size())) return false;
    if (gem < 0 || gem >= static_cast<int>(state.gems.size())) return false;
    const GemStatus& status = state.gems[static_cast<std::size_t>(gem)];
    if (std::holds_alternative<Dropped>(status)) return false;
    if (const auto* c = std::get_if<CarriedBy>(&status); c && c->agent != agent) return false;
  }
  for (std::size_t j = 0; j < state.gems.size(); ++j) {
    if (const auto* c = std::get_if<CarriedBy>(&state.gems[j])) {
      if (agent_of(static_cast<int>(j)) != c->agent) return false;
    }
  }
  return true;
}

Assignment assign(const WorldState& state, Assignment current) {
  const int agents = static_cast<int>(state.agents.size());
  const int gems = static_cast<int>(state.gems.size());
  for (int i = 0; i < agents; ++i) {
    if (current.gem_of(i)) continue;
    const Position at = state.agents[static_cast<std::size_t>(i)];
    int best = -1;
    int best_dist = std::numeric_limits<int>::max();
    for (int j = 0; j < gems; ++j) {
      const auto* g = std::get_if<OnGrid>(&state.gems[static_cast<std::size_t>(j)]);
      if (!g || current.agent_of(j)) continue;
      const int d = manhattan(at, g->cell);
      if (d < best_dist) {
        best = j;
        best_dist = d;
      }
    }
    if (best < 0) break;  // no unassigned gem left for anyone
    current.bind(i, best);
  }
  return current;
}

Assignment release(Assignment current, int gem) {
  current.unbind_gem(gem);
  return current;
}

}  // namespace macopt
