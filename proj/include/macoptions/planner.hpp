#pragma once

#include <map>
#include <optional>

#include "macoptions/environment.hpp"

namespace macopt {

/// Injective agent <-> gem allocation. Both directions are kept in sync.
class Assignment {
 public:
  std::optional<int> gem_of(int agent) const;
  std::optional<int> agent_of(int gem) const;

  /// Throws ContractViolation if either side is already bound.
  void bind(int agent, int gem);
  /// Throws ContractViolation if the gem is not assigned.
  void unbind_gem(int gem);

  bool empty() const { return agent_to_gem_.empty(); }
  std::size_t size() const { return agent_to_gem_.size(); }
  const std::map<int, int>& agent_to_gem() const { return agent_to_gem_; }
  const std::map<int, int>& gem_to_agent() const { return gem_to_agent_; }

  /// Injective both ways, no dropped gem assigned, carried gems assigned to their carrier.
  bool consistent_with(const WorldState& state) const;

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::map<int, int> agent_to_gem_;
  std::map<int, int> gem_to_agent_;
};

constexpr int manhattan(Position a, Position b) {
  const int dr = a.row > b.row ? a.row - b.row : b.row - a.row;
  const int dc = a.col > b.col ? a.col - b.col : b.col - a.col;
  return dr + dc;
}

/// Gives every free agent, in ascending index, the nearest unassigned gem
/// still on the grid. Ties go to the lowest gem index. Existing pairs are kept.
Assignment assign(const WorldState& state, Assignment current);

/// Drops the pair holding `gem`. Throws ContractViolation if it is unassigned.
Assignment release(Assignment current, int gem);

}  // namespace macopt
