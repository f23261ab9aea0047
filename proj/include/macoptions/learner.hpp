#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "macoptions/abstraction.hpp"
#include "macoptions/environment.hpp"
#include "macoptions/planner.hpp"
#include "macoptions/random.hpp"

namespace macopt {

enum class OptionId : std::uint8_t { Pickup, Drop, Idle };
std::string_view to_string(OptionId o);

enum class Method : std::uint8_t { RandomPolicy, FlatQ, OptionsQ };
/// CLI spelling: "random", "q", "q-options".
std::string_view to_string(Method m);
/// Throws ParseError for unknown names.
Method parse_method(std::string_view name);

struct ControllerMode {
  Method method = Method::OptionsQ;
  bool planner_enabled = true;
  friend bool operator==(const ControllerMode&, const ControllerMode&) = default;
};

struct Hyperparams {
  double alpha = 0.1;
  double gamma = 0.95;
  double eps_start = 1.0;
  double eps_end = 0.05;
  /// Fraction of the training episodes over which epsilon anneals linearly.
  double eps_decay_fraction = 0.8;
  std::uint64_t seed = 0;
  /// When positive, the step size for a pair becomes 1 / (1 + visits / alpha_visit_decay)
  /// and `alpha` is ignored.
  double alpha_visit_decay = 0.0;

  void validate() const;
  double epsilon_at(int episode, int episodes) const;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// Tabular action values keyed by abstract state. Missing entries read as the default value.
class QTable {
 public:
  using Row = std::array<double, kNumActions>;

  explicit QTable(double default_value = 0.0) : default_value_(default_value) {}

  double get(const AbstractState& s, Action a) const;
  Row row(const AbstractState& s) const;
  double max_value(const AbstractState& s) const;
  void set(const AbstractState& s, Action a, double value);
  std::uint32_t visits(const AbstractState& s, Action a) const;
  /// Returns the old visit count.
  std::uint32_t record_visit(const AbstractState& s, Action a);

  bool contains(const AbstractState& s) const { return entries_.contains(s); }
  std::size_t num_states() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double default_value() const { return default_value_; }

  /// Calls fn(state, row) for every stored state, in unspecified order.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [s, e] : entries_) fn(s, e.values);
  }

  /// Order-independent digest of stored values (visit counts excluded).
  std::uint64_t content_hash() const;

  /// Value equality; visit counts are ignored.
  friend bool operator==(const QTable& a, const QTable& b);

 private:
  struct Entry {
    Row values;
    std::array<std::uint32_t, kNumActions> visits{};
  };
  Entry& entry(const AbstractState& s);

  std::unordered_map<AbstractState, Entry, AbstractStateHash> entries_;
  double default_value_;
};

/// The central controller's tables. Which ones are used depends on `mode`:
/// FlatQ uses `flat`, OptionsQ uses `pickup` and `drop`, RandomPolicy none.
struct TableSet {
  ControllerMode mode;
  QTable flat;
  QTable pickup;
  QTable drop;

  std::uint64_t content_hash() const;
  friend bool operator==(const TableSet&, const TableSet&) = default;
};

/// Argmax over the five actions, ties to the lowest index.
Action greedy_action(const QTable& q, const AbstractState& s);

/// Epsilon-greedy. Draws from `rng` only when epsilon > 0.
Action select_action(const QTable& q, const AbstractState& s, double epsilon, Rng& rng);

/// One-step Q-learning update of q(s, a). When `terminal` the successor row is
/// never read. Returns the new value.
double td_update(QTable& q, const AbstractState& s, Action a, double reward, const AbstractState& s_next,
                 bool terminal, const Hyperparams& h);

/// Drop when carrying. Otherwise Pickup when assigned, or always when the
/// planner is disabled. Idle for free agents under a planner.
OptionId option_for_agent(const WorldState& state, int agent, const Assignment& assignment,
                          bool planner_enabled = true);

struct AgentTurn {
  int agent = 0;
  OptionId option = OptionId::Idle;
  Action action = Action::NoOp;
  StepOutcome outcome;
  /// A table update was made for this turn.
  bool learned = false;
};

struct ControllerStep {
  WorldState state;
  Assignment assignment;
  std::vector<AgentTurn> turns;
  int planner_calls = 0;
};

struct ControllerContext {
  const GridConfig& grid;
  ControllerMode mode;
  const Hyperparams& hyper;
  double epsilon = 0.0;
};

/// One timestep: every agent acts in ascending index and the executing option's
/// table is updated after each move. The step counter advances once at the end.
ControllerStep controller_step(const WorldState& state, const ControllerContext& ctx, TableSet& tables,
                               Assignment assignment, Rng& rng);

/// Same as controller_step but never writes to the tables.
ControllerStep controller_act(const WorldState& state, const ControllerContext& ctx, const TableSet& tables,
                              Assignment assignment, Rng& rng);

using Policy = std::function<Action(const AbstractState&)>;

/// Greedy policy over `tables`, dispatching on the state's kind. The returned
/// function refers to `tables`, which must outlive it.
Policy greedy_policy(const TableSet& tables);

}  // namespace macopt
