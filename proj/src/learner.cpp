#include "macoptions/learner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <type_traits>

namespace macopt {

std::string_view to_string(OptionId o) {
  switch (o) {
    case OptionId::Pickup: return "pickup";
    case OptionId::Drop: return "drop";
    case OptionId::Idle: return "idle";
  }
  return "?";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::RandomPolicy: return "random";
    case Method::FlatQ: return "q";
    case Method::OptionsQ: return "q-options";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "random") return Method::RandomPolicy;
  if (name == "q") return Method::FlatQ;
  if (name == "q-options") return Method::OptionsQ;
  throw ParseError("unknown method '" + std::string(name) + "' (expected random, q or q-options)");
}

void Hyperparams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(eps_end >= 0.0 && eps_end <= eps_start && eps_start <= 1.0))
    throw ConfigError("need 0 <= eps_end <= eps_start <= 1");
  if (!(eps_decay_fraction >= 0.0 && eps_decay_fraction <= 1.0))
    throw ConfigError("eps_decay_fraction must lie in [0, 1]");
  if (alpha_visit_decay < 0.0) throw ConfigError("alpha_visit_decay must be non-negative");
}

double Hyperparams::epsilon_at(int episode, int episodes) const {
  const double span = eps_decay_fraction * episodes;
  if (span <= 0.0 || episode >= span) return eps_end;
  return eps_start + (eps_end - eps_start) * (episode / span);
}

// QTable

QTable::Entry& QTable::entry(const AbstractState& s) {
  auto it = entries_.find(s);
  if (it == entries_.end()) {
    Entry e;
    e.values.fill(default_value_);
    it = entries_.emplace(s, e).first;
  }
  return it->second;
}

double QTable::get(const AbstractState& s, Action a) const {
  auto it = entries_.find(s);
  return it == entries_.end() ? default_value_ : it->second.values[index_of(a)];
}

QTable::Row QTable::row(const AbstractState& s) const {
  auto it = entries_.find(s);
  if (it != entries_.end()) return it->second.values;
  Row r;
  r.fill(default_value_);
  return r;
}

double QTable::max_value(const AbstractState& s) const {
  auto it = entries_.find(s);
  if (it == entries_.end()) return default_value_;
  return *std::max_element(it->second.values.begin(), it->second.values.end());
}

void QTable::set(const AbstractState& s, Action a, double value) { entry(s).values[index_of(a)] = value; }

std::uint32_t QTable::visits(const AbstractState& s, Action a) const {
  auto it = entries_.find(s);
  return it == entries_.end() ? 0 : it->second.visits[index_of(a)];
}

std::uint32_t QTable::record_visit(const AbstractState& s, Action a) { return entry(s).visits[index_of(a)]++; }

std::uint64_t QTable::content_hash() const {
  std::uint64_t sum = 0;
  const AbstractStateHash hasher;
  for (const auto& [s, e] : entries_) {
    std::uint64_t h = mix64(hasher(s));
    for (double v : e.values) h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
    sum += h;
  }
  return mix64(sum ^ entries_.size());
}

bool operator==(const QTable& a, const QTable& b) {
  if (a.default_value_ != b.default_value_ || a.entries_.size() != b.entries_.size()) return false;
  for (const auto& [s, e] : a.entries_) {
    auto it = b.entries_.find(s);
    if (it == b.entries_.end() || it->second.values != e.values) return false;
  }
  return true;
}

std::uint64_t TableSet::content_hash() const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(mode.method) * 2 + (mode.planner_enabled ? 1 : 0));
  h = mix64(h ^ flat.content_hash());
  h = mix64(h ^ pickup.content_hash());
  return mix64(h ^ drop.content_hash());
}

// Action selection and updates

Action greedy_action(const QTable& q, const AbstractState& s) {
  const QTable::Row r = q.row(s);
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumActions; ++i)
    if (r[i] > r[best]) best = i;
  return kAllActions[best];
}

Action select_action(const QTable& q, const AbstractState& s, double epsilon, Rng& rng) {
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
      std::uniform_int_distribution<std::size_t> pick(0, kNumActions - 1);
      return kAllActions[pick(rng)];
    }
  }
  return greedy_action(q, s);
}

double td_update(QTable& q, const AbstractState& s, Action a, double reward, const AbstractState& s_next,
                 bool terminal, const Hyperparams& h) {
  const double bootstrap = terminal ? 0.0 : h.gamma * q.max_value(s_next);
  const std::uint32_t seen = q.record_visit(s, a);
  const double step = h.alpha_visit_decay > 0.0 ? 1.0 / (1.0 + seen / h.alpha_visit_decay) : h.alpha;
  const double old = q.get(s, a);
  const double updated = old + step * (reward + bootstrap - old);
  q.set(s, a, updated);
  return updated;
}

OptionId option_for_agent(const WorldState& state, int agent, const Assignment& assignment, bool planner_enabled) {
  if (state.is_carrying(agent)) return OptionId::Drop;
  if (!planner_enabled || assignment.gem_of(agent)) return OptionId::Pickup;
  return OptionId::Idle;
}

// Controller

namespace {

template <typename Set>
auto* table_for(Set& tables, Method method, OptionId option) {
  using Table = std::conditional_t<std::is_const_v<Set>, const QTable, QTable>;
  switch (method) {
    case Method::RandomPolicy: return static_cast<Table*>(nullptr);
    case Method::FlatQ: return &tables.flat;
    case Method::OptionsQ: return option == OptionId::Drop ? &tables.drop : &tables.pickup;
  }
  return static_cast<Table*>(nullptr);
}

AbstractState observe(const WorldState& state, const GridConfig& grid, ControllerMode mode, OptionId option,
                      int agent, const Assignment& assignment) {
  // Without a planner every option sees all gems.
  if (!mode.planner_enabled) return abstract_no_planner(state, agent);
  if (mode.method == Method::FlatQ) return abstract_flat(state, agent, assignment, grid.bank);
  if (option == OptionId::Drop) return abstract_drop(state, agent);
  return abstract_pickup(state, agent, *assignment.gem_of(agent));
}

// Subgoal reached: the option ends and its update does not bootstrap.
bool ends_option(Method method, OptionId option, StepEvent event) {
  if (method == Method::FlatQ) return event == StepEvent::Dropped;
  return (option == OptionId::Pickup && event == StepEvent::Acquired) ||
         (option == OptionId::Drop && event == StepEvent::Dropped);
}

ControllerStep run_controller(const WorldState& state, const ControllerContext& ctx, const TableSet& tables,
                              TableSet* learn, Assignment assignment, Rng& rng) {
  const ControllerMode mode = ctx.mode;
  const int n = static_cast<int>(state.agents.size());
  ControllerStep out{state, std::move(assignment), {}, 0};
  out.turns.reserve(static_cast<std::size_t>(n));

  for (int i = 0; i < n; ++i) {
    WorldState& world = out.state;
    if (mode.planner_enabled) {
      out.assignment = assign(world, std::move(out.assignment));
      ++out.planner_calls;
    }
    AgentTurn turn;
    turn.agent = i;
    turn.option = option_for_agent(world, i, out.assignment, mode.planner_enabled);
    const std::optional<int> target = mode.planner_enabled ? out.assignment.gem_of(i) : std::nullopt;

    if (turn.option == OptionId::Idle) {
      turn.action = Action::NoOp;
      turn.outcome = apply_step(world, ctx.grid, i, turn.action, target);
      out.turns.push_back(turn);
      continue;
    }

    if (mode.method == Method::RandomPolicy) {
      std::uniform_int_distribution<std::size_t> pick(0, kNumActions - 1);
      turn.action = kAllActions[pick(rng)];
      turn.outcome = apply_step(world, ctx.grid, i, turn.action, target);
    } else {
      const QTable& q = *table_for(tables, mode.method, turn.option);
      const AbstractState s = observe(world, ctx.grid, mode, turn.option, i, out.assignment);
      turn.action = select_action(q, s, ctx.epsilon, rng);
      turn.outcome = apply_step(world, ctx.grid, i, turn.action, target);
      if (learn) {
        QTable& writable = *table_for(*learn, mode.method, turn.option);
        if (ends_option(mode.method, turn.option, turn.outcome.event)) {
          td_update(writable, s, turn.action, turn.outcome.reward, s, true, ctx.hyper);
        } else {
          const AbstractState next = observe(world, ctx.grid, mode, turn.option, i, out.assignment);
          td_update(writable, s, turn.action, turn.outcome.reward, next, false, ctx.hyper);
        }
        turn.learned = true;
      }
    }

    if (turn.outcome.event == StepEvent::Dropped && mode.planner_enabled)
      out.assignment = release(std::move(out.assignment), turn.outcome.gem);
    out.turns.push_back(turn);
  }
  out.state = advance_step(std::move(out.state));
  return out;
}

}  // namespace

ControllerStep controller_step(const WorldState& state, const ControllerContext& ctx, TableSet& tables,
                               Assignment assignment, Rng& rng) {
  return run_controller(state, ctx, tables, &tables, std::move(assignment), rng);
}

ControllerStep controller_act(const WorldState& state, const ControllerContext& ctx, const TableSet& tables,
                              Assignment assignment, Rng& rng) {
  return run_controller(state, ctx, tables, nullptr, std::move(assignment), rng);
}

Policy greedy_policy(const TableSet& tables) {
  return [&tables](const AbstractState& s) -> Action {
    const bool options = tables.mode.method == Method::OptionsQ;
    return std::visit(
        [&](const auto& v) -> Action {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, DropState>) {
            return greedy_action(tables.drop, s);
          } else if constexpr (std::is_same_v<T, PickupState>) {
            return greedy_action(tables.pickup, s);
          } else if constexpr (std::is_same_v<T, FlatState>) {
            return greedy_action(tables.flat, s);
          } else {
            if (!options) return greedy_action(tables.flat, s);
            return greedy_action(v.carrying ? tables.drop : tables.pickup, s);
          }
        },
        s);
  };
}

}  // namespace macopt
