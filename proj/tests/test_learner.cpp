#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

namespace macopt {
namespace {

using testing::make_state;

const AbstractState kS = DropState{{1, 1}};
const AbstractState kNext = DropState{{1, 2}};

QTable row_table(const AbstractState& s, std::array<double, kNumActions> values) {
  QTable q;
  for (std::size_t i = 0; i < kNumActions; ++i) q.set(s, kAllActions[i], values[i]);
  return q;
}

TEST(SelectAction, GreedyPicksArgmax) {
  const QTable q = row_table(kS, {0.1, 0.5, 0.2, 0.0, 0.0});
  Rng rng(1);
  EXPECT_EQ(select_action(q, kS, 0.0, rng), Action::Down);
}

TEST(SelectAction, TiesGoToLowestIndex) {
  Rng rng(1);
  EXPECT_EQ(select_action(QTable{}, kS, 0.0, rng), Action::Up);
  EXPECT_EQ(greedy_action(row_table(kS, {0, 3, 3, 1, 3}), kS), Action::Down);
}

TEST(SelectAction, GreedyDoesNotDraw) {
  Rng rng(9);
  const Rng before = rng;
  select_action(QTable{}, kS, 0.0, rng);
  EXPECT_EQ(rng, before);
}

TEST(SelectAction, FullExplorationIsUniform) {
  const QTable q = row_table(kS, {9, 0, 0, 0, 0});
  Rng rng(12345);
  constexpr int kDraws = 100000;
  std::array<int, kNumActions> counts{};
  for (int i = 0; i < kDraws; ++i) ++counts[index_of(select_action(q, kS, 1.0, rng))];
  const double sigma = std::sqrt(0.2 * 0.8 / kDraws);
  for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / kDraws, 0.2, 3 * sigma);
}

TEST(TdUpdate, BootstrapsFromSuccessor) {
  QTable q = row_table(kNext, {10, 0, 0, 0, 0});
  Hyperparams h;
  h.alpha = 0.5;
  h.gamma = 0.9;
  EXPECT_DOUBLE_EQ(td_update(q, kS, Action::Right, -1.0, kNext, false, h), 4.0);
  EXPECT_DOUBLE_EQ(q.get(kS, Action::Right), 4.0);
}

TEST(TdUpdate, TerminalIgnoresSuccessor) {
  QTable q;
  q.set(kS, Action::Right, 2.0);
  Hyperparams h;
  h.alpha = 0.1;
  EXPECT_DOUBLE_EQ(td_update(q, kS, Action::Right, 500.0, kNext, true, h), 51.8);

  QTable huge = row_table(kNext, {1e9, 1e9, 1e9, 1e9, 1e9});
  huge.set(kS, Action::Right, 2.0);
  EXPECT_DOUBLE_EQ(td_update(huge, kS, Action::Right, 500.0, kNext, true, h), 51.8);

  QTable fresh;
  td_update(fresh, kS, Action::Up, 50.0, kNext, true, h);
  EXPECT_FALSE(fresh.contains(kNext));
}

TEST(TdUpdate, ZeroStepSizeLeavesValue) {
  QTable q = row_table(kNext, {7, 0, 0, 0, 0});
  q.set(kS, Action::Left, 3.0);
  Hyperparams h;
  h.alpha = 0.0;
  td_update(q, kS, Action::Left, 500.0, kNext, false, h);
  td_update(q, kS, Action::Left, -5.0, kNext, true, h);
  EXPECT_EQ(q.get(kS, Action::Left), 3.0);
  EXPECT_EQ(q.get(kNext, Action::Up), 7.0);
}

TEST(TdUpdate, VisitCountStepSize) {
  QTable q;
  Hyperparams h;
  h.alpha_visit_decay = 100.0;
  // First visit uses step 1, so the value jumps to the target.
  EXPECT_DOUBLE_EQ(td_update(q, kS, Action::Up, 10.0, kNext, true, h), 10.0);
  EXPECT_EQ(q.visits(kS, Action::Up), 1u);
  // Second visit: step 1 / (1 + 1/100).
  const double step = 1.0 / (1.0 + 1.0 / 100.0);
  EXPECT_DOUBLE_EQ(td_update(q, kS, Action::Up, 0.0, kNext, true, h), 10.0 + step * (0.0 - 10.0));
}

TEST(HyperparamsTest, EpsilonSchedule) {
  const Hyperparams h;
  EXPECT_DOUBLE_EQ(h.epsilon_at(0, 100), 1.0);
  EXPECT_DOUBLE_EQ(h.epsilon_at(40, 100), 1.0 + (0.05 - 1.0) * 0.5);
  EXPECT_DOUBLE_EQ(h.epsilon_at(80, 100), 0.05);
  EXPECT_DOUBLE_EQ(h.epsilon_at(99, 100), 0.05);
  Hyperparams bad;
  bad.eps_start = 2.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.eps_end = 0.5;
  bad.eps_start = 0.4;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(OptionForAgent, Rules) {
  const WorldState carrying = make_state({{0, 0}}, {CarriedBy{0}});
  EXPECT_EQ(option_for_agent(carrying, 0, {}), OptionId::Drop);

  const WorldState fetching = make_state({{0, 0}}, {Dropped{}, Dropped{}, OnGrid{{3, 3}}});
  Assignment a;
  a.bind(0, 2);
  EXPECT_EQ(option_for_agent(fetching, 0, a), OptionId::Pickup);

  const WorldState idle = make_state({{0, 0}, {1, 1}}, {OnGrid{{3, 3}}});
  Assignment other;
  other.bind(1, 0);
  EXPECT_EQ(option_for_agent(idle, 0, other), OptionId::Idle);
  EXPECT_EQ(option_for_agent(idle, 0, other, false), OptionId::Pickup);
}

TEST(ControllerStep, PickupEndsWithTerminalUpdate) {
  const GridConfig g = testing::fixed_grid(5, 5, {2, 2}, {{1, 0}}, {{0, 0}});
  const Hyperparams h;
  TableSet tables;
  tables.mode = {Method::OptionsQ, true};
  Rng rng(0);
  const ControllerContext ctx{g, tables.mode, h, 0.0};
  const ControllerStep step = controller_step(reset(g, 0), ctx, tables, {}, rng);

  ASSERT_EQ(step.turns.size(), 1u);
  EXPECT_EQ(step.turns[0].option, OptionId::Pickup);
  EXPECT_EQ(step.turns[0].action, Action::Up);
  EXPECT_EQ(step.turns[0].outcome.event, StepEvent::Acquired);
  EXPECT_TRUE(step.turns[0].learned);
  // Terminal target is the reward alone: 0 + 0.1 * (50 - 0).
  EXPECT_DOUBLE_EQ(tables.pickup.get(PickupState{{1, 0}, {0, 0}}, Action::Up), 5.0);
  EXPECT_EQ(tables.pickup.num_states(), 1u);
  EXPECT_TRUE(tables.drop.empty());
  EXPECT_EQ(step.state.step, 1);
  EXPECT_EQ(step.assignment.gem_of(0), 0);
}

TEST(ControllerStep, DropReleasesAssignment) {
  const GridConfig g = testing::fixed_grid(5, 5, {2, 2}, {{2, 1}}, {{0, 0}});
  WorldState s = reset(g, 0);
  s.gems[0] = CarriedBy{0};
  Assignment a;
  a.bind(0, 0);
  const Hyperparams h;
  TableSet tables;
  tables.mode = {Method::OptionsQ, true};
  tables.drop.set(DropState{{2, 1}}, Action::Right, 1.0);
  Rng rng(0);
  const ControllerStep step = controller_step(s, {g, tables.mode, h, 0.0}, tables, a, rng);
  EXPECT_EQ(step.turns[0].outcome.event, StepEvent::Dropped);
  EXPECT_TRUE(step.assignment.empty());
  EXPECT_DOUBLE_EQ(tables.drop.get(DropState{{2, 1}}, Action::Right), 1.0 + 0.1 * (500.0 - 1.0));
  EXPECT_TRUE(tables.pickup.empty());
}

TEST(ControllerStep, RandomPolicyIsReproducibleAndLearnsNothing) {
  const GridConfig g = GridConfig::centered(5, 5, 2, 2, 50);
  const Hyperparams h;
  auto run = [&] {
    TableSet tables;
    tables.mode = {Method::RandomPolicy, true};
    Rng rng(77);
    WorldState s = reset(g, 0);
    Assignment a;
    std::vector<WorldState> trace;
    while (!is_terminal(s, g)) {
      ControllerStep step = controller_step(s, {g, tables.mode, h, 1.0}, tables, a, rng);
      for (const auto& t : step.turns) EXPECT_FALSE(t.learned);
      s = step.state;
      a = step.assignment;
      trace.push_back(s);
    }
    EXPECT_TRUE(tables.flat.empty() && tables.pickup.empty() && tables.drop.empty());
    return trace;
  };
  EXPECT_EQ(run(), run());
}

TEST(ControllerStep, SurplusAgentIdles) {
  const GridConfig g = testing::fixed_grid(5, 5, {2, 2}, {{0, 0}, {4, 4}}, {{0, 4}});
  const Hyperparams h;
  TableSet tables;
  tables.mode = {Method::OptionsQ, true};
  Rng rng(3);
  const ControllerStep step = controller_step(reset(g, 0), {g, tables.mode, h, 0.5}, tables, {}, rng);
  ASSERT_EQ(step.turns.size(), 2u);
  int learning = 0;
  for (const auto& t : step.turns) {
    if (t.option == OptionId::Idle) {
      EXPECT_EQ(t.action, Action::NoOp);
      EXPECT_FALSE(t.learned);
    } else {
      EXPECT_TRUE(t.learned);
      ++learning;
    }
  }
  EXPECT_EQ(learning, 1);
  EXPECT_EQ(tables.pickup.num_states(), 1u);
}

TEST(ControllerStep, PlannerOffNeverCallsPlanner) {
  const GridConfig g = GridConfig::centered(5, 5, 2, 2, 40);
  const Hyperparams h;
  TableSet tables;
  tables.mode = {Method::OptionsQ, false};
  Rng rng(1);
  WorldState s = reset(g, 0);
  while (!is_terminal(s, g)) {
    ControllerStep step = controller_step(s, {g, tables.mode, h, 1.0}, tables, {}, rng);
    EXPECT_EQ(step.planner_calls, 0);
    EXPECT_TRUE(step.assignment.empty());
    for (const auto& t : step.turns) EXPECT_NE(t.option, OptionId::Idle);
    s = step.state;
  }
  tables.pickup.for_each([](const AbstractState& st, const QTable::Row&) {
    EXPECT_TRUE(std::holds_alternative<NoPlannerState>(st));
  });
}

TEST(ControllerProperties, OnlyExecutingTableChanges) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    GridConfig g = GridConfig::centered(5, 5, 1, 2, 80);
    g.layout = RandomLayout{};
    const Hyperparams h;
    TableSet tables;
    tables.mode = {Method::OptionsQ, trial % 2 == 0};
    Rng rng(gen());
    WorldState s = reset(g, gen());
    Assignment a;
    while (!is_terminal(s, g)) {
      const std::uint64_t pickup_before = tables.pickup.content_hash();
      const std::uint64_t drop_before = tables.drop.content_hash();
      ControllerStep step = controller_step(s, {g, tables.mode, h, 0.7}, tables, a, rng);
      const OptionId option = step.turns[0].option;
      if (option == OptionId::Pickup) ASSERT_EQ(tables.drop.content_hash(), drop_before);
      if (option == OptionId::Drop) ASSERT_EQ(tables.pickup.content_hash(), pickup_before);
      ASSERT_TRUE(tables.flat.empty());
      s = step.state;
      a = step.assignment;
    }
  }
}

TEST(ControllerProperties, ValuesStayBounded) {
  for (Method method : {Method::FlatQ, Method::OptionsQ})
    for (bool planner : {true, false}) {
      RunConfig cfg;
      cfg.grid = GridConfig::centered(5, 5, 2, 2, 150);
      cfg.mode = {method, planner};
      cfg.episodes = 300;
      cfg.hyper.seed = 4;
      cfg.hyper.alpha = 0.5;
      const TableSet t = train(cfg).tables;
      const double lo = kIllegalReward / (1.0 - cfg.hyper.gamma);
      const double hi = kDropReward / (1.0 - cfg.hyper.gamma);
      for (const QTable* q : {&t.flat, &t.pickup, &t.drop})
        q->for_each([&](const AbstractState&, const QTable::Row& row) {
          for (double v : row) {
            ASSERT_GE(v, lo);
            ASSERT_LE(v, hi);
          }
        });
    }
}

TEST(GreedyPolicy, Dispatch) {
  TableSet tables;
  tables.mode = {Method::OptionsQ, true};
  const Policy fresh = greedy_policy(tables);
  EXPECT_EQ(fresh(PickupState{{0, 0}, {1, 1}}), Action::Up);
  EXPECT_EQ(fresh(DropState{{0, 0}}), Action::Up);

  const AbstractState p = PickupState{{2, 2}, {4, 4}};
  const AbstractState d = DropState{{2, 2}};
  tables.pickup.set(p, Action::Right, 3.0);
  tables.drop.set(d, Action::Left, 2.0);
  const Policy policy = greedy_policy(tables);
  EXPECT_EQ(policy(p), Action::Right);
  EXPECT_EQ(policy(d), Action::Left);

  tables.drop.set(NoPlannerState{{1, 1}, true, {std::nullopt}}, Action::Down, 1.0);
  tables.pickup.set(NoPlannerState{{1, 1}, false, {Position{0, 0}}}, Action::NoOp, 1.0);
  EXPECT_EQ(policy(NoPlannerState{{1, 1}, true, {std::nullopt}}), Action::Down);
  EXPECT_EQ(policy(NoPlannerState{{1, 1}, false, {Position{0, 0}}}), Action::NoOp);
}

TEST(GreedyPolicy, ScalingRowKeepsChoice) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> value(-100, 500);
  std::uniform_real_distribution<double> scale(0.01, 100);
  for (int i = 0; i < 1000; ++i) {
    std::array<double, kNumActions> row;
    for (double& v : row) v = value(rng);
    const double c = scale(rng);
    std::array<double, kNumActions> scaled;
    for (std::size_t k = 0; k < kNumActions; ++k) scaled[k] = row[k] * c;
    ASSERT_EQ(greedy_action(row_table(kS, row), kS), greedy_action(row_table(kS, scaled), kS));
  }
}

TEST(QTableTest, DefaultsAndHash) {
  QTable q(-2.0);
  EXPECT_EQ(q.get(kS, Action::Up), -2.0);
  EXPECT_EQ(q.max_value(kS), -2.0);
  EXPECT_FALSE(q.contains(kS));
  QTable a;
  QTable b;
  a.set(kS, Action::Up, 1.0);
  a.set(kNext, Action::Down, 2.0);
  b.set(kNext, Action::Down, 2.0);
  b.set(kS, Action::Up, 1.0);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.content_hash(), b.content_hash());
  b.set(kS, Action::Up, 1.5);
  EXPECT_NE(a.content_hash(), b.content_hash());
}

TEST(MethodNames, RoundTrip) {
  for (Method m : {Method::RandomPolicy, Method::FlatQ, Method::OptionsQ}) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_THROW(parse_method("sarsa"), ParseError);
}

}  // namespace
}  // namespace macopt
