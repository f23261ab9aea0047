#include <gtest/gtest.h>

#include <unordered_set>

#include "test_util.hpp"

namespace macopt {
namespace {

using testing::make_state;

TEST(AbstractPickup, ProjectsAgentAndGem) {
  const WorldState s = make_state({{1, 2}, {0, 0}}, {OnGrid{{3, 3}}, OnGrid{{4, 4}}});
  EXPECT_EQ(abstract_pickup(s, 0, 1), AbstractState(PickupState{{1, 2}, {4, 4}}));
}

TEST(AbstractPickup, IgnoresEverythingElse) {
  const WorldState a = make_state({{1, 2}, {0, 0}}, {OnGrid{{3, 3}}, OnGrid{{4, 4}}}, 5);
  const WorldState b = make_state({{1, 2}, {6, 1}}, {CarriedBy{1}, OnGrid{{4, 4}}}, 90);
  EXPECT_EQ(abstract_pickup(a, 0, 1), abstract_pickup(b, 0, 1));
}

TEST(AbstractPickup, Contracts) {
  const WorldState s = make_state({{1, 2}, {0, 0}}, {CarriedBy{1}, Dropped{}, OnGrid{{1, 1}}, CarriedBy{0}});
  EXPECT_THROW(abstract_pickup(s, 1, 0), ContractViolation);
  EXPECT_THROW(abstract_pickup(s, 1, 1), ContractViolation);
  EXPECT_THROW(abstract_pickup(s, 0, 2), ContractViolation);
}

TEST(AbstractDrop, ProjectsPositionOnly) {
  const WorldState s = make_state({{7, 3}}, {OnGrid{{0, 0}}, Dropped{}, CarriedBy{0}});
  EXPECT_EQ(abstract_drop(s, 0), AbstractState(DropState{{7, 3}}));
  const WorldState other = make_state({{7, 3}}, {CarriedBy{0}, Dropped{}, OnGrid{{2, 2}}});
  EXPECT_EQ(abstract_drop(s, 0), abstract_drop(other, 0));
  const WorldState empty_handed = make_state({{7, 3}}, {OnGrid{{0, 0}}});
  EXPECT_THROW(abstract_drop(empty_handed, 0), ContractViolation);
}

TEST(AbstractFlat, TargetRule) {
  const Position bank{5, 5};
  Assignment assigned;
  assigned.bind(0, 1);
  const WorldState fetching = make_state({{0, 0}}, {OnGrid{{1, 1}}, OnGrid{{3, 3}}});
  EXPECT_EQ(abstract_flat(fetching, 0, assigned, bank), AbstractState(FlatState{{0, 0}, Position{3, 3}, false}));

  const WorldState carrying = make_state({{2, 2}}, {CarriedBy{0}});
  Assignment carried;
  carried.bind(0, 0);
  EXPECT_EQ(abstract_flat(carrying, 0, carried, bank), AbstractState(FlatState{{2, 2}, Position{5, 5}, true}));

  const WorldState idle = make_state({{9, 9}}, {OnGrid{{1, 1}}});
  EXPECT_EQ(abstract_flat(idle, 0, {}, bank), AbstractState(FlatState{{9, 9}, std::nullopt, false}));
}

TEST(AbstractNoPlanner, ListsVisibleGems) {
  const WorldState s = make_state({{1, 1}, {4, 4}}, {OnGrid{{0, 2}}, CarriedBy{1}, Dropped{}});
  const NoPlannerState expected{{1, 1}, false, {Position{0, 2}, std::nullopt, std::nullopt}};
  EXPECT_EQ(abstract_no_planner(s, 0), AbstractState(expected));

  const WorldState done = make_state({{1, 1}}, {Dropped{}, Dropped{}});
  const auto& cells = std::get<NoPlannerState>(abstract_no_planner(done, 0)).gem_cells;
  EXPECT_EQ(cells, (std::vector<std::optional<Position>>{std::nullopt, std::nullopt}));

  const WorldState moved = make_state({{1, 1}, {0, 3}}, {OnGrid{{0, 2}}, CarriedBy{1}, Dropped{}});
  EXPECT_EQ(abstract_no_planner(s, 0), abstract_no_planner(moved, 0));
}

TEST(Serialization, CanonicalForms) {
  EXPECT_EQ(serialize(PickupState{{1, 2}, {4, 4}}), "P,1,2,4,4");
  EXPECT_EQ(serialize(DropState{{7, 3}}), "D,7,3");
  EXPECT_EQ(serialize(FlatState{{0, 0}, Position{3, 3}, false}), "F,0,0,3,3,0");
  EXPECT_EQ(serialize(FlatState{{9, 9}, std::nullopt, false}), "F,9,9,_,0");
  EXPECT_EQ(serialize(NoPlannerState{{1, 1}, false, {Position{0, 2}, std::nullopt, std::nullopt}}),
            "N,1,1,0,0:2,_,_");
  EXPECT_EQ(parse_abstract_state("N,1,1,0,0:2,_,_"),
            AbstractState(NoPlannerState{{1, 1}, false, {Position{0, 2}, std::nullopt, std::nullopt}}));
}

TEST(Serialization, RejectsMalformedText) {
  for (const char* bad : {"", "X,1,2", "P,1,2,3", "D,a,3", "F,0,0,3,3,2", "N,1,1", "D,1,2,", "N,1,1,0,0:2:3",
                          "P,1,2,3,4,5", "D,-1,2x"})
    EXPECT_THROW(parse_abstract_state(bad), ParseError) << bad;
}

AbstractState random_abstract_state(std::mt19937_64& rng) {
  auto cell = [&] { return testing::random_cell(rng, 30, 30); };
  auto maybe_cell = [&]() -> std::optional<Position> {
    if (std::bernoulli_distribution(0.3)(rng)) return std::nullopt;
    return cell();
  };
  switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0:
      return PickupState{cell(), cell()};
    case 1:
      return DropState{cell()};
    case 2:
      return FlatState{cell(), maybe_cell(), std::bernoulli_distribution(0.5)(rng)};
    default: {
      NoPlannerState s{cell(), std::bernoulli_distribution(0.5)(rng), {}};
      const int n = std::uniform_int_distribution<int>(1, 6)(rng);
      for (int i = 0; i < n; ++i) s.gem_cells.push_back(maybe_cell());
      return s;
    }
  }
}

TEST(Serialization, RoundTripsRandomStates) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 5000; ++i) {
    const AbstractState s = random_abstract_state(rng);
    const std::string text = serialize(s);
    ASSERT_EQ(parse_abstract_state(text), s) << text;
    ASSERT_EQ(serialize(parse_abstract_state(text)), text);
  }
}

TEST(AbstractionProperties, SoundAndRelevant) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const Position agent = testing::random_cell(rng, 9, 9);
    const Position gem = testing::random_cell(rng, 9, 9);
    // Two worlds sharing the projected literals but differing elsewhere.
    const WorldState a = make_state({agent, testing::random_cell(rng, 9, 9)}, {OnGrid{gem}, OnGrid{{0, 0}}});
    const WorldState b = make_state({agent, testing::random_cell(rng, 9, 9)}, {OnGrid{gem}, CarriedBy{1}}, 7);
    ASSERT_EQ(abstract_pickup(a, 0, 0), abstract_pickup(b, 0, 0));

    Position moved = gem;
    moved.col = (moved.col + 1) % 9;
    const WorldState c = make_state({agent}, {OnGrid{moved}});
    ASSERT_NE(abstract_pickup(a, 0, 0), abstract_pickup(c, 0, 0));
    Position elsewhere = agent;
    elsewhere.row = (elsewhere.row + 1) % 9;
    const WorldState d = make_state({elsewhere}, {OnGrid{gem}});
    ASSERT_NE(abstract_pickup(a, 0, 0), abstract_pickup(d, 0, 0));

    const WorldState ca = make_state({agent, {0, 0}}, {CarriedBy{0}, OnGrid{gem}});
    const WorldState cb = make_state({agent, {3, 3}}, {Dropped{}, CarriedBy{0}});
    ASSERT_EQ(abstract_drop(ca, 0), abstract_drop(cb, 0));
    const WorldState cc = make_state({elsewhere}, {CarriedBy{0}});
    ASSERT_NE(abstract_drop(ca, 0), abstract_drop(cc, 0));

    ASSERT_NE(abstract_no_planner(a, 0), abstract_no_planner(c, 0));
    ASSERT_NE(abstract_no_planner(a, 0), abstract_no_planner(ca, 0));
  }
}

TEST(AbstractionProperties, StateSpaceBounds) {
  const GridConfig g = GridConfig::centered(11, 11, 1, 1);
  std::unordered_set<AbstractState, AbstractStateHash> pickup;
  std::unordered_set<AbstractState, AbstractStateHash> drop;
  for (int ar = 0; ar < 11; ++ar)
    for (int ac = 0; ac < 11; ++ac) {
      drop.insert(abstract_drop(make_state({{ar, ac}}, {CarriedBy{0}}), 0));
      for (int gr = 0; gr < 11; ++gr)
        for (int gc = 0; gc < 11; ++gc) {
          if (Position{gr, gc} == g.bank) continue;
          pickup.insert(abstract_pickup(make_state({{ar, ac}}, {OnGrid{{gr, gc}}}), 0, 0));
        }
    }
  EXPECT_EQ(pickup.size(), 121u * 120u);
  EXPECT_LE(pickup.size(), 11u * 11u * 11u * 11u);
  EXPECT_EQ(drop.size(), 121u);
}

}  // namespace
}  // namespace macopt
