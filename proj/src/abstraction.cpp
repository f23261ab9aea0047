#include "macoptions/abstraction.hpp"

#include <charconv>
#include <functional>
#include <string>
#include <type_traits>

namespace macopt {

namespace {

inline void hash_combine(std::size_t& seed, std::size_t v) {
  seed ^= v + 0x9E3779B97F4A7C15ULL + (seed << 6) + (seed >> 2);
}

inline std::size_t hash_pos(Position p) {
  return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.row)) << 32) |
                                    static_cast<std::uint32_t>(p.col));
}

void put_pos(std::string& out, Position p) {
  out += std::to_string(p.row);
  out += ',';
  out += std::to_string(p.col);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = text.find(sep, start);
    if (at == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, at - start));
    start = at + 1;
  }
}

int parse_int(std::string_view field, std::string_view text) {
  int value = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || field.empty())
    throw ParseError("bad integer '" + std::string(field) + "' in state '" + std::string(text) + "'");
  return value;
}

bool parse_flag(std::string_view field, std::string_view text) {
  if (field == "0") return false;
  if (field == "1") return true;
  throw ParseError("bad flag '" + std::string(field) + "' in state '" + std::string(text) + "'");
}

std::optional<Position> parse_cell(std::string_view field, std::string_view text) {
  if (field == "_") return std::nullopt;
  const auto colon = field.find(':');
  if (colon == std::string_view::npos)
    throw ParseError("bad gem cell '" + std::string(field) + "' in state '" + std::string(text) + "'");
  return Position{parse_int(field.substr(0, colon), text), parse_int(field.substr(colon + 1), text)};
}

}  // namespace

std::size_t AbstractStateHash::operator()(const AbstractState& s) const noexcept {
  std::size_t seed = s.index();
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        hash_combine(seed, hash_pos(v.agent_pos));
        if constexpr (std::is_same_v<T, PickupState>) {
          hash_combine(seed, hash_pos(v.gem_pos));
        } else if constexpr (std::is_same_v<T, FlatState>) {
          hash_combine(seed, v.target_pos ? hash_pos(*v.target_pos) : 0x5bd1e995U);
          hash_combine(seed, v.carrying);
        } else if constexpr (std::is_same_v<T, NoPlannerState>) {
          hash_combine(seed, v.carrying);
          for (const auto& c : v.gem_cells) hash_combine(seed, c ? hash_pos(*c) : 0x5bd1e995U);
        }
      },
      s);
  return seed;
}

AbstractState abstract_pickup(const WorldState& state, int agent, int gem) {
  const auto cell = state.gem_cell(gem);
  if (!cell) throw ContractViolation("pickup state needs gem " + std::to_string(gem) + " on the grid");
  if (state.is_carrying(agent))
    throw ContractViolation("pickup state requested for carrying agent " + std::to_string(agent));
  return PickupState{state.agents.at(static_cast<std::size_t>(agent)), *cell};
}

AbstractState abstract_drop(const WorldState& state, int agent) {
  if (!state.is_carrying(agent))
    throw ContractViolation("drop state requested for agent " + std::to_string(agent) + " which carries nothing");
  return DropState{state.agents.at(static_cast<std::size_t>(agent))};
}

AbstractState abstract_flat(const WorldState& state, int agent, const Assignment& assignment, Position bank) {
  FlatState s{state.agents.at(static_cast<std::size_t>(agent)), std::nullopt, state.is_carrying(agent)};
  if (s.carrying) {
    s.target_pos = bank;
  } else if (auto gem = assignment.gem_of(agent)) {
    s.target_pos = state.gem_cell(*gem);
  }
  return s;
}

AbstractState abstract_no_planner(const WorldState& state, int agent) {
  NoPlannerState s{state.agents.at(static_cast<std::size_t>(agent)), state.is_carrying(agent), {}};
  s.gem_cells.reserve(state.gems.size());
  for (std::size_t j = 0; j < state.gems.size(); ++j) s.gem_cells.push_back(state.gem_cell(static_cast<int>(j)));
  return s;
}

std::string serialize(const AbstractState& s) {
  std::string out;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PickupState>) {
          out = "P,";
          put_pos(out, v.agent_pos);
          out += ',';
          put_pos(out, v.gem_pos);
        } else if constexpr (std::is_same_v<T, DropState>) {
          out = "D,";
          put_pos(out, v.agent_pos);
        } else if constexpr (std::is_same_v<T, FlatState>) {
          out = "F,";
          put_pos(out, v.agent_pos);
          out += ',';
          if (v.target_pos)
            put_pos(out, *v.target_pos);
          else
            out += '_';
          out += v.carrying ? ",1" : ",0";
        } else {
          out = "N,";
          put_pos(out, v.agent_pos);
          out += v.carrying ? ",1" : ",0";
          for (const auto& c : v.gem_cells) {
            out += ',';
            if (c)
              out += std::to_string(c->row) + ":" + std::to_string(c->col);
            else
              out += '_';
          }
        }
      },
      s);
  return out;
}

AbstractState parse_abstract_state(std::string_view text) {
  const auto f = split(text, ',');
  auto expect = [&](bool ok) {
    if (!ok) throw ParseError("wrong field count in state '" + std::string(text) + "'");
  };
  auto pos_at = [&](std::size_t i) { return Position{parse_int(f[i], text), parse_int(f[i + 1], text)}; };

  if (f[0] == "P") {
    expect(f.size() == 5);
    return PickupState{pos_at(1), pos_at(3)};
  }
  if (f[0] == "D") {
    expect(f.size() == 3);
    return DropState{pos_at(1)};
  }
  if (f[0] == "F") {
    if (f.size() == 5 && f[3] == "_") return FlatState{pos_at(1), std::nullopt, parse_flag(f[4], text)};
    expect(f.size() == 6);
    return FlatState{pos_at(1), pos_at(3), parse_flag(f[5], text)};
  }
  if (f[0] == "N") {
    expect(f.size() >= 4);
    NoPlannerState s{pos_at(1), parse_flag(f[3], text), {}};
    for (std::size_t i = 4; i < f.size(); ++i) s.gem_cells.push_back(parse_cell(f[i], text));
    return s;
  }
  throw ParseError("unknown state tag in '" + std::string(text) + "'");
}

}  // namespace macopt
