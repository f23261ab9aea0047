#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "macoptions/harness.hpp"

namespace macopt {

namespace {

constexpr std::string_view kMetricsHeader = "episode,total_reward,steps_used,gems_dropped,epsilon";
constexpr std::string_view kSummaryHeader = "method,planner,mean_eval_reward,std_eval_reward,episodes_to_threshold";
constexpr std::string_view kTableMarker = "#qtable";

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot read " + path.string());
  return in;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t at; (at = text.find(sep, start)) != std::string_view::npos; start = at + 1)
    parts.push_back(text.substr(start, at - start));
  parts.push_back(text.substr(start));
  return parts;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
  T value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end)
    throw ParseError("bad number '" + std::string(field) + "'", line);
  return value;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

// NoPlannerState rows may live in any table.
bool belongs_to(const AbstractState& s, std::string_view option) {
  if (std::holds_alternative<NoPlannerState>(s)) return true;
  if (option == "pickup") return std::holds_alternative<PickupState>(s);
  if (option == "drop") return std::holds_alternative<DropState>(s);
  return std::holds_alternative<FlatState>(s);
}

std::string planner_word(bool on) { return on ? "on" : "off"; }

std::string table_header(const TableSet& tables, const Hyperparams& h, std::string_view option) {
  std::string out(kTableMarker);
  out += " mode=" + std::string(to_string(tables.mode.method));
  out += " planner=" + planner_word(tables.mode.planner_enabled);
  out += " option=" + std::string(option);
  out += " alpha=" + format_number(h.alpha);
  out += " gamma=" + format_number(h.gamma);
  out += " eps_start=" + format_number(h.eps_start);
  out += " eps_end=" + format_number(h.eps_end);
  out += " eps_decay_frac=" + format_number(h.eps_decay_fraction);
  out += " alpha_visit_decay=" + format_number(h.alpha_visit_decay);
  out += " seed=" + std::to_string(h.seed);
  return out;
}

void write_table(std::ostream& out, const QTable& q) {
  std::vector<std::string> lines;
  lines.reserve(q.num_states() * kNumActions);
  q.for_each([&](const AbstractState& s, const QTable::Row& row) {
    const std::string key = serialize(s);
    for (std::size_t a = 0; a < kNumActions; ++a)
      lines.push_back(key + "," + std::to_string(a) + "," + format_number(row[a]));
  });
  std::sort(lines.begin(), lines.end());
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw ContractViolation("cannot format number");
  return std::string(buf, ptr);
}

void write_metrics(const std::vector<EpisodeRecord>& records, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kMetricsHeader << '\n';
  for (const auto& r : records)
    out << r.episode << ',' << format_number(r.total_reward) << ',' << r.steps_used << ',' << r.gems_dropped << ','
        << format_number(r.epsilon) << '\n';
  if (!out) throw FileError("failed writing " + path.string());
}

std::vector<EpisodeRecord> read_metrics(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t n = 1;
  if (!std::getline(in, line)) throw ParseError("empty metrics file", 1);
  strip_cr(line);
  if (line != kMetricsHeader) throw ParseError("unexpected metrics header '" + line + "'", 1);
  std::vector<EpisodeRecord> records;
  while (std::getline(in, line)) {
    ++n;
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 5) throw ParseError("expected 5 fields, got " + std::to_string(f.size()), n);
    records.push_back({parse_number<int>(f[0], n), parse_number<double>(f[1], n), parse_number<int>(f[2], n),
                       parse_number<int>(f[3], n), parse_number<double>(f[4], n)});
  }
  return records;
}

void write_qtable(const TableSet& tables, const Hyperparams& hyper, const std::filesystem::path& path) {
  auto out = open_out(path);
  switch (tables.mode.method) {
    case Method::RandomPolicy:
      out << table_header(tables, hyper, "none") << '\n';
      break;
    case Method::FlatQ:
      out << table_header(tables, hyper, "flat") << '\n';
      write_table(out, tables.flat);
      break;
    case Method::OptionsQ:
      out << table_header(tables, hyper, "pickup") << '\n';
      write_table(out, tables.pickup);
      out << table_header(tables, hyper, "drop") << '\n';
      write_table(out, tables.drop);
      break;
  }
  if (!out) throw FileError("failed writing " + path.string());
}

QTableFile read_qtable(const std::filesystem::path& path) {
  auto in = open_in(path);
  QTableFile file;
  QTable* current = nullptr;
  std::string current_option;
  bool seen_header = false;
  std::string line;
  std::size_t n = 0;

  while (std::getline(in, line)) {
    ++n;
    strip_cr(line);
    if (line.empty()) continue;

    if (line.starts_with(kTableMarker)) {
      std::map<std::string, std::string, std::less<>> kv;
      for (auto field : split(std::string_view(line).substr(kTableMarker.size()), ' ')) {
        if (field.empty()) continue;
        const auto eq = field.find('=');
        if (eq == std::string_view::npos) throw ParseError("header field without '=': " + std::string(field), n);
        kv[std::string(field.substr(0, eq))] = std::string(field.substr(eq + 1));
      }
      auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError(std::string("header lacks ") + key, n);
        return it->second;
      };
      ControllerMode mode;
      try {
        mode.method = parse_method(need("mode"));
      } catch (const ParseError& e) {
        throw ParseError(e.what(), n);
      }
      const std::string& planner = need("planner");
      if (planner != "on" && planner != "off") throw ParseError("planner must be on or off", n);
      mode.planner_enabled = planner == "on";
      if (seen_header && mode != file.tables.mode) throw ParseError("tables in one file disagree on mode", n);
      file.tables.mode = mode;
      seen_header = true;

      Hyperparams& h = file.hyper;
      h.alpha = parse_number<double>(need("alpha"), n);
      h.gamma = parse_number<double>(need("gamma"), n);
      h.eps_start = parse_number<double>(need("eps_start"), n);
      h.eps_end = parse_number<double>(need("eps_end"), n);
      h.eps_decay_fraction = parse_number<double>(need("eps_decay_frac"), n);
      if (kv.contains("alpha_visit_decay")) h.alpha_visit_decay = parse_number<double>(kv["alpha_visit_decay"], n);
      h.seed = parse_number<std::uint64_t>(need("seed"), n);

      const std::string& option = need("option");
      current_option = option;
      if (option == "flat" && mode.method == Method::FlatQ)
        current = &file.tables.flat;
      else if (option == "pickup" && mode.method == Method::OptionsQ)
        current = &file.tables.pickup;
      else if (option == "drop" && mode.method == Method::OptionsQ)
        current = &file.tables.drop;
      else if (option == "none" && mode.method == Method::RandomPolicy)
        current = nullptr;
      else
        throw ParseError("option '" + option + "' does not belong to mode " + need("mode"), n);
      continue;
    }

    if (!seen_header) throw ParseError("entry before any table header", n);
    if (!current) throw ParseError("random-policy files hold no entries", n);
    const auto last = line.rfind(',');
    const auto mid = last == std::string::npos ? std::string::npos : line.rfind(',', last - 1);
    if (mid == std::string::npos) throw ParseError("expected <state>,<action>,<value>", n);
    const auto action = parse_number<std::size_t>(std::string_view(line).substr(mid + 1, last - mid - 1), n);
    if (action >= kNumActions) throw ParseError("action index out of range", n);
    const double value = parse_number<double>(std::string_view(line).substr(last + 1), n);
    AbstractState state;
    try {
      state = parse_abstract_state(std::string_view(line).substr(0, mid));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), n);
    }
    if (!belongs_to(state, current_option)) throw ParseError("state kind does not match the " + current_option + " table", n);
    current->set(state, kAllActions[action], value);
  }
  if (!seen_header) throw ParseError("no table header found", n == 0 ? 1 : n);
  return file;
}

void write_summary(const std::vector<ArmResult>& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.mode.method) << ',' << planner_word(r.mode.planner_enabled) << ','
        << format_number(r.mean_eval_reward) << ',' << format_number(r.std_eval_reward) << ',';
    if (r.episodes_to_threshold)
      out << *r.episodes_to_threshold;
    else
      out << "not-reached";
    out << '\n';
  }
  if (!out) throw FileError("failed writing " + path.string());
}

void write_plot_script(const std::filesystem::path& script_path, const std::string& metrics_file,
                       const std::string& title) {
  auto out = open_out(script_path);
  const std::string png = std::filesystem::path(metrics_file).replace_extension(".png").string();
  out << "#!/usr/bin/env python3\n"
         "\"\"\"Total reward per episode. Writes "
      << png
      << " next to this script.\"\"\"\n"
         "import csv\n"
         "import os\n"
         "\n"
         "import matplotlib\n"
         "\n"
         "matplotlib.use(\"Agg\")\n"
         "import matplotlib.pyplot as plt  # noqa: E402\n"
         "\n"
         "HERE = os.path.dirname(os.path.abspath(__file__))\n"
         "METRICS = os.path.join(HERE, \""
      << metrics_file
      << "\")\n"
         "\n"
         "episodes, rewards = [], []\n"
         "with open(METRICS, newline=\"\") as f:\n"
         "    for row in csv.DictReader(f):\n"
         "        episodes.append(int(row[\"episode\"]))\n"
         "        rewards.append(float(row[\"total_reward\"]))\n"
         "\n"
         "fig, ax = plt.subplots(figsize=(8, 4))\n"
         "ax.plot(episodes, rewards, linewidth=0.8)\n"
         "ax.set_xlabel(\"episode\")\n"
         "ax.set_ylabel(\"total reward\")\n"
         "ax.set_title(\""
      << title
      << "\")\n"
         "fig.tight_layout()\n"
         "fig.savefig(os.path.join(HERE, \""
      << png << "\"), dpi=120)\n";
  if (!out) throw FileError("failed writing " + script_path.string());
}

}  // namespace macopt
