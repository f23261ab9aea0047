#include "macoptions/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace macopt {

namespace {

const std::vector<std::string> kRunKeys = {
    "method", "planner", "grid", "agents", "gems", "episodes", "steps", "seed", "runs", "out",
    "noop-reward", "alpha", "gamma", "eps-start", "eps-end", "eps-decay-frac", "alpha-visit-decay",
    "step-budget", "layout", "threshold"};

const std::map<std::string, std::string> kHelp = {
    {"method", "random | q | q-options"},
    {"planner", "on | off"},
    {"grid", "grid size WxH"},
    {"agents", "number of agents"},
    {"gems", "number of gems"},
    {"episodes", "training episodes"},
    {"steps", "step limit per episode"},
    {"seed", "run seed"},
    {"runs", "greedy evaluation runs"},
    {"out", "output directory (oracle: output file)"},
    {"noop-reward", "reward for no-op: 0 | -1"},
    {"alpha", "learning rate"},
    {"gamma", "discount factor"},
    {"eps-start", "initial exploration probability"},
    {"eps-end", "final exploration probability"},
    {"eps-decay-frac", "fraction of episodes over which exploration anneals"},
    {"alpha-visit-decay", "if > 0, step size 1/(1+visits/k) instead of alpha"},
    {"step-budget", "stop training after this many timesteps in total (0: no cap)"},
    {"layout", "fixed | random"},
    {"threshold", "reward level for episodes-to-threshold"},
    {"qtable", "q-table file to evaluate"},
    {"subtask", "pickup | drop"},
    {"config", "key=value config file; flags override it"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string flag(const std::string& key) { return "--" + key; }

const std::string* lookup(const Settings& s, const std::string& key) {
  auto it = s.values.find(key);
  return it == s.values.end() ? nullptr : &it->second;
}

template <typename T>
std::optional<T> to_number(std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

long long get_int(const Settings& s, const std::string& key, long long fallback, long long min) {
  const std::string* v = lookup(s, key);
  if (!v) return fallback;
  auto n = to_number<long long>(*v);
  if (!n) throw UsageError(flag(key), "expected an integer, got '" + *v + "'");
  if (*n < min) throw UsageError(flag(key), "must be at least " + std::to_string(min) + ", got " + *v);
  return *n;
}

double get_double(const Settings& s, const std::string& key, double fallback, double lo, double hi,
                  bool open_lo = false) {
  const std::string* v = lookup(s, key);
  if (!v) return fallback;
  auto x = to_number<double>(*v);
  if (!x) throw UsageError(flag(key), "expected a number, got '" + *v + "'");
  if (*x > hi || *x < lo || (open_lo && *x == lo)) {
    std::ostringstream msg;
    msg << "must lie in " << (open_lo ? "(" : "[") << lo << ", " << hi << "], got " << *v;
    throw UsageError(flag(key), msg.str());
  }
  return *x;
}

Position parse_cell(const std::string& key, const std::string& text) {
  const auto comma = text.find(',');
  if (comma != std::string::npos) {
    auto r = to_number<int>(trim(text.substr(0, comma)));
    auto c = to_number<int>(trim(text.substr(comma + 1)));
    if (r && c) return {*r, *c};
  }
  throw UsageError("[layout] " + key, "expected 'row,col', got '" + text + "'");
}

std::vector<Position> layout_entries(const Settings& s, const std::string& prefix, int expected) {
  std::map<int, Position> found;
  for (const auto& [key, value] : s.layout) {
    if (!key.starts_with(prefix + ".")) continue;
    auto idx = to_number<int>(std::string_view(key).substr(prefix.size() + 1));
    if (!idx || *idx < 0) throw UsageError("[layout] " + key, "bad index");
    found[*idx] = parse_cell(key, value);
  }
  std::vector<Position> out;
  for (int i = 0; i < expected; ++i) {
    auto it = found.find(i);
    if (it == found.end()) throw UsageError("[layout]", "missing " + prefix + "." + std::to_string(i));
    out.push_back(it->second);
  }
  if (static_cast<int>(found.size()) != expected)
    throw UsageError("[layout]", "lists " + std::to_string(found.size()) + " " + prefix + " entries, expected " +
                                     std::to_string(expected));
  return out;
}

GridConfig resolve_grid(const Settings& s) {
  int width = 11;
  int height = 11;
  if (const std::string* g = lookup(s, "grid")) {
    const auto x = g->find('x');
    std::optional<int> w, h;
    if (x != std::string::npos) {
      w = to_number<int>(std::string_view(*g).substr(0, x));
      h = to_number<int>(std::string_view(*g).substr(x + 1));
    }
    if (!w || !h) throw UsageError("--grid", "expected WxH, got '" + *g + "'");
    if (*w < 3 || *h < 3) throw UsageError("--grid", "both sides must be at least 3, got '" + *g + "'");
    width = *w;
    height = *h;
  }
  const auto agents = static_cast<int>(get_int(s, "agents", 2, 1));
  const auto gems = static_cast<int>(get_int(s, "gems", 3, 1));
  const auto steps = static_cast<int>(get_int(s, "steps", 1000, 1));
  if (gems > width * height - 1)
    throw UsageError("--gems", "a " + std::to_string(width) + "x" + std::to_string(height) + " grid holds at most " +
                                   std::to_string(width * height - 1) + " gems");

  GridConfig grid = GridConfig::centered(width, height, agents, gems, steps);
  if (const std::string* n = lookup(s, "noop-reward")) {
    if (*n == "0")
      grid.noop_reward = 0.0;
    else if (*n == "-1")
      grid.noop_reward = -1.0;
    else
      throw UsageError("--noop-reward", "expected 0 or -1, got '" + *n + "'");
  }

  const std::string* layout = lookup(s, "layout");
  if (layout && *layout != "fixed" && *layout != "random")
    throw UsageError("--layout", "expected fixed or random, got '" + *layout + "'");
  if (layout && *layout == "random") {
    if (!s.layout.empty()) throw UsageError("--layout", "a random layout cannot be combined with a [layout] section");
    grid.layout = RandomLayout{};
  } else if (!s.layout.empty()) {
    grid.layout = FixedLayout{layout_entries(s, "agent", agents), layout_entries(s, "gem", gems)};
  }
  try {
    grid.validate();
  } catch (const ConfigError& e) {
    throw UsageError(s.layout.empty() ? "--grid" : "[layout]", e.what());
  }
  return grid;
}

RunConfig apply_out(RunConfig run, const Settings& s) {
  if (const std::string* o = lookup(s, "out")) run.output_dir = *o;
  return run;
}

std::string planner_word(bool on) { return on ? "on" : "off"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw FileError("cannot write " + path.string());
}

std::string arm_dir_name(ControllerMode m) {
  return std::string(to_string(m.method)) + "-planner-" + planner_word(m.planner_enabled);
}

unsigned compare_threads() {
  const char* env = std::getenv("MACOPT_THREADS");
  if (!env || !*env) return 0;
  auto n = to_number<unsigned>(std::string_view(env));
  if (!n || *n == 0) throw UsageError("MACOPT_THREADS", "expected a positive integer, got '" + std::string(env) + "'");
  return *n;
}

void write_run_files(const std::filesystem::path& dir, const RunConfig& cfg, const std::vector<EpisodeRecord>& log,
                     const std::string& title) {
  write_text(dir / "config.txt", render_config(cfg));
  write_metrics(log, dir / "metrics.csv");
  write_plot_script(dir / "plot_metrics.py", "metrics.csv", title);
}

std::string title_for(const RunConfig& cfg, std::string_view what) {
  return std::string(what) + ": " + std::string(to_string(cfg.mode.method)) + ", planner " +
         planner_word(cfg.mode.planner_enabled);
}

void report_arms(const std::vector<ArmResult>& arms, std::ostream& out) {
  out << std::left << std::setw(12) << "method" << std::setw(9) << "planner" << std::setw(14) << "mean_eval"
      << std::setw(12) << "std_eval"
      << "episodes_to_threshold\n";
  for (const auto& a : arms) {
    out << std::left << std::setw(12) << to_string(a.mode.method) << std::setw(9)
        << planner_word(a.mode.planner_enabled) << std::setw(14) << format_number(a.mean_eval_reward)
        << std::setw(12) << format_number(a.std_eval_reward)
        << (a.episodes_to_threshold ? std::to_string(*a.episodes_to_threshold) : "not-reached") << '\n';
  }
}

void run_compare(const RunConfig& base, const std::vector<ArmResult>& arms, std::ostream& out) {
  const auto& dir = base.output_dir;
  write_text(dir / "config.txt", render_config(base));
  for (const auto& arm : arms) {
    RunConfig cfg = base;
    cfg.mode = arm.mode;
    const auto arm_dir = dir / arm_dir_name(arm.mode);
    write_run_files(arm_dir, cfg, arm.training.log, title_for(cfg, "training"));
    write_metrics(arm.evaluation, arm_dir / "eval.csv");
    write_qtable(arm.training.tables, cfg.hyper, arm_dir / "qtable.csv");
  }
  write_summary(arms, dir / "summary.csv");
  report_arms(arms, out);
  out << "wrote " << (dir / "summary.csv").string() << '\n';
}

}  // namespace

Settings read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot read config file " + path.string());
  Settings s;
  bool in_layout = false;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t != "[layout]") throw ParseError("unknown section " + t, n);
      in_layout = true;
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", n);
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", n);
    if (in_layout) {
      if (!key.starts_with("agent.") && !key.starts_with("gem."))
        throw ParseError("layout keys are agent.N or gem.N, got " + key, n);
      s.layout[key] = value;
    } else {
      if (std::find(kRunKeys.begin(), kRunKeys.end(), key) == kRunKeys.end())
        throw ParseError("unknown setting " + key, n);
      s.values[key] = value;
    }
  }
  return s;
}

std::string render_config(const RunConfig& run) {
  std::ostringstream out;
  const GridConfig& g = run.grid;
  const Hyperparams& h = run.hyper;
  out << "method=" << to_string(run.mode.method) << '\n'
      << "planner=" << planner_word(run.mode.planner_enabled) << '\n'
      << "grid=" << g.width << 'x' << g.height << '\n'
      << "agents=" << g.num_agents << '\n'
      << "gems=" << g.num_gems << '\n'
      << "episodes=" << run.episodes << '\n'
      << "steps=" << g.step_limit << '\n'
      << "seed=" << h.seed << '\n'
      << "runs=" << run.eval_runs << '\n'
      << "out=" << run.output_dir.string() << '\n'
      << "noop-reward=" << format_number(g.noop_reward) << '\n'
      << "alpha=" << format_number(h.alpha) << '\n'
      << "gamma=" << format_number(h.gamma) << '\n'
      << "eps-start=" << format_number(h.eps_start) << '\n'
      << "eps-end=" << format_number(h.eps_end) << '\n'
      << "eps-decay-frac=" << format_number(h.eps_decay_fraction) << '\n'
      << "alpha-visit-decay=" << format_number(h.alpha_visit_decay) << '\n'
      << "step-budget=" << run.max_total_steps << '\n';
  if (run.threshold) out << "threshold=" << format_number(*run.threshold) << '\n';
  if (const auto* fixed = std::get_if<FixedLayout>(&g.layout)) {
    out << "layout=fixed\n\n[layout]\n";
    for (std::size_t i = 0; i < fixed->agents.size(); ++i)
      out << "agent." << i << " = " << fixed->agents[i].row << ',' << fixed->agents[i].col << '\n';
    for (std::size_t j = 0; j < fixed->gems.size(); ++j)
      out << "gem." << j << " = " << fixed->gems[j].row << ',' << fixed->gems[j].col << '\n';
  } else {
    out << "layout=random\n";
  }
  return out.str();
}

RunConfig resolve_run_config(const Settings& s) {
  RunConfig run;
  run.grid = resolve_grid(s);
  if (const std::string* m = lookup(s, "method")) {
    try {
      run.mode.method = parse_method(*m);
    } catch (const ParseError& e) {
      throw UsageError("--method", e.what());
    }
  }
  if (const std::string* p = lookup(s, "planner")) {
    if (*p != "on" && *p != "off") throw UsageError("--planner", "expected on or off, got '" + *p + "'");
    run.mode.planner_enabled = *p == "on";
  }
  run.episodes = static_cast<int>(get_int(s, "episodes", 6000, 1));
  run.eval_runs = static_cast<int>(get_int(s, "runs", 10, 1));
  run.max_total_steps = get_int(s, "step-budget", 0, 0);
  if (const std::string* v = lookup(s, "seed")) {
    auto seed = to_number<std::uint64_t>(*v);
    if (!seed) throw UsageError("--seed", "expected a non-negative integer, got '" + *v + "'");
    run.hyper.seed = *seed;
  }
  Hyperparams& h = run.hyper;
  h.alpha = get_double(s, "alpha", h.alpha, 0.0, 1.0, true);
  h.gamma = get_double(s, "gamma", h.gamma, 0.0, 1.0);
  h.eps_start = get_double(s, "eps-start", h.eps_start, 0.0, 1.0);
  h.eps_end = get_double(s, "eps-end", h.eps_end, 0.0, 1.0);
  if (h.eps_end > h.eps_start) throw UsageError("--eps-end", "must not exceed --eps-start");
  h.eps_decay_fraction = get_double(s, "eps-decay-frac", h.eps_decay_fraction, 0.0, 1.0);
  h.alpha_visit_decay = get_double(s, "alpha-visit-decay", 0.0, 0.0, 1e18);
  if (const std::string* t = lookup(s, "threshold")) {
    auto x = to_number<double>(*t);
    if (!x) throw UsageError("--threshold", "expected a number, got '" + *t + "'");
    run.threshold = *x;
  }
  run = apply_out(std::move(run), s);
  run.validate();
  return run;
}

CliCommand parse_args(const std::vector<std::string>& argv) {
  CLI::App app{"Centralized multi-agent Q-learning with options and a planner on the bank world", "macopt"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every command");

  struct Sub {
    CLI::App* app;
    std::map<std::string, std::string> values;
  };
  std::map<std::string, Sub> subs;
  auto add_sub = [&](const std::string& name, const std::string& desc, const std::vector<std::string>& keys) {
    Sub& sub = subs[name];
    sub.app = app.add_subcommand(name, desc);
    for (const auto& key : keys) sub.values[key];
    for (auto& [key, value] : sub.values) sub.app->add_option(flag(key), value, kHelp.at(key));
  };
  std::vector<std::string> run_keys = kRunKeys;
  run_keys.push_back("config");
  std::vector<std::string> eval_keys = run_keys;
  eval_keys.push_back("qtable");
  add_sub("train", "train one method and write metrics, q-table and plot script", run_keys);
  add_sub("eval", "greedy evaluation of a saved q-table", eval_keys);
  add_sub("compare-methods", "random policy vs q-learning vs q-learning with options", run_keys);
  add_sub("compare-planner", "q-learning with options, with and without the planner", run_keys);
  add_sub("oracle", "exact subtask q-values by value iteration",
          {"grid", "agents", "gems", "noop-reward", "gamma", "subtask", "out", "config"});

  std::vector<const char*> raw;
  for (const auto& a : argv) raw.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp&) {
    return HelpCommand{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    return HelpCommand{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    throw UsageError("", msg);
  }

  std::string name;
  for (auto& [n, sub] : subs)
    if (sub.app->parsed()) name = n;
  Sub& sub = subs.at(name);
  auto given = [&](const std::string& key) { return sub.app->get_option(flag(key))->count() > 0; };

  Settings settings;
  std::filesystem::path qtable;
  if (name == "eval") {
    if (!given("qtable")) throw UsageError("--qtable", "eval needs a q-table file");
    qtable = sub.values.at("qtable");
    if (!std::filesystem::is_regular_file(qtable)) throw FileError("q-table file not found: " + qtable.string());
    const auto echo = qtable.parent_path() / "config.txt";
    if (std::filesystem::is_regular_file(echo)) settings = read_config_file(echo);
  }
  if (given("config")) {
    Settings file = read_config_file(sub.values.at("config"));
    for (auto& [k, v] : file.values) settings.values[k] = v;
    if (!file.layout.empty()) settings.layout = file.layout;
  }
  for (const auto& [key, value] : sub.values)
    if (key != "config" && key != "qtable" && key != "subtask" && given(key)) settings.values[key] = value;
  // Grid-shape flags invalidate a layout inherited from a file.
  if (given("grid") || given("agents") || given("gems")) settings.layout.clear();

  if (name == "oracle") {
    OracleCommand cmd;
    cmd.grid = resolve_grid(settings);
    cmd.gamma = get_double(settings, "gamma", 0.95, 0.0, 1.0);
    if (!given("subtask")) throw UsageError("--subtask", "oracle needs pickup or drop");
    try {
      cmd.subtask = parse_subtask(sub.values.at("subtask"));
    } catch (const ParseError& e) {
      throw UsageError("--subtask", e.what());
    }
    cmd.output = given("out") ? std::filesystem::path(sub.values.at("out"))
                              : std::filesystem::path("oracle-" + std::string(to_string(cmd.subtask)) + ".csv");
    return cmd;
  }

  RunConfig run = resolve_run_config(settings);
  if (name == "train") return TrainCommand{run};
  if (name == "compare-methods") return CompareMethodsCommand{run};
  if (name == "compare-planner") {
    if (run.mode.method != Method::OptionsQ) throw UsageError("--method", "compare-planner runs q-options only");
    return ComparePlannerCommand{run};
  }

  // eval: the mode comes from the table unless set explicitly; results go
  // next to the table unless --out is given.
  EvalCommand cmd{qtable, run};
  if (!given("method") || !given("planner")) {
    const ControllerMode stored = read_qtable(qtable).tables.mode;
    if (!given("method")) cmd.run.mode.method = stored.method;
    if (!given("planner")) cmd.run.mode.planner_enabled = stored.planner_enabled;
  }
  if (!given("out")) cmd.run.output_dir = qtable.parent_path() / "eval";
  return cmd;
}

void execute(const CliCommand& command, std::ostream& out) {
  std::visit(
      [&](const auto& cmd) {
        using T = std::decay_t<decltype(cmd)>;
        if constexpr (std::is_same_v<T, HelpCommand>) {
          out << cmd.text;
        } else if constexpr (std::is_same_v<T, TrainCommand>) {
          const RunConfig& cfg = cmd.run;
          const TrainResult result = train(cfg);
          write_run_files(cfg.output_dir, cfg, result.log, title_for(cfg, "training"));
          write_qtable(result.tables, cfg.hyper, cfg.output_dir / "qtable.csv");
          const std::size_t tail = std::min<std::size_t>(100, result.log.size());
          const std::vector<EpisodeRecord> last(result.log.end() - static_cast<std::ptrdiff_t>(tail),
                                                result.log.end());
          out << "trained " << result.log.size() << " episodes (" << to_string(cfg.mode.method) << ", planner "
              << planner_word(cfg.mode.planner_enabled) << "); mean reward over the last " << tail
              << " episodes: " << format_number(mean_reward(last)) << '\n'
              << "wrote " << cfg.output_dir.string() << '\n';
        } else if constexpr (std::is_same_v<T, EvalCommand>) {
          const QTableFile file = read_qtable(cmd.qtable);
          const RunConfig& cfg = cmd.run;
          const auto records = evaluate(file.tables, cfg);
          write_run_files(cfg.output_dir, cfg, records, title_for(cfg, "evaluation"));
          out << "evaluated " << records.size() << " greedy runs: mean reward " << format_number(mean_reward(records))
              << ", std " << format_number(stddev_reward(records)) << '\n'
              << "wrote " << cfg.output_dir.string() << '\n';
        } else if constexpr (std::is_same_v<T, CompareMethodsCommand>) {
          run_compare(cmd.run, compare_methods(cmd.run, compare_threads()), out);
        } else if constexpr (std::is_same_v<T, ComparePlannerCommand>) {
          run_compare(cmd.run, compare_planner(cmd.run, compare_threads()), out);
        } else if constexpr (std::is_same_v<T, OracleCommand>) {
          TableSet tables;
          tables.mode = {Method::OptionsQ, true};
          QTable& q = cmd.subtask == Subtask::Pickup ? tables.pickup : tables.drop;
          q = value_iteration_oracle(cmd.grid, cmd.subtask, cmd.gamma);
          Hyperparams h;
          h.gamma = cmd.gamma;
          write_qtable(tables, h, cmd.output);
          out << "solved the " << to_string(cmd.subtask) << " subtask: " << q.num_states() << " states\n"
              << "wrote " << cmd.output.string() << '\n';
        }
      },
      command);
}

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  auto one_line = [](std::string msg) {
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    return msg;
  };
  try {
    execute(parse_args(argv), out);
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 1;
  }
}

}  // namespace macopt
