#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "macoptions/cli.hpp"
#include "macoptions/harness.hpp"

namespace py = pybind11;
using namespace macopt;

namespace {

py::object gem_status_to_py(const GemStatus& g) {
  return std::visit(
      [](const auto& v) -> py::object {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, OnGrid>) return py::make_tuple("on_grid", v.cell.row, v.cell.col);
        if constexpr (std::is_same_v<T, CarriedBy>) return py::make_tuple("carried_by", v.agent);
        return py::make_tuple("dropped");
      },
      g);
}

py::dict record_to_dict(const EpisodeRecord& r) {
  py::dict d;
  d["episode"] = r.episode;
  d["total_reward"] = r.total_reward;
  d["steps_used"] = r.steps_used;
  d["gems_dropped"] = r.gems_dropped;
  d["epsilon"] = r.epsilon;
  return d;
}

py::list records_to_list(const std::vector<EpisodeRecord>& records) {
  py::list out;
  for (const auto& r : records) out.append(record_to_dict(r));
  return out;
}

py::dict table_to_dict(const QTable& q) {
  py::dict d;
  q.for_each([&](const AbstractState& s, const QTable::Row& row) {
    d[py::str(serialize(s))] = py::cast(std::vector<double>(row.begin(), row.end()));
  });
  return d;
}

py::list arms_to_list(const std::vector<ArmResult>& arms) {
  py::list out;
  for (const auto& a : arms) {
    py::dict d;
    d["method"] = std::string(to_string(a.mode.method));
    d["planner"] = a.mode.planner_enabled;
    d["mean_eval_reward"] = a.mean_eval_reward;
    d["std_eval_reward"] = a.std_eval_reward;
    d["episodes_to_threshold"] =
        a.episodes_to_threshold ? py::cast(*a.episodes_to_threshold) : py::object(py::none());
    d["training"] = records_to_list(a.training.log);
    d["evaluation"] = records_to_list(a.evaluation);
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(macoptions, m) {
  m.doc() = "Bank world: centralized multi-agent Q-learning with options and a Manhattan planner";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<FileError>(m, "FileError", PyExc_OSError);

  py::class_<Position>(m, "Position")
      .def(py::init<int, int>(), py::arg("row"), py::arg("col"))
      .def_readwrite("row", &Position::row)
      .def_readwrite("col", &Position::col)
      .def("__eq__", [](const Position& a, const Position& b) { return a == b; })
      .def("__repr__", [](const Position& p) { return "Position" + to_string(p); });

  py::enum_<Action>(m, "Action")
      .value("Up", Action::Up)
      .value("Down", Action::Down)
      .value("Left", Action::Left)
      .value("Right", Action::Right)
      .value("NoOp", Action::NoOp);

  py::enum_<StepEvent>(m, "StepEvent")
      .value("Illegal", StepEvent::Illegal)
      .value("Acquired", StepEvent::Acquired)
      .value("Dropped", StepEvent::Dropped)
      .value("Moved", StepEvent::Moved)
      .value("Idle", StepEvent::Idle);

  py::enum_<Method>(m, "Method")
      .value("RandomPolicy", Method::RandomPolicy)
      .value("FlatQ", Method::FlatQ)
      .value("OptionsQ", Method::OptionsQ);

  py::enum_<Subtask>(m, "Subtask").value("Pickup", Subtask::Pickup).value("Drop", Subtask::Drop);

  py::class_<GridConfig>(m, "GridConfig")
      .def(py::init<>())
      .def_static("centered", &GridConfig::centered, py::arg("width"), py::arg("height"), py::arg("agents"),
                  py::arg("gems"), py::arg("step_limit") = 1000)
      .def_readwrite("width", &GridConfig::width)
      .def_readwrite("height", &GridConfig::height)
      .def_readwrite("bank", &GridConfig::bank)
      .def_readwrite("num_agents", &GridConfig::num_agents)
      .def_readwrite("num_gems", &GridConfig::num_gems)
      .def_readwrite("step_limit", &GridConfig::step_limit)
      .def_readwrite("noop_reward", &GridConfig::noop_reward)
      .def("set_layout",
           [](GridConfig& g, std::vector<Position> agents, std::vector<Position> gems) {
             g.layout = FixedLayout{std::move(agents), std::move(gems)};
           })
      .def("set_random_layout", [](GridConfig& g) { g.layout = RandomLayout{}; })
      .def("validate", &GridConfig::validate);

  py::class_<WorldState>(m, "WorldState")
      .def_readonly("agents", &WorldState::agents)
      .def_readonly("step", &WorldState::step)
      .def_property_readonly("gems",
                             [](const WorldState& s) {
                               py::list out;
                               for (const auto& g : s.gems) out.append(gem_status_to_py(g));
                               return out;
                             })
      .def("carried_gem", &WorldState::carried_gem)
      .def("__eq__", [](const WorldState& a, const WorldState& b) { return a == b; });

  py::class_<StepOutcome>(m, "StepOutcome")
      .def_readonly("reward", &StepOutcome::reward)
      .def_readonly("event", &StepOutcome::event)
      .def_readonly("gem", &StepOutcome::gem);

  m.def("reset", &reset, py::arg("config"), py::arg("seed") = 0);
  m.def("is_legal", &is_legal, py::arg("state"), py::arg("config"), py::arg("agent"), py::arg("action"));
  m.def("step_agent", &step_agent, py::arg("state"), py::arg("config"), py::arg("agent"), py::arg("action"),
        py::arg("assigned_gem") = py::none());
  m.def("advance_step", &advance_step);
  m.def("is_terminal", &is_terminal);

  m.def("manhattan", [](Position a, Position b) { return manhattan(a, b); });
  py::class_<Assignment>(m, "Assignment")
      .def(py::init<>())
      .def("gem_of", &Assignment::gem_of)
      .def("agent_of", &Assignment::agent_of)
      .def_property_readonly("agent_to_gem", &Assignment::agent_to_gem);
  m.def("assign", &assign, py::arg("state"), py::arg("current") = Assignment{});
  m.def("release", &release);

  m.def("abstract_pickup", [](const WorldState& s, int a, int g) { return serialize(abstract_pickup(s, a, g)); });
  m.def("abstract_drop", [](const WorldState& s, int a) { return serialize(abstract_drop(s, a)); });
  m.def("abstract_no_planner", [](const WorldState& s, int a) { return serialize(abstract_no_planner(s, a)); });

  m.def(
      "value_iteration_oracle",
      [](const GridConfig& g, Subtask t, double gamma) { return table_to_dict(value_iteration_oracle(g, t, gamma)); },
      py::arg("grid"), py::arg("subtask"), py::arg("gamma") = 0.95,
      "Exact q-values of a subtask as {serialized state: [up, down, left, right, no-op]}.");
  m.def("oracle_episode_return", &oracle_episode_return, py::arg("grid"), py::arg("gamma") = 0.95);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init([](const GridConfig& grid, Method method, bool planner, int episodes, int eval_runs,
                       std::uint64_t seed, double alpha, double gamma, double eps_start, double eps_end,
                       double eps_decay_fraction) {
             RunConfig cfg;
             cfg.grid = grid;
             cfg.mode = {method, planner};
             cfg.episodes = episodes;
             cfg.eval_runs = eval_runs;
             cfg.hyper.seed = seed;
             cfg.hyper.alpha = alpha;
             cfg.hyper.gamma = gamma;
             cfg.hyper.eps_start = eps_start;
             cfg.hyper.eps_end = eps_end;
             cfg.hyper.eps_decay_fraction = eps_decay_fraction;
             cfg.validate();
             return cfg;
           }),
           py::arg("grid"), py::arg("method") = Method::OptionsQ, py::arg("planner") = true,
           py::arg("episodes") = 6000, py::arg("eval_runs") = 10, py::arg("seed") = 0, py::arg("alpha") = 0.1,
           py::arg("gamma") = 0.95, py::arg("eps_start") = 1.0, py::arg("eps_end") = 0.05,
           py::arg("eps_decay_fraction") = 0.8)
      .def_readwrite("grid", &RunConfig::grid)
      .def_readwrite("episodes", &RunConfig::episodes)
      .def_readwrite("eval_runs", &RunConfig::eval_runs)
      .def_readwrite("threshold", &RunConfig::threshold);

  py::class_<TableSet>(m, "TableSet")
      .def_property_readonly("method", [](const TableSet& t) { return t.mode.method; })
      .def_property_readonly("planner", [](const TableSet& t) { return t.mode.planner_enabled; })
      .def_property_readonly("flat", [](const TableSet& t) { return table_to_dict(t.flat); })
      .def_property_readonly("pickup", [](const TableSet& t) { return table_to_dict(t.pickup); })
      .def_property_readonly("drop", [](const TableSet& t) { return table_to_dict(t.drop); })
      .def("content_hash", &TableSet::content_hash)
      .def("save", [](const TableSet& t, const std::filesystem::path& p) { write_qtable(t, Hyperparams{}, p); });
  m.def("load_tables", [](const std::filesystem::path& p) { return read_qtable(p).tables; });

  m.def(
      "train",
      [](const RunConfig& cfg) {
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(cfg);
        }
        return py::make_tuple(std::move(r.tables), records_to_list(r.log));
      },
      py::arg("config"), "Returns (tables, per-episode records).");
  m.def(
      "evaluate", [](const TableSet& t, const RunConfig& cfg) { return records_to_list(evaluate(t, cfg)); },
      py::arg("tables"), py::arg("config"));
  m.def(
      "compare_methods",
      [](const RunConfig& cfg) {
        std::vector<ArmResult> arms;
        {
          py::gil_scoped_release release;
          arms = compare_methods(cfg);
        }
        return arms_to_list(arms);
      },
      py::arg("config"));
  m.def(
      "compare_planner",
      [](const RunConfig& cfg) {
        std::vector<ArmResult> arms;
        {
          py::gil_scoped_release release;
          arms = compare_planner(cfg);
        }
        return arms_to_list(arms);
      },
      py::arg("config"));
  m.def(
      "episodes_to_threshold",
      [](const std::vector<double>& rewards, double threshold, int window) {
        std::vector<EpisodeRecord> log;
        for (std::size_t i = 0; i < rewards.size(); ++i) log.push_back({static_cast<int>(i), rewards[i], 0, 0, 0.0});
        return episodes_to_threshold(log, threshold, window);
      },
      py::arg("rewards"), py::arg("threshold"), py::arg("window") = 50);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "macopt");
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line interface in-process; returns (exit code, stdout, stderr).");
}
