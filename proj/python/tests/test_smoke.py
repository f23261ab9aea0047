import pytest

import macoptions as mo


def small_grid(agents=1, gems=1, steps=60):
    return mo.GridConfig.centered(5, 5, agents, gems, steps)


def test_reset_and_step():
    g = small_grid()
    g.set_layout([mo.Position(0, 0)], [mo.Position(0, 1)])
    s = mo.reset(g, 0)
    assert s.step == 0
    assert s.agents[0] == mo.Position(0, 0)
    assert s.gems[0] == ("on_grid", 0, 1)

    assert not mo.is_legal(s, g, 0, mo.Action.Up)
    s, out = mo.step_agent(s, g, 0, mo.Action.Up)
    assert out.event == mo.StepEvent.Illegal
    assert out.reward == -5

    s, out = mo.step_agent(s, g, 0, mo.Action.Right)
    assert out.event == mo.StepEvent.Acquired
    assert out.reward == 50
    assert s.carried_gem(0) == 0
    assert s.gems[0] == ("carried_by", 0)


def test_planner_assigns_nearest_gem():
    g = small_grid(agents=2, gems=2)
    g.set_layout([mo.Position(0, 0), mo.Position(4, 4)], [mo.Position(4, 3), mo.Position(0, 1)])
    a = mo.assign(mo.reset(g))
    assert a.gem_of(0) == 1
    assert a.gem_of(1) == 0


def test_abstractions_serialize():
    g = small_grid(agents=1, gems=2)
    g.set_layout([mo.Position(1, 2)], [mo.Position(3, 3), mo.Position(4, 4)])
    s = mo.reset(g)
    assert mo.abstract_pickup(s, 0, 1) == "P,1,2,4,4"
    assert mo.abstract_no_planner(s, 0) == "N,1,2,0,3:3,4:4"


def test_drop_oracle_values():
    g = mo.GridConfig.centered(3, 3, 1, 1)
    q = mo.value_iteration_oracle(g, mo.Subtask.Drop)
    assert q["D,0,1"][int(mo.Action.Down)] == pytest.approx(500.0)
    assert q["D,0,0"][int(mo.Action.Right)] == pytest.approx(474.0)


def test_train_and_evaluate(tmp_path):
    cfg = mo.RunConfig(small_grid(), method=mo.Method.OptionsQ, episodes=40, eval_runs=3, seed=5)
    tables, log = mo.train(cfg)
    assert len(log) == 40
    assert set(log[0]) == {"episode", "total_reward", "steps_used", "gems_dropped", "epsilon"}
    assert tables.pickup and tables.drop

    again, _ = mo.train(cfg)
    assert again.content_hash() == tables.content_hash()

    path = tmp_path / "q.csv"
    tables.save(path)
    assert mo.load_tables(path).content_hash() == tables.content_hash()
    assert len(mo.evaluate(tables, cfg)) == 3


def test_compare_planner():
    cfg = mo.RunConfig(small_grid(agents=2, gems=2), episodes=20, eval_runs=2, seed=1)
    arms = mo.compare_planner(cfg)
    assert [a["planner"] for a in arms] == [True, False]
    assert all(a["method"] == "q-options" for a in arms)


def test_episodes_to_threshold():
    assert mo.episodes_to_threshold([0, 0, 1, 2, 3], 2.0, 3) == 5
    assert mo.episodes_to_threshold([0, 0, 0], 1.0, 2) is None


def test_errors_map_to_python():
    g = mo.GridConfig.centered(3, 3, 1, 1)
    g.num_gems = 0
    with pytest.raises(mo.ConfigError):
        g.validate()
    with pytest.raises(mo.FileError):
        mo.load_tables("/nonexistent/q.csv")


def test_run_cli(tmp_path):
    code, out, err = mo.run_cli(["oracle", "--grid", "3x3", "--subtask", "drop", "--out", str(tmp_path / "d.csv")])
    assert code == 0, err
    assert (tmp_path / "d.csv").exists()
    code, _, err = mo.run_cli(["train", "--grid", "4x0"])
    assert code == 2
    assert "--grid" in err
