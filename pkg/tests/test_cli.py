import json

import pytest

from densify.cli import main
from densify.cspace import HyperRect, Scenario, empty_scenario


@pytest.fixture
def wall(tmp_path):
    sc = Scenario(2, (HyperRect((0.45, 0.0), (0.55, 0.9)),), (0.2, 0.2), (0.8, 0.2))
    path = tmp_path / "wall.json"
    sc.save(path)
    return path


@pytest.fixture
def blocked(tmp_path):
    sc = Scenario(2, (HyperRect((0.35, 0.0), (0.65, 1.0)),), (0.2, 0.2), (0.8, 0.2))
    path = tmp_path / "blocked.json"
    sc.save(path)
    return path


def test_gen_scenario_and_env_seed(tmp_path, monkeypatch):
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    assert main(["gen-scenario", "--d", "2", "--obstacles", "20", "--zeta", "0.2", "--seed", "1", "--out", str(a)]) == 0
    assert main(["gen-scenario", "--d", "2", "--obstacles", "20", "--zeta", "0.2", "--seed", "1", "--out", str(b)]) == 0
    assert a.read_text() == b.read_text()
    monkeypatch.setenv("DENSIFY_SEED", "2")
    assert main(["gen-scenario", "--d", "2", "--obstacles", "20", "--zeta", "0.2", "--seed", "1", "--out", str(c)]) == 0
    assert c.read_text() != a.read_text()
    monkeypatch.setenv("DENSIFY_SEED", "x")
    assert main(["gen-scenario", "--d", "2", "--obstacles", "20", "--zeta", "0.2", "--out", str(c)]) == 1


def test_plan_exit_codes(tmp_path, wall, blocked):
    out = tmp_path / "p.json"
    assert main(["plan", "--scenario", str(wall), "--strategy", "hybrid", "--n", "500", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["status"] == "solved" and doc["events"]
    assert main(["plan", "--scenario", str(blocked), "--strategy", "edge", "--n", "200"]) == 2
    budget = tmp_path / "b.json"
    assert main(["plan", "--scenario", str(wall), "--strategy", "edge", "--n", "500", "--budget", "3",
                 "--out", str(budget)]) == 3
    assert json.loads(budget.read_text())["status"] == "budget-exhausted"


def test_plan_validation(tmp_path, wall):
    assert main(["plan", "--scenario", str(wall), "--strategy", "bogus", "--n", "100"]) == 1
    assert main(["plan", "--scenario", str(tmp_path / "missing.json"), "--strategy", "edge", "--n", "100"]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["plan", "--scenario", str(bad), "--strategy", "edge", "--n", "100"]) == 1
    assert main(["plan", "--strategy", "edge", "--n", "100"]) == 1
    assert main(["nonsense"]) == 1


def test_simulate_bounds(tmp_path, capsys):
    assert main(["simulate-bounds", "--d", "4"]) == 1
    out = tmp_path / "s.csv"
    assert main(["simulate-bounds", "--n", "10000", "--d", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) > 3
    assert {"vertex", "edge", "hybrid"} <= {ln.split(",")[0] for ln in lines[1:]}
    capsys.readouterr()
    assert main(["simulate-bounds", "--n", "10000", "--d", "2", "--delta-dispersion", "1"]) == 0
    assert "warning" in capsys.readouterr().err


def test_scaling_and_compare(tmp_path, capsys):
    assert main(["scaling", "--n", "200", "400", "800", "--trials", "1"]) == 0
    assert "slope" in capsys.readouterr().out
    assert main(["scaling", "--n", "200", "400"]) == 1
    out = tmp_path / "c.csv"
    assert main(["compare", "--difficulty", "easy", "--trials", "1", "--n", "300", "--out", str(out)]) == 0
    assert out.read_text().startswith("strategy,scenario_id,evals_first,evals_opt,final_cost,gamma_star")


def test_render(tmp_path, wall):
    prof = tmp_path / "p.json"
    assert main(["plan", "--scenario", str(wall), "--strategy", "edge", "--n", "300", "--log-checks",
                 "--out", str(prof)]) == 0
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert main(["render", "--scenario", str(wall), "--profile", str(prof), "--out", str(a)]) == 0
    assert main(["render", "--scenario", str(wall), "--profile", str(prof), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    svg = a.read_text()
    assert 'id="path"' in svg and "<line" in svg


def test_render_empty_and_non_2d(tmp_path, capsys):
    empty = tmp_path / "e.json"
    empty_scenario(2).save(empty)
    out = tmp_path / "e.svg"
    assert main(["render", "--scenario", str(empty), "--out", str(out)]) == 0
    svg = out.read_text()
    group = svg.split('<g id="obstacles"')[1].split("</g>")[0]
    assert "<rect" not in group
    three = tmp_path / "t.json"
    empty_scenario(3).save(three)
    assert main(["render", "--scenario", str(three)]) == 1
    assert "render supports d=2 only" in capsys.readouterr().err
