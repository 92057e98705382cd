import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from dqconsensus.cli import EXIT_INVALID, EXIT_NO_TREE, EXIT_NUMERICAL, EXIT_OK, main
from dqconsensus.graph import circle_topology, laplacian
from dqconsensus.sim import Scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def two_pose_scenario(**extra):
    data = {"graph": {"n": 2, "edges": [[0, 1, 1.0], [1, 0, 1.0]]},
            "agents": [{"pose": [1, 0, 0, 0, 0, 0.1, 0, 0]}, {"pose": [1, 0, 0, 0, 0, 0, 0, 0]}],
            "protocol": "pose-consensus", "dt": 0.01, "horizon": 1.0}
    data.update(extra)
    return data


class TestRun:
    def test_circle5_converges(self, tmp_path, capsys):
        code = main(["run", "--scenario", str(SCENARIOS / "circle5.json"), "--out", str(tmp_path)])
        assert code == EXIT_OK
        metrics = json.loads(capsys.readouterr().out)
        assert metrics["final_disagreement"] < 1e-6
        assert json.load(open(tmp_path / "metrics.json")) == metrics
        assert (tmp_path / "trajectory.csv").exists()

    def test_zero_horizon_single_row(self, tmp_path, capsys):
        path = write_json(tmp_path / "s.json", two_pose_scenario())
        assert main(["run", "--scenario", path, "--out", str(tmp_path / "o"),
                     "--horizon", "0"]) == EXIT_OK
        lines = (tmp_path / "o" / "trajectory.csv").read_text().splitlines()
        assert len(lines) == 1 + 2
        assert json.loads(capsys.readouterr().out)["steps"] == 0

    def test_dt_override(self, tmp_path, capsys):
        path = write_json(tmp_path / "s.json", two_pose_scenario())
        assert main(["run", "--scenario", path, "--out", str(tmp_path), "--dt", "0.1"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["steps"] == 10

    def test_agent_count_mismatch(self, tmp_path, capsys):
        data = two_pose_scenario(graph={"n": 5, "edges": []})
        path = write_json(tmp_path / "s.json", data)
        assert main(["run", "--scenario", path, "--out", str(tmp_path)]) == EXIT_INVALID
        assert "graph has 5 nodes" in capsys.readouterr().err

    @pytest.mark.parametrize("patch, message", [
        ({"agents": [{"pose": [3, 0, 0, 0, 0, 0, 0, 0]}] * 2}, "not a unit"),
        ({"protocol": "swarm"}, "unknown protocol"),
        ({"dt": 0}, "dt must be positive"),
    ])
    def test_validation_messages(self, tmp_path, capsys, patch, message):
        path = write_json(tmp_path / "s.json", two_pose_scenario(**patch))
        assert main(["run", "--scenario", path, "--out", str(tmp_path)]) == EXIT_INVALID
        err = capsys.readouterr()
        assert message in err.err and err.out == ""

    def test_missing_file(self, tmp_path, capsys):
        assert main(["run", "--scenario", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path)]) == EXIT_INVALID
        assert "not found" in capsys.readouterr().err

    def test_numerical_failure(self, tmp_path, capsys):
        data = two_pose_scenario(protocol="output-consensus", dt=1.0, horizon=2000.0,
                                 graph={"n": 2, "edges": [[0, 1, 1e300], [1, 0, 1e300]]})
        path = write_json(tmp_path / "s.json", data)
        assert main(["run", "--scenario", path, "--out", str(tmp_path)]) == EXIT_NUMERICAL
        assert "numerical failure" in capsys.readouterr().err

    def test_seed_override_changes_random_poses(self, tmp_path, capsys):
        data = two_pose_scenario(agents=[{"pose": "random"}, {"pose": "random"}])
        path = write_json(tmp_path / "s.json", data)
        outs = []
        for seed in ("1", "1", "2"):
            main(["run", "--scenario", path, "--out", str(tmp_path / seed), "--seed", seed])
            outs.append(capsys.readouterr().out)
        assert outs[0] == outs[1] != outs[2]


class TestGenScenario:
    def test_circle_uses_five_node_topology(self, tmp_path):
        out = tmp_path / "c.json"
        assert main(["gen-scenario", "--family", "circle", "--n", "5", "--out", str(out)]) == 0
        sc = Scenario.from_dict(json.loads(out.read_text()))
        assert np.array_equal(sc.graph.adjacency, circle_topology().adjacency)

    def test_timevarying_is_reproducible(self, tmp_path):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for p in paths:
            assert main(["gen-scenario", "--family", "timevarying", "--n", "20", "--seed", "7",
                         "--out", str(p)]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert paths[0].read_bytes() == (SCENARIOS / "timevarying20.json").read_bytes()

    def test_manipulator_box_laplacian(self, tmp_path):
        out = tmp_path / "m.json"
        assert main(["gen-scenario", "--family", "manipulator-box", "--out", str(out)]) == 0
        sc = Scenario.from_dict(json.loads(out.read_text()))
        assert np.array_equal(laplacian(sc.graph), [[1, -0.5, -0.5], [-0.5, 0.5, 0], [0, 0, 0]])

    def test_stdout_and_validity(self, capsys):
        for family in ("circle", "timevarying", "manipulator-box"):
            assert main(["gen-scenario", "--family", family, "--seed", "3"]) == 0
            Scenario.from_dict(json.loads(capsys.readouterr().out)).validate()

    def test_shipped_files_regenerate(self, capsys):
        for name, args in [("circle5.json", ["--family", "circle", "--n", "5", "--seed", "0"]),
                           ("manipulator_box.json", ["--family", "manipulator-box", "--seed", "0"])]:
            assert main(["gen-scenario"] + args) == 0
            assert capsys.readouterr().out == (SCENARIOS / name).read_text()

    @pytest.mark.parametrize("args", [
        ["--family", "spiral"],
        ["--family", "circle", "--n", "1"],
        ["--family", "manipulator-box", "--n", "4"],
    ])
    def test_invalid(self, args, capsys):
        assert main(["gen-scenario"] + args) == EXIT_INVALID
        assert capsys.readouterr().err.startswith("error:")


class TestCheckGraph:
    def test_circle5(self, capsys):
        assert main(["check-graph", "--scenario", str(SCENARIOS / "circle5.json")]) == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert summary["spanning_tree"] is True and summary["zero_eigenvalues"] == 1
        assert summary["n"] == 5 and len(summary["eigenvalues"]) == 5
        assert summary["min_nonzero_real"] > 0

    def test_isolated_nodes(self, tmp_path, capsys):
        path = write_json(tmp_path / "g.json", {"n": 2, "edges": []})
        assert main(["check-graph", "--scenario", path]) == EXIT_NO_TREE
        summary = json.loads(capsys.readouterr().out)
        assert summary["spanning_tree"] is False and summary["zero_eigenvalues"] == 2

    def test_leader_topology(self, capsys):
        path = str(SCENARIOS / "manipulator_box.json")
        assert main(["check-graph", "--scenario", path]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["spanning_tree"] is True

    def test_parse_failure(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("not json")
        assert main(["check-graph", "--scenario", str(bad)]) == EXIT_INVALID
        path = write_json(tmp_path / "g.json", {"n": 2, "edges": [[0, 7, 1.0]]})
        assert main(["check-graph", "--scenario", path]) == EXIT_INVALID


def test_usage_errors():
    assert main([]) == EXIT_INVALID
    assert main(["frobnicate"]) == EXIT_INVALID
    assert main(["run", "--scenario", "x.json"]) == EXIT_INVALID


def test_console_script_entry(tmp_path):
    out = subprocess.run([sys.executable, "-m", "dqconsensus.cli", "check-graph", "--scenario",
                          str(SCENARIOS / "circle5.json")], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["spanning_tree"] is True
