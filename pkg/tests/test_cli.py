"""End-to-end tests of the graphon-ldp command line."""

import json
import math
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from main import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, build_parser, run

BERNOULLI_RATE = 0.5 * math.log(0.5 / 0.3) + 0.5 * math.log(0.5 / 0.7)


@pytest.fixture
def workdir(monkeypatch):
    monkeypatch.delenv("GRAPHON_LDP_THREADS", raising=False)
    with tempfile.TemporaryDirectory() as directory:
        yield Path(directory)


@pytest.fixture
def files(workdir):
    """Input files of the Bernoulli(0.3) scenario."""
    documents = {
        "nu": {"space": {"points": [0, 1]}, "weights": [0.7, 0.3]},
        "half": {"cells": [[[0.5, 0.5]]]},
        "point": {"cells": [[[0.0, 1.0]]]},
        "event": {"kind": "mean-functional", "f": [0, 1], "direction": ">=", "threshold": 0.5},
        "constraints": {"constraints": [{"f": [0, 1], "direction": ">=", "threshold": 0.5}]},
        "infeasible": {"constraints": [{"f": [0, 1], "direction": ">=", "threshold": 1.5}]},
        "uniform": {"breakpoints": [0.0, 1.0], "values": [1.0]},
        "linear": {"breakpoints": [0.0, 1.0], "values": [0.0], "slopes": [2.0]},
        "scheme": {"interval": [0.0, 1.0], "depth_max": 6},
    }
    paths = {}
    for name, payload in documents.items():
        path = workdir / f"{name}.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        paths[name] = str(path)
    return paths


def read_json(path: Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


class TestArguments:
    """Test cases for argument handling and exit codes."""

    def test_help(self, capsys):
        assert run(["--help"]) == EXIT_OK
        assert "graphon-ldp" in capsys.readouterr().out

    def test_missing_subcommand(self):
        assert run([]) == EXIT_VALIDATION

    def test_bad_n_list(self, files, workdir):
        argv = ["verify", "--measure", files["nu"], "--event", files["event"], "--n-list", "10,x",
                "--out", str(workdir / "ldp.csv")]
        assert run(argv) == EXIT_VALIDATION

    def test_missing_input(self, workdir):
        argv = ["entropy", "--graphon", str(workdir / "absent.json"), "--measure", str(workdir / "nu.json"),
                "--out", str(workdir / "h.json")]
        assert run(argv) == EXIT_VALIDATION

    def test_parser_lists_every_subcommand(self):
        text = build_parser().format_help()
        for name in ("sample", "dist", "entropy", "project", "verify", "condition", "concentrate", "minimize",
                     "selftest"):
            assert name in text


class TestSeeds:
    """Test cases for the seed requirement of random subcommands."""

    def test_sample_needs_seed(self, files, workdir, capsys):
        argv = ["sample", "--measure", files["nu"], "--n", "5", "--out", str(workdir / "g.json")]
        assert run(argv) == EXIT_VALIDATION
        assert "[ERROR]" in capsys.readouterr().err

    def test_anneal_needs_seed(self, files, workdir):
        argv = ["dist", "--first", files["half"], "--second", files["half"], "--metric", "delta",
                "--mode", "anneal", "--out", str(workdir / "d.json")]
        assert run(argv) == EXIT_VALIDATION

    def test_sample_is_reproducible(self, files, workdir):
        outputs = []
        for name in ("a.json", "b.json"):
            argv = ["sample", "--measure", files["nu"], "--n", "12", "--seed", "7", "--out", str(workdir / name)]
            assert run(argv) == EXIT_OK
            outputs.append((workdir / name).read_text(encoding="utf-8"))
        assert outputs[0] == outputs[1]
        document = json.loads(outputs[0])
        assert document["n"] == 12
        assert document["manifest"]["seed"] == 7

    def test_sample_from_graphon(self, files, workdir):
        argv = ["sample", "--graphon", files["point"], "--n", "4", "--seed", "1", "--out", str(workdir / "g.json")]
        assert run(argv) == EXIT_OK
        weights = np.array(read_json(workdir / "g.json")["weights"])
        assert weights.tolist() == (1 - np.eye(4, dtype=int)).tolist()


class TestCommands:
    """Test cases for each subcommand."""

    def test_entropy(self, files, workdir, capsys):
        out = workdir / "h.json"
        assert run(["entropy", "--graphon", files["half"], "--measure", files["nu"], "--dual",
                    "--out", str(out)]) == EXIT_OK
        document = read_json(out)
        assert document["entropy"] == pytest.approx(BERNOULLI_RATE, abs=1e-15)
        assert document["dual"][0][0][0] == 0.0
        assert document["manifest"]["subcommand"] == "entropy"
        assert capsys.readouterr().out.startswith("[OK]")

    def test_infinite_entropy_warns(self, files, workdir, capsys):
        nu = workdir / "sure.json"
        nu.write_text(json.dumps({"weights": [1.0, 0.0]}), encoding="utf-8")
        out = workdir / "h.json"
        assert run(["entropy", "--graphon", files["half"], "--measure", str(nu), "--out", str(out)]) == EXIT_OK
        assert read_json(out)["entropy"] == "inf"
        assert "[WARN]" in capsys.readouterr().out

    def test_dist_with_witness(self, files, workdir):
        nu_graphon = workdir / "nu_graphon.json"
        nu_graphon.write_text(json.dumps({"cells": [[[0.7, 0.3]]]}), encoding="utf-8")
        out, witness = workdir / "d.json", workdir / "w.json"
        argv = ["dist", "--first", files["half"], "--second", str(nu_graphon), "--out", str(out),
                "--emit-witness", str(witness)]
        assert run(argv) == EXIT_OK
        assert read_json(out)["value"] == pytest.approx(0.2, abs=1e-12)
        assert read_json(out)["mode"] == "exact"
        assert read_json(witness)["S"] == [0]

    def test_delta_between_graph_and_graphon(self, files, workdir):
        graph = workdir / "g.json"
        graph.write_text(json.dumps({"weights": [[0, 1], [1, 0]]}), encoding="utf-8")
        out = workdir / "d.json"
        argv = ["dist", "--first", str(graph), "--second", files["point"], "--metric", "delta", "--out", str(out)]
        assert run(argv) == EXIT_OK
        # the embedded graph carries the zero point on its diagonal blocks
        assert read_json(out)["value"] == pytest.approx(0.5, abs=1e-12)
        assert read_json(out)["distance"] == "delta_cut"

    def test_overlay(self, files, workdir):
        kernel = workdir / "a.json"
        kernel.write_text(json.dumps({"n": 1, "values": [[[0.0, 2.0]]]}), encoding="utf-8")
        out = workdir / "o.json"
        argv = ["dist", "--first", files["half"], "--second", str(kernel), "--metric", "overlay", "--out", str(out)]
        assert run(argv) == EXIT_OK
        assert read_json(out)["overlay"] == pytest.approx(1.0)

    def test_project_with_rates(self, files, workdir):
        out = workdir / "p.json"
        argv = ["project", "--scheme", files["scheme"], "--density", files["linear"], "--level", "2",
                "--rate", "--reference", files["uniform"], "--out", str(out)]
        assert run(argv) == EXIT_OK
        document = read_json(out)
        assert document["level"] == 2
        assert document["projection"]["weights"] == pytest.approx([1 / 16, 3 / 16, 5 / 16, 7 / 16], abs=1e-15)
        assert len(document["rates"]) == 6

    def test_project_rate_needs_reference(self, files, workdir):
        argv = ["project", "--scheme", files["scheme"], "--density", files["linear"], "--rate",
                "--out", str(workdir / "p.json")]
        assert run(argv) == EXIT_VALIDATION

    def test_verify_table(self, files, workdir):
        """Test the Bernoulli scenario: the last gap is within the acceptance bound."""
        out = workdir / "ldp.csv"
        argv = ["verify", "--measure", files["nu"], "--event", files["event"], "--n-list", "10,20,40,80",
                "--out", str(out)]
        assert run(argv) == EXIT_OK
        frame = pd.read_csv(out)
        assert frame["n"].tolist() == [10, 20, 40, 80]
        assert abs(frame["gap"].iloc[-1]) <= 0.015
        assert frame["rate_target"].iloc[0] == pytest.approx(BERNOULLI_RATE, abs=1e-9)
        assert read_json(workdir / "ldp.manifest.json")["table"] == "ldp.csv"

    def test_condition(self, files, workdir):
        out = workdir / "g.json"
        argv = ["condition", "--measure", files["nu"], "--event", files["event"], "--n", "8", "--seed", "3",
                "--out", str(out)]
        assert run(argv) == EXIT_OK
        weights = np.array(read_json(out)["weights"])
        assert weights[np.triu_indices(8, 1)].mean() >= 0.5

    def test_concentrate(self, files, workdir):
        out = workdir / "c.csv"
        argv = ["concentrate", "--measure", files["nu"], "--event", files["event"], "--n-list", "4,6",
                "--reps", "2", "--seed", "5", "--out", str(out)]
        assert run(argv) == EXIT_OK
        frame = pd.read_csv(out)
        assert frame["n"].tolist() == [4, 6]
        assert frame["reps"].tolist() == [2, 2]

    def test_minimize(self, files, workdir):
        out, graphon = workdir / "m.json", workdir / "mw.json"
        argv = ["minimize", "--measure", files["nu"], "--constraints", files["constraints"],
                "--out-graphon", str(graphon), "--out", str(out)]
        assert run(argv) == EXIT_OK
        assert read_json(out)["value"] == pytest.approx(BERNOULLI_RATE, abs=1e-12)
        assert read_json(graphon)["cells"][0][0] == pytest.approx([0.5, 0.5], abs=1e-12)

    def test_minimize_infeasible(self, files, workdir, capsys):
        argv = ["minimize", "--measure", files["nu"], "--constraints", files["infeasible"],
                "--out", str(workdir / "m.json")]
        assert run(argv) == EXIT_NUMERICAL
        assert "[ERROR]" in capsys.readouterr().err

    def test_config_file(self, files, workdir):
        config = workdir / "config.json"
        config.write_text(json.dumps({"max_exact_edges": 10}), encoding="utf-8")
        argv = ["verify", "--measure", files["nu"], "--event", files["event"], "--n-list", "10",
                "--config", str(config), "--out", str(workdir / "ldp.csv")]
        assert run(argv) == EXIT_VALIDATION

    @pytest.mark.slow
    def test_selftest(self, workdir, capsys):
        out = workdir / "selftest.json"
        assert run(["selftest", "--out", str(out)]) == EXIT_OK
        assert "[OK]" in capsys.readouterr().out
        assert all(check["passed"] for check in read_json(out)["checks"])
