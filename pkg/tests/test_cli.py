"""End-to-end CLI tests: exit codes, artifact determinism, spec examples."""

import json
import subprocess
import sys

import numpy as np
import pytest

from tandim import metric


def run_cli(*argv, cwd=None):
    return subprocess.run([sys.executable, "-m", "tandim.cli", *argv],
                          capture_output=True, text=True, cwd=cwd)


def test_gen_sierpinski_depth4_cell_count(tmp_path):
    p = run_cli("gen", "--spec", "sierpinski-23", "--depth", "4",
                "--out", str(tmp_path))
    assert p.returncode == 0
    meta = json.loads((tmp_path / "gen.json").read_text())
    assert meta["cells"] == 324


def test_gen_chessboard_explicit_one(tmp_path):
    p = run_cli("gen", "--spec", "chessboard:[1]", "--out", str(tmp_path))
    assert p.returncode == 0
    meta = json.loads((tmp_path / "gen.json").read_text())
    assert meta["cells"] == 5


def test_gen_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run_cli("gen", "--spec", "sierpinski-23", "--depth", "3",
                       "--seed", "4", "--out", str(out)).returncode == 0
    assert (a / "cells.csv").read_bytes() == (b / "cells.csv").read_bytes()
    assert (a / "gen.json").read_bytes() == (b / "gen.json").read_bytes()


def test_gen_invalid_spec_exit_2(tmp_path):
    p = run_cli("gen", "--spec", "nonsense", "--out", str(tmp_path))
    assert p.returncode == 2
    assert "input error" in p.stderr


def test_dims_artifacts_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        p = run_cli("dims", "--spec", "sierpinski-23", "--depth", "300",
                    "--out", str(out))
        assert p.returncode == 0
    for name in ("dims.json", "dims.csv", "dims.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    doc = json.loads((a / "dims.json").read_text())
    assert doc["meta"]["version"]
    assert doc["meta"]["configHash"]
    assert doc["report"]["deltaUpper"] > doc["report"]["deltaLower"]


def test_dims_single_point_zero(tmp_path):
    space = metric.FiniteMetricSpace(["p"], np.zeros((1, 1)))
    f = tmp_path / "one.json"
    f.write_text(json.dumps(space.to_json()))
    p = run_cli("dims", "--backend", "finite", "--spec", str(f),
                "--out", str(tmp_path))
    assert p.returncode == 0
    doc = json.loads((tmp_path / "dims.json").read_text())
    for key in ("deltaLower", "dLower", "dUpper", "deltaUpper"):
        assert doc["report"][key] == 0.0


def test_gtable_grid_range_exit_3(tmp_path):
    p = run_cli("gtable", "--spec", "sierpinski-23", "--depth", "3",
                "--backend", "geom", "--t-max", "50", "--out", str(tmp_path))
    assert p.returncode == 3
    assert "grid range" in p.stderr


def test_tangents_constant_q_one_cluster(tmp_path):
    p = run_cli("tangents", "--spec", "sierpinski:[2,2,2,2,2,2,2,2]",
                "--out", str(tmp_path))
    assert p.returncode == 0
    doc = json.loads((tmp_path / "tangents.json").read_text())
    assert doc["clusters"] == 1


def test_tangents_counterexample_k3(tmp_path):
    p = run_cli("tangents", "--spec", "counterexample", "--depth", "3",
                "--out", str(tmp_path))
    assert p.returncode == 0
    doc = json.loads((tmp_path / "tangents.json").read_text())
    assert doc["clusters"] >= 3


def test_tangents_missing_spec_exit_2(tmp_path):
    p = run_cli("tangents", "--out", str(tmp_path))
    assert p.returncode == 2


def test_verify_suite_runs(tmp_path):
    p = run_cli("verify", "--suite", "counting-inequalities",
                "--out", str(tmp_path))
    assert p.returncode == 0
    assert "counting-inequalities: PASS" in p.stdout
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert doc["pass"] is True


def test_report_outputs(tmp_path):
    p = run_cli("report", "--depth", "300", "--out", str(tmp_path))
    assert p.returncode == 0
    for name in ("report.json", "report.csv", "report.svg"):
        assert (tmp_path / name).is_file()
    svg = (tmp_path / "report.svg").read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
