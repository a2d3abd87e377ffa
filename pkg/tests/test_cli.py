import io
import json
import shutil

import pytest

from sacekit import cli
from sacekit.fixtures import materialize_fixture


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def at(monkeypatch):
    def point(root):
        monkeypatch.setenv("SACE_PROJECT", str(root))
        return root
    return point


def snapshot(root, skip_out=False):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*"))
            if p.is_file() and not (skip_out and p.relative_to(root).parts[0] == "out")}


def test_init_then_status(at, tmp_path):
    at(tmp_path)
    code, out, _ = call("init", "--name", "shuttle", "--tiers", "2")
    assert code == 0 and "shuttle" in out
    code, out, _ = call("status")
    assert code == 0
    line = next(ln for ln in out.splitlines() if ln.startswith("stage 1 "))
    assert line.endswith("missing A")
    assert any(ln.startswith("stage 6 tier 1") for ln in out.splitlines())


def test_init_twice(at, tmp_path):
    at(tmp_path)
    assert call("init")[0] == 0
    assert call("init")[0] == 2


def test_init_example(at, tmp_path):
    at(tmp_path / "demo")
    code, out, _ = call("init", "--example", "office-robot")
    assert code == 0
    assert call("lint")[0] == 0


def test_enumerate(at, robot_copy):
    at(robot_copy)
    (robot_copy / "out" / "XX.json").unlink()
    code, out, _ = call("enumerate")
    assert code == 0
    doc = json.loads((robot_copy / "out" / "XX.json").read_text())
    text = json.dumps(doc)
    assert "<maintains current speed and direction>" in text
    assert "DP1-HS1 [Major]" in out


def test_lint_clean(at, robot_copy):
    at(robot_copy)
    assert call("lint") == (0, "", "")


def test_lint_mutation(at, tmp_path):
    at(materialize_fixture(tmp_path / "p", "E101"))
    code, out, _ = call("lint")
    assert code == 1 and "E101" in out


@pytest.mark.parametrize("argv", [
    ["status", "--bogus"],
    ["validate", "--stage", "9"],
    ["validate", "--stage", "6"],
    ["export", "--format", "pdf"],
    ["instantiate", "--pattern", "ZZ"],
    ["instantiate", "--pattern", "S"],
    ["frobnicate"],
])
def test_usage_errors(at, robot_copy, argv):
    at(robot_copy)
    assert call(*argv)[0] == 2


def test_no_project(at, tmp_path):
    at(tmp_path)
    code, _, err = call("lint")
    assert code == 2 and "init" in err


def test_parse_error(at, robot_copy):
    at(robot_copy)
    (robot_copy / "odm.json").write_text("{not json")
    code, _, err = call("lint")
    assert code == 3 and "odm.json" in err


def test_assemble_writes_outputs(at, robot_copy):
    at(robot_copy)
    code, out, _ = call("assemble")
    assert code == 0 and "0 open" in out
    doc = json.loads((robot_copy / "out" / "argument.json").read_text())
    assert doc["root"] == "G0"
    assert (robot_copy / "out" / "argument.dot").read_text().startswith("digraph")


def test_instantiate(at, robot_copy):
    at(robot_copy)
    code, out, _ = call("instantiate", "--pattern", "DD", "--tier", "1")
    assert code == 0
    assert (robot_copy / "out" / "instances" / "EE-tier-1.json").is_file()
    assert call("instantiate", "--pattern", "N")[0] == 0


def test_requirements_and_odm_checks(at, robot_copy):
    at(robot_copy)
    code, out, _ = call("requirements", "check")
    assert code == 0 and "SR-0.2@0 Complex" in out
    code, out, _ = call("odm", "check")
    assert (code, out) == (0, "no problems found\n")


def test_boundary_eval(at, robot_copy):
    at(robot_copy)
    code, out, _ = call("boundary", "eval", "--trace", "traces/people_density.csv")
    assert code == 0
    assert json.loads(out)["false_negatives"] == []
    assert call("boundary", "eval", "--trace", "traces/people_density.csv", "--recognizer", "5")[0] == 2


def test_validate_stage(at, robot_copy):
    at(robot_copy)
    code, out, _ = call("validate", "--stage", "2")
    assert code == 0 and "validated XX" in out


def test_export_and_trace_matrix(at, robot_copy):
    at(robot_copy)
    code, out, _ = call("export", "--format", "report")
    assert code == 0 and "## Lint" in out and "- no findings" in out
    code, out, _ = call("export", "--format", "dot")
    assert code == 0 and out.startswith("digraph")
    code, out, _ = call("trace-matrix")
    assert code == 0 and len(out.splitlines()) == 10


READ_ONLY = [
    ["status"], ["enumerate"], ["requirements", "check"], ["odm", "check"],
    ["boundary", "eval", "--trace", "traces/people_density.csv"],
    ["instantiate", "--pattern", "G"], ["instantiate", "--pattern", "UU", "--tier", "0"],
    ["assemble"], ["lint"], ["export", "--format", "report"], ["export", "--format", "dot"], ["trace-matrix"],
]


def test_idempotent_and_user_files_untouched(at, robot_copy):
    at(robot_copy)
    user = snapshot(robot_copy, skip_out=True)
    first = [call(*argv) for argv in READ_ONLY]
    files = snapshot(robot_copy)
    second = [call(*argv) for argv in READ_ONLY]
    assert first == second
    assert snapshot(robot_copy) == files
    assert snapshot(robot_copy, skip_out=True) == user


def test_module_entry_point(robot_dir, tmp_path):
    import subprocess
    import sys

    dest = tmp_path / "p"
    shutil.copytree(robot_dir, dest)
    proc = subprocess.run([sys.executable, "-m", "sacekit", "lint"], cwd=dest, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
