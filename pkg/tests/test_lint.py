import json
import shutil

import pytest

from sacekit.common import dump_json
from sacekit.fixtures import materialize_fixture, mutation_names
from sacekit.lint import LintFinding, has_errors, lint, render_trace_matrix, trace_matrix
from sacekit.project import load_project

# where the locus of each mutation's error lives
LOCUS_FILE = {
    "E101": "out/XX.json",
    "E102": "requirements/tier-1.json",
    "E103": "trace.json",
    "E104": "analysis/failures-tier-1.json",
    "E105": "analysis/failures-tier-1.json",
    "E106": "analysis/failures-tier-0.json",
    "E107": None,
}


def edit(root, rel, fn):
    p = root / rel
    doc = json.loads(p.read_text())
    fn(doc)
    p.write_text(dump_json(doc))


def codes(root):
    return [f.code for f in lint(load_project(root))]


@pytest.fixture(scope="module")
def mutated(tmp_path_factory):
    return {m: materialize_fixture(tmp_path_factory.mktemp(m) / "p", m) for m in mutation_names()}


def test_clean_fixture(robot):
    assert lint(robot) == []


@pytest.mark.parametrize("name", sorted(LOCUS_FILE))
def test_mutation_triggers_its_code(mutated, name):
    found = lint(load_project(mutated[name]))
    assert [f.code for f in found if f.severity.value == "Error"] == [name]
    assert has_errors(found)


def test_translucent_wall(robot_copy):
    def strip(doc):
        doc["failures"][0]["mitigations"] = []

    edit(robot_copy, "analysis/failures-tier-1.json", strip)
    found = lint(load_project(robot_copy))
    assert [(f.code, f.locus) for f in found] == [("E104", "FM-1.1@1")]

    def sensor(doc):
        doc["failures"][0]["mitigations"] = [{"form": "DesignChange", "target": "DEC-1.2",
                                              "justification": "additional sensor of a different type"}]

    edit(robot_copy, "analysis/failures-tier-1.json", sensor)
    assert lint(load_project(robot_copy)) == []


def test_untested_requirement(robot_copy):
    def drop(doc):
        for tc in doc["test_cases"]:
            tc["requirements"] = [r for r in tc["requirements"] if r != "SR-1.2"]

    edit(robot_copy, "verification/log.json", drop)
    assert "W201" in codes(robot_copy)


def test_no_edge_case(robot_copy):
    def untag(doc):
        for tc in doc["test_cases"]:
            tc["tags"] = [t for t in tc["tags"] if t != "edge-case"]

    edit(robot_copy, "verification/log.json", untag)
    assert codes(robot_copy) == ["W204"]


def test_unexercised_feature_and_scenario(robot_copy):
    def narrow(doc):
        for tc in doc["test_cases"]:
            tc["odm_features"] = [f for f in tc["odm_features"] if f != "environment/wall_material"]
            tc["scenarios"] = [s for s in tc["scenarios"] if s != "OS2"]

    edit(robot_copy, "verification/log.json", narrow)
    found = [(f.code, f.locus) for f in lint(load_project(robot_copy))]
    assert ("W202", "environment/wall_material") in found
    assert ("W203", "OS2") in found


def test_missing_results(robot_copy):
    def clear(doc):
        doc["results"] = [r for r in doc["results"] if r["requirement"] != "SR-1.2"]

    edit(robot_copy, "verification/results.json", clear)
    assert [(f.code, f.locus) for f in lint(load_project(robot_copy))] == [("W205", "SR-1.2@1")]


def test_missing_artifact_warns(robot_copy):
    (robot_copy / "outside" / "analysis.md").unlink()
    found = lint(load_project(robot_copy))
    assert "W200" in [f.code for f in found]


def test_finding_rendering():
    f = LintFinding("E101", "DP1-HS1", "no mitigation")
    assert str(f) == "E101 DP1-HS1 no mitigation"
    assert f.to_dict() == {"code": "E101", "severity": "Error", "locus": "DP1-HS1", "message": "no mitigation"}


def test_findings_sorted(mutated):
    found = lint(load_project(mutated["E104"]))
    assert found == sorted(found, key=lambda f: (f.code, f.locus, f.message))


def test_lint_is_pure(robot_dir):
    a = [f.to_dict() for f in lint(load_project(robot_dir))]
    b = [f.to_dict() for f in lint(load_project(robot_dir))]
    assert json.dumps(a) == json.dumps(b)


def test_removal_keeps_errors(mutated, tmp_path):
    """Deleting a file never clears an Error whose locus lives elsewhere."""
    for name, home in LOCUS_FILE.items():
        base = mutated[name]
        before = {(f.code, f.locus) for f in lint(load_project(base)) if f.code.startswith("E")}
        files = sorted(p.relative_to(base).as_posix() for p in base.rglob("*")
                       if p.is_file() and p.name != "sace.json")
        for rel in files:
            if rel == home:
                continue
            dest = tmp_path / f"{name}-{rel.replace('/', '_')}"
            shutil.copytree(base, dest)
            (dest / rel).unlink()
            after = {(f.code, f.locus) for f in lint(load_project(dest)) if f.code.startswith("E")}
            assert before <= after, (name, rel)


# trace matrix


def test_trace_matrix_rows(robot):
    rows = trace_matrix(robot)
    assert len(rows) == len(robot.all_requirements()) == 8
    assert [r.tier for r in rows].count(0) == 3


def test_tier1_rows_have_parents(robot):
    for r in trace_matrix(robot):
        if r.tier == 1:
            assert r.parents


def test_soc_rows_list_scenarios(robot):
    xx = {s.id for s in robot.hazardous}
    listed = {s for r in trace_matrix(robot) if r.tier == 0 for s in r.scenarios}
    assert listed and listed <= xx
    assert "DP1-HS1" in trace_matrix(robot)[0].scenarios


def test_children_mirror_parents(robot):
    rows = trace_matrix(robot)
    by = {(r.requirement, r.tier): r for r in rows}
    for r in rows:
        for p in r.parents:
            assert r.requirement in by[p, r.tier - 1].children


def test_render_trace_matrix(robot):
    text = render_trace_matrix(trace_matrix(robot))
    lines = text.splitlines()
    assert lines[0].startswith("Requirement")
    assert len(lines) == 2 + 8
