import pytest

from sacekit.assembly import assemble_full_case, bindings_for, tier_specs
from sacekit.errors import MissingSubArgument
from sacekit.gsn import NodeKind, check_wellformed
from sacekit.project import load_project


@pytest.fixture(scope="module")
def case(robot):
    return assemble_full_case(robot)


def test_single_wellformed_graph(case):
    g = case.graph
    assert check_wellformed(g) == []
    assert set(g.subtree(g.root)) == {n.id for n in g.nodes}


def test_all_sites_satisfied(case):
    assert case.open_acps == [] and case.skipped == [] and case.warnings == []
    assert case.pattern_kinds == {"G", "I", "N", "PP", "S", "U", "DD", "UU"}


def test_soc_argument_under_g4(case):
    g = case.graph
    assert "G3.1" in g.subtree("G4")
    assert "G7.1" in g.subtree("G7")


def test_tier_sub_arguments_are_suffixed(case):
    ids = {n.id for n in case.graph.nodes}
    assert {"G4.1@0", "G4.1@1", "G6@0", "G6@1"} <= ids
    assert case.attached["ACP-verification#5@1"] == "UU"


def test_solutions_carry_evidence(case):
    sols = [n for n in case.graph.nodes if n.kind == NodeKind.SOLUTION]
    assert sols
    for n in sols:
        assert n.metadata.get("evidence", {}).get("status") == "Validated", n.id


def test_missing_outside_argument(robot_copy):
    (robot_copy / "arguments" / "QQ.json").unlink()
    proj = load_project(robot_copy)
    with pytest.raises(MissingSubArgument) as info:
        assemble_full_case(proj)
    assert info.value.pattern == "PP"
    lenient = assemble_full_case(proj, strict=False)
    assert lenient.skipped == ["ACP-outside: no binding document for QQ"]
    assert lenient.open_acps == ["ACP-outside"]


def test_partial_requirements_lenient(robot_copy):
    (robot_copy / "requirements" / "tier-1.json").unlink()
    case = assemble_full_case(load_project(robot_copy), strict=False)
    assert check_wellformed(case.graph) == []
    assert not any(n.id.endswith("@1") for n in case.graph.nodes)


def test_binding_document_scalars_override(robot_copy):
    (robot_copy / "arguments" / "O.json").write_text('{"scalars": {"M": "elsewhere.md"}}')
    b = bindings_for(load_project(robot_copy))["O"]
    assert b.scalars["M"] == "elsewhere.md"


def test_tier_specs(robot):
    specs = tier_specs(robot)
    assert [s.tier for s in specs] == [0, 1]
    assert [len(s.requirements) for s in specs] == [3, 5]


def test_assembly_is_deterministic(robot):
    assert assemble_full_case(robot).graph == assemble_full_case(robot).graph
