import pytest

from sacekit.errors import DanglingIf, EmptyResponse, NoShall, NoSystemName, RequirementSyntaxError
from sacekit.reqlang import (
    Clause,
    Keyword,
    Ontology,
    Template,
    classify,
    lint_terms,
    normalize_term,
    parse,
    print_requirement,
)

WARNING = "While the robot is moving, when a person is present, the robot shall issue an audible warning"


def test_complex_example():
    r = parse(WARNING)
    assert r.template == Template.COMPLEX
    assert r.clauses == (Clause(Keyword.WHILE, "the robot is moving"), Clause(Keyword.WHEN, "a person is present"))
    assert r.system == "robot"
    assert r.response == "issue an audible warning"


def test_ubiquitous():
    r = parse("The pump shall log all infusion events")
    assert r.template == Template.UBIQUITOUS and r.clauses == () and r.system == "pump"


def test_unwanted_behaviour():
    r = parse("If the long range sensors fail, then the shuttle shall limit speed to 5 km/h")
    assert r.template == Template.UNWANTED_BEHAVIOUR
    assert r.clauses[0].condition == "the long range sensors fail"
    assert r.system == "shuttle"


@pytest.mark.parametrize("text, template", [
    ("When the door opens, the robot shall stop.", Template.EVENT_DRIVEN),
    ("while charging the robot shall stay docked", Template.STATE_DRIVEN),
    ("WHERE a horn is fitted, the robot shall sound it.", Template.OPTIONAL_FEATURE),
])
def test_single_clause_templates(text, template):
    assert parse(text).template == template


def test_precondition_delimiter():
    r = parse("When in autonomous mode -- a pedestrian steps out, the car shall brake.")
    assert r.clauses[0].precondition == "in autonomous mode"
    assert r.clauses[0].condition == "a pedestrian steps out"


def test_id_and_raw_kept():
    r = parse("The pump shall beep.", id="SR-1")
    assert r.id == "SR-1" and r.raw == "The pump shall beep."


@pytest.mark.parametrize("text, exc", [
    ("The robot must stop.", NoShall),
    ("The robot shall", EmptyResponse),
    ("The robot shall .", EmptyResponse),
    ("shall stop.", NoSystemName),
    ("When the door opens, shall stop.", NoSystemName),
    ("If the door opens, the robot shall stop.", DanglingIf),
    ("Then the robot shall stop.", DanglingIf),
    ("When the door opens if it is windy, the robot shall stop.", DanglingIf),
    ("When , the robot shall stop.", RequirementSyntaxError),
])
def test_errors(text, exc):
    with pytest.raises(exc):
        parse(text)


def test_print_ubiquitous_has_no_keyword():
    assert print_requirement(parse("the pump shall beep")) == "The pump shall beep."


def test_print_title_cases_keywords():
    text = print_requirement(parse(WARNING))
    assert text == ("While the robot is moving, When a person is present, the robot shall issue "
                    "an audible warning.")
    assert parse(text) == parse(WARNING)


def test_classify_rules():
    w = Clause(Keyword.WHEN, "x")
    i = Clause(Keyword.IF, "y")
    assert classify([]) == Template.UBIQUITOUS
    assert classify([i]) == Template.UNWANTED_BEHAVIOUR
    assert classify([w, w]) == Template.EVENT_DRIVEN
    assert classify([i, i]) == Template.EVENT_DRIVEN
    assert classify([w, i]) == Template.COMPLEX


def test_normalize_term():
    assert normalize_term("Robots") == "robot"
    assert normalize_term("glass") == "glass"
    assert normalize_term("is") == "is"


def test_lint_terms_example():
    ont = Ontology.of(["robot", "person", "warning", "corridor"])
    words = [w.term for w in lint_terms(parse(WARNING), ont)]
    assert sorted(words) == ["audible", "issue", "moving", "present"]


def test_lint_terms_known_response():
    ont = Ontology.of(["pump", "log", "infusion events"])
    assert lint_terms(parse("The pump shall log infusion events"), ont) == []


def test_lint_terms_translucent():
    ont = Ontology.of(["robot", "detect", "wall", "material"])
    found = lint_terms(parse("The robot shall detect translucent walls"), ont)
    assert [w.term for w in found] == ["translucent"]
    assert found[0].location == "response"
