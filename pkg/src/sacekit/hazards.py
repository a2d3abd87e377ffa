"""Decision-point enumeration and hazardous scenario extraction.

Each decision point is expanded into every combination of real-world
environment state, believed environment state and option.  Rows are
classified by first-matching rules, and hazardous rows are merged into
scenarios keyed by (real state, option); the belief state is a cause and
never appears in a scenario statement.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .common import expect, read_json
from .errors import ArtifactParseError, InvalidDecisionPoint, UncoveredRows


def value_key(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def short_value(v: Any) -> str:
    if isinstance(v, bool):
        return "T" if v else "F"
    return str(v)


class OutcomeKind(str, enum.Enum):
    UNCLASSIFIED = "Unclassified"
    SAFE = "Safe"
    NOT_POSSIBLE = "NotPossible"
    HAZARDOUS = "Hazardous"


class Severity(str, enum.Enum):
    UNSPECIFIED = "Unspecified"
    MINOR = "Minor"
    MAJOR = "Major"
    FATAL = "Fatal"

    @property
    def rank(self) -> int:
        return _SEVERITY_RANK[self]


_SEVERITY_RANK = {Severity.UNSPECIFIED: 0, Severity.MINOR: 1, Severity.MAJOR: 2, Severity.FATAL: 3}


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind = OutcomeKind.UNCLASSIFIED
    description: str = ""
    severity: Severity = Severity.UNSPECIFIED
    severity_factors: str = ""

    def label(self) -> str:
        if self.kind == OutcomeKind.HAZARDOUS:
            text = "Hazardous"
            if self.description:
                text += f" - {self.description}"
            if self.severity != Severity.UNSPECIFIED:
                text += f" [{self.severity.value}]"
            return text
        if self.kind == OutcomeKind.NOT_POSSIBLE:
            return "Not possible (N/A)"
        return self.kind.value

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind.value}
        if self.kind == OutcomeKind.HAZARDOUS:
            out["description"] = self.description
            out["severity"] = self.severity.value
            if self.severity_factors:
                out["severity_factors"] = self.severity_factors
        return out


@dataclass(frozen=True)
class EnvVar:
    name: str
    domain: tuple[Any, ...]
    labels: Mapping[str, str] = field(default_factory=dict, compare=False, hash=False)

    def label(self, value: Any) -> str:
        return self.labels.get(value_key(value), f"{self.name} = {value_key(value)}")


@dataclass(frozen=True)
class Option:
    id: str
    text: str
    decision: str = ""

    @property
    def decision_text(self) -> str:
        return self.decision or self.text


@dataclass(frozen=True)
class SequenceStep:
    text: str
    interactions: tuple[str, ...] = ()
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class DecisionPoint:
    """A decision an autonomous system takes within an operating scenario.

    Attributes:
        id: Stable identifier.
        operating_scenario: Id of the operating scenario (artifact E) it belongs to.
        question: The decision being taken.
        env_vars: Environment variables relevant to the decision.
        options: Ordered alternatives the system may choose.
        steps: Interaction sequence leading to the decision.
        scenario_summary: Short operating-scenario phrase used in statements.
    """

    id: str
    operating_scenario: str
    question: str
    env_vars: tuple[EnvVar, ...]
    options: tuple[Option, ...]
    steps: tuple[SequenceStep, ...] = ()
    scenario_summary: str = ""

    def __post_init__(self) -> None:
        if len(self.options) < 2:
            raise InvalidDecisionPoint(f"{self.id}: at least two options are required")
        if not self.env_vars:
            raise InvalidDecisionPoint(f"{self.id}: at least one environment variable is required")
        if len({o.id for o in self.options}) != len(self.options):
            raise InvalidDecisionPoint(f"{self.id}: option ids must be unique")
        if len({v.name for v in self.env_vars}) != len(self.env_vars):
            raise InvalidDecisionPoint(f"{self.id}: environment variable names must be unique")
        for v in self.env_vars:
            keys = [value_key(x) for x in v.domain]
            if len(keys) < 2 or len(set(keys)) != len(keys):
                raise InvalidDecisionPoint(f"{self.id}: domain of {v.name} needs two or more distinct values")

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.env_vars)

    def option(self, option_id: str) -> Option:
        for o in self.options:
            if o.id == option_id:
                return o
        raise KeyError(option_id)

    @property
    def scenario_text(self) -> str:
        return self.scenario_summary or self.operating_scenario


@dataclass(frozen=True)
class SituationRow:
    index: int
    decision_point: str
    variables: tuple[str, ...]
    real: tuple[Any, ...]
    belief: tuple[Any, ...]
    option: str
    outcome: Outcome = Outcome()

    def real_map(self) -> dict[str, Any]:
        return dict(zip(self.variables, self.real))

    def belief_map(self) -> dict[str, Any]:
        return dict(zip(self.variables, self.belief))


def _match_values(spec: Mapping[str, Any], state: Mapping[str, Any]) -> bool:
    for name, want in spec.items():
        have = value_key(state[name])
        if isinstance(want, (list, tuple, set, frozenset)):
            if have not in {value_key(w) for w in want}:
                return False
        elif have != value_key(want):
            return False
    return True


@dataclass(frozen=True)
class Rule:
    """Classification rule; absent constraints match anything."""

    outcome: Outcome
    real: Mapping[str, Any] = field(default_factory=dict, hash=False)
    belief: Mapping[str, Any] = field(default_factory=dict, hash=False)
    options: frozenset[str] | None = None

    def matches(self, row: SituationRow) -> bool:
        if self.options is not None and row.option not in self.options:
            return False
        unknown = (set(self.real) | set(self.belief)) - set(row.variables)
        if unknown:
            raise InvalidDecisionPoint(f"rule refers to unknown variable(s) {sorted(unknown)}")
        return _match_values(self.real, row.real_map()) and _match_values(self.belief, row.belief_map())


def enumerate_rows(dp: DecisionPoint) -> list[SituationRow]:
    """All (real, belief, option) combinations in lexicographic order.

    Order follows declaration order of variables, domain values and options.
    """
    states = list(itertools.product(*(v.domain for v in dp.env_vars)))
    rows = []
    for i, (real, belief, opt) in enumerate(itertools.product(states, states, dp.options), 1):
        rows.append(SituationRow(i, dp.id, dp.variables, tuple(real), tuple(belief), opt.id))
    return rows


def classify(rows: Sequence[SituationRow], rules: Sequence[Rule]) -> list[SituationRow]:
    """Assign each row the outcome of its first matching rule."""
    out = []
    uncovered = []
    for row in rows:
        hit = next((r for r in rules if r.matches(row)), None)
        if hit is None:
            uncovered.append(row)
        else:
            out.append(replace(row, outcome=hit.outcome))
    if uncovered:
        raise UncoveredRows(uncovered)
    return out


@dataclass(frozen=True)
class HazardousScenario:
    id: str
    decision_point: str
    operating_scenario: str
    environment_states: tuple[str, ...]
    decision: str
    source_rows: tuple[int, ...]
    severity: Severity
    hazards: tuple[str, ...] = ()

    @property
    def statement(self) -> str:
        env = "; ".join(self.environment_states)
        return f"<{self.operating_scenario}><{env}> AND <{self.decision}>"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "decision_point": self.decision_point,
            "statement": self.statement,
            "operating_scenario": self.operating_scenario,
            "environment_states": list(self.environment_states),
            "decision": self.decision,
            "hazards": list(self.hazards),
            "severity": self.severity.value,
            "source_rows": list(self.source_rows),
        }


def extract_hazardous(dp: DecisionPoint, rows: Iterable[SituationRow]) -> list[HazardousScenario]:
    """Merge hazardous rows sharing (real state, option) into scenarios."""
    state_pos = {tuple(value_key(x) for x in s): i
                 for i, s in enumerate(itertools.product(*(v.domain for v in dp.env_vars)))}
    opt_pos = {o.id: i for i, o in enumerate(dp.options)}
    groups: dict[tuple[int, int], list[SituationRow]] = {}
    for row in rows:
        if row.decision_point != dp.id or row.outcome.kind != OutcomeKind.HAZARDOUS:
            continue
        key = (state_pos[tuple(value_key(x) for x in row.real)], opt_pos[row.option])
        groups.setdefault(key, []).append(row)
    out = []
    for k, key in enumerate(sorted(groups), 1):
        members = sorted(groups[key], key=lambda r: r.index)
        first = members[0]
        env = tuple(v.label(val) for v, val in zip(dp.env_vars, first.real))
        severity = max((r.outcome.severity for r in members), key=lambda s: s.rank)
        hazards = tuple(dict.fromkeys(r.outcome.description for r in members if r.outcome.description))
        out.append(HazardousScenario(
            id=f"{dp.id}-HS{k}",
            decision_point=dp.id,
            operating_scenario=dp.scenario_text,
            environment_states=env,
            decision=dp.option(first.option).decision_text,
            source_rows=tuple(r.index for r in members),
            severity=severity,
            hazards=hazards,
        ))
    return out


# documents


@dataclass(frozen=True)
class DecisionModel:
    point: DecisionPoint
    rules: tuple[Rule, ...]

    def analyse(self) -> tuple[list[SituationRow], list[HazardousScenario]]:
        rows = classify(enumerate_rows(self.point), self.rules)
        return rows, extract_hazardous(self.point, rows)


def _outcome(data: Mapping[str, Any], where: str) -> Outcome:
    try:
        return Outcome(
            kind=OutcomeKind(data.get("kind", "Unclassified")),
            description=str(data.get("description", "")),
            severity=Severity(data.get("severity", "Unspecified")),
            severity_factors=str(data.get("severity_factors", "")),
        )
    except ValueError as exc:
        raise InvalidDecisionPoint(f"{where}: {exc}") from exc


def decision_model_from_dict(data: Mapping[str, Any], scenario_summaries: Mapping[str, str] | None = None) -> DecisionModel:
    dp_id = data["id"]
    env = tuple(
        EnvVar(v["name"], tuple(v["domain"]), {str(k): str(x) for k, x in v.get("labels", {}).items()})
        for v in data.get("env_vars", ())
    )
    opts = []
    for i, o in enumerate(data["options"], 1):
        if isinstance(o, str):
            opts.append(Option(f"opt{i}", o))
        else:
            opts.append(Option(o.get("id", f"opt{i}"), o["text"], o.get("decision", "")))
    steps = tuple(
        SequenceStep(s["text"], tuple(s.get("interactions", ())), tuple(s.get("flags", ())))
        if isinstance(s, Mapping) else SequenceStep(str(s))
        for s in data.get("steps", ())
    )
    summary = data.get("scenario_summary") or (scenario_summaries or {}).get(data["operating_scenario"], "")
    dp = DecisionPoint(dp_id, data["operating_scenario"], data.get("question", ""), env, tuple(opts),
                       steps, summary)
    rules = []
    for j, r in enumerate(data.get("rules", ()), 1):
        opt = r.get("option")
        options = None if opt is None else frozenset([opt] if isinstance(opt, str) else opt)
        if options is not None and not options <= {o.id for o in dp.options}:
            raise InvalidDecisionPoint(f"{dp_id} rule {j}: unknown option in {sorted(options)}")
        rules.append(Rule(_outcome(r.get("outcome", {}), f"{dp_id} rule {j}"),
                          dict(r.get("real", {})), dict(r.get("belief", {})), options))
    return DecisionModel(dp, tuple(rules))


def load_decisions(path: Path, scenario_summaries: Mapping[str, str] | None = None) -> list[DecisionModel]:
    data = read_json(path)
    expect(isinstance(data, Mapping) and isinstance(data.get("decision_points"), list), path,
           "expected an object with a 'decision_points' list")
    try:
        return [decision_model_from_dict(d, scenario_summaries) for d in data["decision_points"]]
    except (KeyError, TypeError, InvalidDecisionPoint) as exc:
        raise ArtifactParseError(path, f"bad decision point: {exc}") from exc


def ww_document(models: Sequence[DecisionModel], rows_by_dp: Mapping[str, Sequence[SituationRow]]) -> dict:
    out = []
    for m in models:
        dp = m.point
        out.append({
            "id": dp.id,
            "operating_scenario": dp.operating_scenario,
            "question": dp.question,
            "variables": list(dp.variables),
            "options": [{"id": o.id, "text": o.text} for o in dp.options],
            "rows": [
                {
                    "index": r.index,
                    "real": [value_key(x) for x in r.real],
                    "belief": [value_key(x) for x in r.belief],
                    "option": r.option,
                    "outcome": r.outcome.to_dict(),
                }
                for r in rows_by_dp[dp.id]
            ],
        })
    return {"decision_points": out}


def xx_document(scenarios: Sequence[HazardousScenario]) -> dict:
    return {"scenarios": [s.to_dict() for s in scenarios]}


def scenarios_from_document(data: Mapping[str, Any]) -> list[HazardousScenario]:
    return [
        HazardousScenario(
            id=s["id"],
            decision_point=s.get("decision_point", ""),
            operating_scenario=s.get("operating_scenario", ""),
            environment_states=tuple(s.get("environment_states", ())),
            decision=s.get("decision", ""),
            source_rows=tuple(s.get("source_rows", ())),
            severity=Severity(s.get("severity", "Unspecified")),
            hazards=tuple(s.get("hazards", ())),
        )
        for s in data.get("scenarios", ())
    ]


def render_table(dp: DecisionPoint, rows: Sequence[SituationRow]) -> str:
    """Plain-text decision table in the layout of a decision analysis report."""
    def state(values: tuple) -> str:
        if len(values) == 1:
            return short_value(values[0])
        return "; ".join(f"{n}={short_value(v)}" for n, v in zip(dp.variables, values))

    header = ["#", "Real world state", "Belief state", "Option", "Outcome"]
    body = [[str(r.index), state(r.real), state(r.belief), dp.option(r.option).text, r.outcome.label()]
            for r in rows]
    widths = [max(len(x) for x in col) for col in zip(header, *body)]

    def line(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

    out = [f"Decision point: {dp.id}",
           f"Operating scenario: {dp.operating_scenario}" + (f" ({dp.scenario_summary})" if dp.scenario_summary else ""),
           f"Decision: {dp.question}",
           "Options:"]
    out += [f"  {i}. {o.text}" for i, o in enumerate(dp.options, 1)]
    out += ["", line(header), line(["-" * w for w in widths])]
    out += [line(b) for b in body]
    return "\n".join(out) + "\n"


# validation


@dataclass(frozen=True)
class ChecklistItem:
    check: str
    failures: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failures


def validation_checklist(
    models: Sequence[DecisionModel],
    rows_by_dp: Mapping[str, Sequence[SituationRow]],
    scenarios: Sequence[HazardousScenario],
    scenario_ids: Iterable[str],
    odm_paths: Iterable[str],
) -> list[ChecklistItem]:
    """Consistency checks between the decision analysis and the hazardous scenarios."""
    known_scen = set(scenario_ids)
    known_paths = set(odm_paths)
    bad_scen = [f"{m.point.id}: unknown operating scenario {m.point.operating_scenario!r}"
                for m in models if m.point.operating_scenario not in known_scen]
    bad_elem = [f"{m.point.id}: step {i} references unknown ODM element {p!r}"
                for m in models for i, s in enumerate(m.point.steps, 1)
                for p in s.interactions if p not in known_paths]
    unclassified = [f"{dp}: row {r.index} is unclassified"
                    for dp, rows in rows_by_dp.items() for r in rows
                    if r.outcome.kind == OutcomeKind.UNCLASSIFIED]
    covered = {(s.decision_point, i) for s in scenarios for i in s.source_rows}
    orphans = [f"{dp}: hazardous row {r.index} is not captured by any hazardous scenario"
               for dp, rows in rows_by_dp.items() for r in rows
               if r.outcome.kind == OutcomeKind.HAZARDOUS and (dp, r.index) not in covered]
    incomplete = []
    for s in scenarios:
        missing = [f for f in ("operating_scenario", "environment_states", "decision") if not getattr(s, f)]
        if missing:
            incomplete.append(f"{s.id}: empty {', '.join(missing)}")
    return [
        ChecklistItem("decision points reference defined operating scenarios", tuple(bad_scen)),
        ChecklistItem("interaction elements exist in the ODM", tuple(bad_elem)),
        ChecklistItem("every situation row is classified", tuple(unclassified)),
        ChecklistItem("every hazardous row maps to a hazardous scenario", tuple(orphans)),
        ChecklistItem("hazardous scenarios are complete", tuple(incomplete)),
    ]
