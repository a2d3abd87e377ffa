"""Operational domain models, reduced domains and boundary recognition.

Feature paths are slash-separated names from the root of the feature tree,
e.g. ``environment/weather/rain_rate``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .common import Violation, expect, read_json
from .errors import ArtifactParseError, MisalignedTrace


# feature tree


@dataclass(frozen=True)
class Categorical:
    values: tuple[str, ...]

    def contains(self, other: "Categorical") -> bool:
        return set(other.values) <= set(self.values)

    def __str__(self) -> str:
        return "{" + ", ".join(self.values) + "}"


@dataclass(frozen=True)
class Numeric:
    min: float
    max: float
    unit: str = ""

    def contains(self, other: "Numeric") -> bool:
        return self.min <= other.min and other.max <= self.max

    def __str__(self) -> str:
        return f"[{self.min:g}, {self.max:g}]" + (f" {self.unit}" if self.unit else "")


Domain = Categorical | Numeric


@dataclass(frozen=True)
class OdmFeature:
    name: str
    domain: Domain | None = None
    children: tuple["OdmFeature", ...] = ()
    granularity_rationale: str = ""

    @property
    def leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class OdmModel:
    features: tuple[OdmFeature, ...]

    def walk(self) -> Iterable[tuple[str, OdmFeature]]:
        stack = [(f.name, f) for f in reversed(self.features)]
        while stack:
            path, f = stack.pop()
            yield path, f
            stack.extend((f"{path}/{c.name}", c) for c in reversed(f.children))

    def paths(self) -> list[str]:
        return [p for p, _ in self.walk()]

    def leaf_paths(self) -> list[str]:
        return [p for p, f in self.walk() if f.leaf]

    def feature(self, path: str) -> OdmFeature | None:
        return dict(self.walk()).get(path)


def check_odm(odm: OdmModel) -> list[Violation]:
    out = []

    def dupes(siblings: Sequence[OdmFeature], parent: str) -> None:
        seen = set()
        for f in siblings:
            if f.name in seen:
                out.append(Violation("ODM001", f"{parent}/{f.name}".lstrip("/"), "duplicate feature name"))
            seen.add(f.name)

    dupes(odm.features, "")
    for path, f in odm.walk():
        dupes(f.children, path)
        if isinstance(f.domain, Numeric) and not f.domain.min < f.domain.max:
            out.append(Violation("ODM002", path, f"numeric range {f.domain} is empty or degenerate"))
        if isinstance(f.domain, Categorical) and not f.domain.values:
            out.append(Violation("ODM002", path, "categorical feature has no values"))
        if f.leaf and f.domain is None:
            out.append(Violation("ODM003", path, "leaf feature has no domain"))
        if f.leaf and not f.granularity_rationale.strip():
            out.append(Violation("ODM004", path, "leaf feature lacks a granularity rationale"))
    return sorted(set(out))


def _domain_from(data: Mapping[str, Any]) -> Domain | None:
    kind = data.get("kind")
    if kind is None:
        return None
    if kind == "categorical":
        return Categorical(tuple(str(v) for v in data["values"]))
    if kind == "numeric":
        return Numeric(float(data["min"]), float(data["max"]), str(data.get("unit", "")))
    raise ValueError(f"unknown feature kind {kind!r}")


def _feature_from(data: Mapping[str, Any]) -> OdmFeature:
    return OdmFeature(
        name=data["name"],
        domain=_domain_from(data),
        children=tuple(_feature_from(c) for c in data.get("children", ())),
        granularity_rationale=data.get("granularity_rationale", ""),
    )


def odm_from_dict(data: Mapping[str, Any]) -> OdmModel:
    return OdmModel(tuple(_feature_from(f) for f in data.get("features", ())))


def load_odm(path: Path) -> OdmModel:
    data = read_json(path)
    expect(isinstance(data, Mapping), path, "expected an object")
    try:
        return odm_from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactParseError(path, f"bad feature: {exc}") from exc


# reduced operating domains


@dataclass(frozen=True)
class Narrowing:
    path: str
    domain: Domain


@dataclass(frozen=True)
class RodConstraint:
    id: str
    trigger: str
    narrowings: tuple[Narrowing, ...] = ()
    capability_reductions: tuple[str, ...] = ()


def check_rod(odm: OdmModel, rod: RodConstraint, capabilities: Iterable[str] | None = None) -> list[Violation]:
    """Containment check: every narrowing must be a strict subset of its feature."""
    out = []
    if not rod.narrowings and not rod.capability_reductions:
        out.append(Violation("ROD003", rod.id, "neither narrows the ODM nor reduces a capability"))
    features = dict(odm.walk())
    for n in rod.narrowings:
        locus = f"{rod.id}:{n.path}"
        f = features.get(n.path)
        if f is None:
            out.append(Violation("ROD001", locus, "no such ODM feature"))
            continue
        if f.domain is None or type(f.domain) is not type(n.domain):
            out.append(Violation("ROD002", locus, f"narrowed domain {n.domain} does not match the feature kind"))
            continue
        if isinstance(n.domain, Numeric):
            empty = n.domain.min > n.domain.max
        else:
            empty = not n.domain.values
        if empty or not f.domain.contains(n.domain) or f.domain.contains(n.domain) and n.domain.contains(f.domain):
            out.append(Violation("ROD002", locus, f"{n.domain} is not a strict subset of {f.domain}"))
    if capabilities is not None:
        known = set(capabilities)
        for c in rod.capability_reductions:
            if c not in known:
                out.append(Violation("ROD004", f"{rod.id}:{c}", "unknown capability"))
    return sorted(out)


def rod_from_dict(data: Mapping[str, Any]) -> RodConstraint:
    narrowings = []
    for n in data.get("narrowings", ()):
        if "values" in n:
            dom: Domain = Categorical(tuple(str(v) for v in n["values"]))
        else:
            dom = Numeric(float(n["min"]), float(n["max"]), str(n.get("unit", "")))
        narrowings.append(Narrowing(n["path"], dom))
    return RodConstraint(data["id"], data.get("trigger", ""), tuple(narrowings),
                         tuple(data.get("capability_reductions", ())))


def load_rods(path: Path) -> list[RodConstraint]:
    data = read_json(path)
    expect(isinstance(data, Mapping) and isinstance(data.get("rods"), list), path,
           "expected an object with a 'rods' list")
    try:
        return [rod_from_dict(r) for r in data["rods"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactParseError(path, f"bad ROD: {exc}") from exc


# transition model


class OdmState(str, enum.Enum):
    IN_AUTONOMOUS = "InOdm-Autonomous"
    IN_NON_AUTONOMOUS = "InOdm-NonAutonomous"
    OUT_AUTONOMOUS = "OutOdm-Autonomous"
    OUT_NON_AUTONOMOUS = "OutOdm-NonAutonomous"

    @property
    def in_odm(self) -> bool:
        return self.value.startswith("InOdm")


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    condition: str = ""
    assessed_unsafe_modes: tuple[str, ...] = ()
    mitigations: tuple[str, ...] = ()
    assessed_safe: bool = False


@dataclass(frozen=True)
class TransitionModel:
    states: tuple[str, ...]
    transitions: tuple[Transition, ...]


def check_transition_model(tm: TransitionModel) -> list[Violation]:
    out = []
    known = {s.value for s in OdmState}
    declared = set(tm.states)
    for s in OdmState:
        if s.value not in declared:
            out.append(Violation("TM001", s.value, "state missing from the transition model"))
    for s in sorted(declared - known):
        out.append(Violation("TM005", s, "not a transition model state"))
    seen = set()
    touched = set()
    for t in tm.transitions:
        locus = f"{t.source}->{t.target}"
        if (t.source, t.target) in seen:
            out.append(Violation("TM004", locus, "duplicate transition"))
        seen.add((t.source, t.target))
        touched |= {t.source, t.target}
        bad = [x for x in (t.source, t.target) if x not in declared or x not in known]
        if bad:
            out.append(Violation("TM005", locus, f"references unknown state {bad[0]}"))
            continue
        if OdmState(t.source).in_odm != OdmState(t.target).in_odm:
            if not t.assessed_unsafe_modes and not t.assessed_safe:
                out.append(Violation("TM002", locus, "boundary crossing has no unsafe-mode assessment"))
    for s in sorted(declared & known - touched):
        out.append(Violation("TM003", s, "no transition enters or leaves this state"))
    return sorted(out)


def transition_model_from_dict(data: Mapping[str, Any]) -> TransitionModel:
    return TransitionModel(
        tuple(data.get("states", ())),
        tuple(
            Transition(t["from"], t["to"], t.get("condition", ""),
                       tuple(t.get("assessed_unsafe_modes", ())), tuple(t.get("mitigations", ())),
                       bool(t.get("assessed_safe", False)))
            for t in data.get("transitions", ())
        ),
    )


# recognition assessment matrix


class RecognitionCase(str, enum.Enum):
    APPROACH_FROM_INSIDE = "ApproachFromInside"
    CROSSING = "Crossing"
    APPROACH_FROM_OUTSIDE = "ApproachFromOutside"
    RE_ENTERING = "ReEntering"


class RecognitionFailure(str, enum.Enum):
    TIMELINESS = "Timeliness"
    ACCURACY = "Accuracy"
    HYSTERESIS = "Hysteresis"


@dataclass(frozen=True)
class AssessmentCell:
    hazardous: bool | None
    mitigation: str = ""
    rationale: str = ""


@dataclass(frozen=True)
class AssessmentMatrix:
    cells: Mapping[tuple[RecognitionCase, RecognitionFailure], AssessmentCell]


def check_assessment_matrix(m: AssessmentMatrix) -> list[Violation]:
    out = []
    for case in RecognitionCase:
        for mode in RecognitionFailure:
            locus = f"{case.value}x{mode.value}"
            cell = m.cells.get((case, mode))
            if cell is None or cell.hazardous is None:
                out.append(Violation("BA001", locus, "cell not assessed"))
            elif cell.hazardous and not cell.mitigation.strip():
                out.append(Violation("BA002", locus, "hazardous recognition failure has no mitigation"))
    return sorted(out)


def assessment_matrix_from_dict(data: Mapping[str, Any]) -> AssessmentMatrix:
    cells = {}
    for c in data.get("cells", ()):
        key = (RecognitionCase(c["case"]), RecognitionFailure(c["failure"]))
        cells[key] = AssessmentCell(c.get("hazardous"), c.get("mitigation", ""), c.get("rationale", ""))
    return AssessmentMatrix(cells)


# boundary recognition


@dataclass(frozen=True)
class BoundaryRecognizerSpec:
    """Debounced threshold recognizer for one boundary proxy.

    Values above the level ``threshold - margin * span`` count as outside.
    ``span`` is the width of the proxy feature's domain, so ``margin`` is a
    fraction of it; a larger margin shrinks the assumed domain and reports
    Outside no later.
    """

    feature: str
    threshold: float
    debounce_in: int = 1
    debounce_out: int = 1
    margin: float = 0.0
    span: float = 1.0
    max_latency: int | None = None
    sensor: str = ""

    def __post_init__(self) -> None:
        if self.margin < 0 or self.span <= 0:
            raise ValueError("margin must be >= 0 and span > 0")
        if self.debounce_in < 1 or self.debounce_out < 1:
            raise ValueError("debounce counts must be >= 1")

    @property
    def level(self) -> float:
        return self.threshold - self.margin * self.span


def recognizer_from_dict(data: Mapping[str, Any]) -> BoundaryRecognizerSpec:
    proxy = data.get("proxy", {})
    return BoundaryRecognizerSpec(
        feature=proxy.get("feature", data.get("feature", "")),
        threshold=float(data["threshold"]),
        debounce_in=int(data.get("debounce_in", 1)),
        debounce_out=int(data.get("debounce_out", 1)),
        margin=float(proxy.get("margin", data.get("margin", 0.0))),
        span=float(proxy.get("span", data.get("span", 1.0))),
        max_latency=data.get("max_latency"),
        sensor=proxy.get("sensor", ""),
    )


@dataclass(frozen=True)
class Sample:
    t: float
    value: float


@dataclass(frozen=True)
class TruthSample:
    t: float
    inside: bool


@dataclass(frozen=True)
class Declaration:
    index: int
    inside: bool


@dataclass(frozen=True)
class Detection:
    crossing_index: int
    inside: bool
    index: int
    latency: int
    late: bool = False


@dataclass(frozen=True)
class TraceMetrics:
    declarations: tuple[Declaration, ...]
    detections: tuple[Detection, ...]
    false_positives: tuple[int, ...]
    false_negatives: tuple[int, ...]
    flip_flops: int
    states: tuple[bool, ...] = field(repr=False, default=())

    def first_outside(self) -> int | None:
        return next((d.index for d in self.declarations if not d.inside), None)

    def to_dict(self) -> dict:
        return {
            "declarations": [{"index": d.index, "state": "Inside" if d.inside else "Outside"}
                             for d in self.declarations],
            "detections": [{"crossing": d.crossing_index, "state": "Inside" if d.inside else "Outside",
                            "index": d.index, "latency": d.latency, "late": d.late} for d in self.detections],
            "false_positives": list(self.false_positives),
            "false_negatives": list(self.false_negatives),
            "flip_flops": self.flip_flops,
        }


def run_recognizer(spec: BoundaryRecognizerSpec, values: Sequence[float]) -> tuple[list[Declaration], list[bool]]:
    """Per-sample recognizer states (True = inside) and state-change declarations."""
    level = spec.level
    inside = True
    run = 0
    declarations = []
    states = []
    for k, v in enumerate(values):
        beyond = v > level
        if inside == (not beyond):
            run = 0
        else:
            run += 1
            if run >= (spec.debounce_out if inside else spec.debounce_in):
                inside = not inside
                run = 0
                declarations.append(Declaration(k, inside))
        states.append(inside)
    return declarations, states


def truth_crossings(truth: Sequence[bool]) -> list[tuple[int, bool]]:
    """Indices where ground truth changes; the recognizer starts inside, so does truth."""
    out = []
    prev = True
    for k, inside in enumerate(truth):
        if inside != prev:
            out.append((k, inside))
        prev = inside
    return out


def _align(trace: Sequence[Sample], truth: Sequence[TruthSample]) -> None:
    if not trace:
        raise MisalignedTrace("trace has no samples")
    if len(trace) != len(truth):
        raise MisalignedTrace(f"trace has {len(trace)} samples but truth has {len(truth)}")
    for k, (s, g) in enumerate(zip(trace, truth)):
        if s.t != g.t:
            raise MisalignedTrace(f"sample {k}: trace t={s.t} but truth t={g.t}")
        if not math.isfinite(s.value):
            raise MisalignedTrace(f"sample {k}: value is not finite")
        if k and not s.t > trace[k - 1].t:
            raise MisalignedTrace(f"sample {k}: t is not increasing")


def score(spec: BoundaryRecognizerSpec, declarations: Sequence[Declaration], states: Sequence[bool],
          truth: Sequence[bool]) -> TraceMetrics:
    """Match declarations to truth crossings.

    A crossing is detected by the first same-direction declaration at or
    after it and before the next crossing.  A crossing with no such
    declaration is still fine if the recognizer already holds the right state
    when the interval ends (it declared early); otherwise it is missed.
    Declarations matched to no crossing are false positives.
    """
    crossings = truth_crossings(truth)
    n = len(truth)
    used = set()
    detections = []
    missed = []
    for j, (k, inside) in enumerate(crossings):
        end = crossings[j + 1][0] if j + 1 < len(crossings) else n
        hit = next((d for d in declarations if k <= d.index < end and d.inside == inside), None)
        if hit is not None:
            used.add(hit.index)
            lat = hit.index - k
            late = spec.max_latency is not None and lat > spec.max_latency
            detections.append(Detection(k, inside, hit.index, lat, late))
        elif states[end - 1] != inside:
            missed.append(k)
    fps = tuple(d.index for d in declarations if d.index not in used)
    window = spec.debounce_in + spec.debounce_out
    flips = sum(1 for a, b in zip(declarations, declarations[1:]) if b.index - a.index < window)
    return TraceMetrics(tuple(declarations), tuple(detections), fps, tuple(missed), flips, tuple(states))


def evaluate_trace(spec: BoundaryRecognizerSpec, trace: Sequence[Sample],
                   truth: Sequence[TruthSample]) -> TraceMetrics:
    """Run the recognizer over a sampled proxy trace and score it against ground truth.

    Raises:
        MisalignedTrace: empty input, differing lengths or timestamps, or
            timestamps that do not increase.
    """
    _align(trace, truth)
    declarations, states = run_recognizer(spec, [s.value for s in trace])
    return score(spec, declarations, states, [g.inside for g in truth])


def load_trace_csv(path: Path) -> tuple[list[Sample], list[TruthSample]]:
    """Read a ``t,value,truth_inside`` CSV with a mandatory header."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"t", "value", "truth_inside"} <= set(reader.fieldnames):
                raise ArtifactParseError(path, "header must name t, value and truth_inside")
            trace, truth = [], []
            for line, row in enumerate(reader, 2):
                flag = row["truth_inside"].strip().lower()
                if flag not in {"true", "false", "1", "0"}:
                    raise ArtifactParseError(path, f"line {line}: truth_inside must be true/false")
                t = float(row["t"])
                trace.append(Sample(t, float(row["value"])))
                truth.append(TruthSample(t, flag in {"true", "1"}))
    except OSError as exc:
        raise ArtifactParseError(path, str(exc)) from exc
    except (ValueError, TypeError, AttributeError) as exc:
        raise ArtifactParseError(path, f"bad number: {exc}") from exc
    return trace, truth
