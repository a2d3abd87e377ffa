"""Artifact catalog, stage wiring and project manifest.

The eight stages are fixed constants. Each stage also lists its activities
so that provenance can be traced at the granularity of individual outputs
rather than whole stages.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path

from .common import dump_json, expect, file_checksum, has_content, read_json, write_text_if_changed
from .errors import ArtifactParseError, NotAnOutput, TierRequired, UnknownStage

MANIFEST_NAME = "sace.json"


class ArtifactId(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"
    G = "G"
    H = "H"
    I = "I"  # noqa: E741
    J = "J"
    K = "K"
    L = "L"
    M = "M"
    N = "N"
    O = "O"  # noqa: E741
    P = "P"
    Q = "Q"
    R = "R"
    S = "S"
    T = "T"
    U = "U"
    V = "V"
    W = "W"
    X = "X"
    Y = "Y"
    Z = "Z"
    AA = "AA"
    BB = "BB"
    DD = "DD"
    EE = "EE"
    FF = "FF"
    GG = "GG"
    HH = "HH"
    II = "II"
    JJ = "JJ"
    KK = "KK"
    LL = "LL"
    MM = "MM"
    NN = "NN"
    OO = "OO"
    PP = "PP"
    QQ = "QQ"
    RR = "RR"
    SS = "SS"
    TT = "TT"
    UU = "UU"
    VV = "VV"
    WW = "WW"
    XX = "XX"
    YY = "YY"

    @property
    def title(self) -> str:
        return TITLES[self]

    @property
    def tiered(self) -> bool:
        return self in TIERED

    @property
    def builtin(self) -> bool:
        return self in BUILTIN_PATTERNS

    @property
    def order(self) -> int:
        return _ORDER[self]

    def __str__(self) -> str:
        return self.value


_ORDER = {a: i for i, a in enumerate(ArtifactId)}

TITLES: dict[ArtifactId, str] = {
    ArtifactId.A: "AS Concept Definition",
    ArtifactId.B: "Operational Domain Model",
    ArtifactId.C: "ODM Validation Report",
    ArtifactId.D: "Autonomous Capabilities Definition",
    ArtifactId.E: "Operating Scenarios Definition",
    ArtifactId.F: "Operating Scenarios Validation Report",
    ArtifactId.G: "AS Operating Context Assurance Argument Pattern",
    ArtifactId.H: "AS Operating Context Assurance Argument",
    ArtifactId.I: "AS Hazardous Scenarios Assurance Argument Pattern",
    ArtifactId.J: "AS Hazardous Scenarios Assurance Argument",
    ArtifactId.K: "Definition of Sufficiently Safe",
    ArtifactId.L: "Safe Operating Concept Definition",
    ArtifactId.M: "SOC Justification Report",
    ArtifactId.N: "SOC Assurance Argument Pattern",
    ArtifactId.O: "SOC Assurance Argument",
    ArtifactId.P: "Safety Requirements from Tier n-1",
    ArtifactId.Q: "Safety Requirements for Tier n",
    ArtifactId.R: "Safety Requirements Justification Report",
    ArtifactId.S: "Safety Requirements Argument Pattern",
    ArtifactId.T: "Safety Requirements Argument",
    ArtifactId.U: "AS Design Assurance Argument Pattern",
    ArtifactId.V: "AS Development Log",
    ArtifactId.W: "Tier n Design",
    ArtifactId.X: "Design Process for Tier n",
    ArtifactId.Y: "AS Design Justification",
    ArtifactId.Z: "AS Design Review",
    ArtifactId.AA: "AS Design Assurance Argument",
    ArtifactId.BB: "AS Safety Analysis Report",
    ArtifactId.DD: "Hazardous Failures Argument Pattern",
    ArtifactId.EE: "Hazardous Failures Argument",
    ArtifactId.FF: "Key Features of Environment Outside ODM",
    ArtifactId.GG: "Out of Context Analysis Report",
    ArtifactId.HH: "Interpretation of ODM Boundary",
    ArtifactId.II: "ODM Boundary Assessment Report",
    ArtifactId.JJ: "ODM Transition Model",
    ArtifactId.KK: "Transition Assessment Report",
    ArtifactId.LL: "Stakeholder Risk Acceptance Definition",
    ArtifactId.MM: "Outside ODM Minimum Risk Strategy",
    ArtifactId.NN: "Outside ODM Strategy Justification Report",
    ArtifactId.OO: "Outside ODM Verification Report",
    ArtifactId.PP: "Out of Context Operation Assurance Argument Pattern",
    ArtifactId.QQ: "Out of Context Operation Assurance Argument",
    ArtifactId.RR: "Verification Strategy",
    ArtifactId.SS: "AS Verification Log",
    ArtifactId.TT: "Verification Results",
    ArtifactId.UU: "AS Verification Argument Pattern",
    ArtifactId.VV: "AS Verification Argument",
    ArtifactId.WW: "AS Decision Analysis Report",
    ArtifactId.XX: "AS Hazardous Scenarios Definition",
    ArtifactId.YY: "AS Hazardous Scenarios Validation Report",
}

_A = ArtifactId
TIERED = frozenset({_A.P, _A.Q, _A.R, _A.T, _A.V, _A.W, _A.X, _A.Y, _A.Z, _A.AA, _A.BB, _A.EE})
BUILTIN_PATTERNS = frozenset({_A.G, _A.I, _A.N, _A.S, _A.U, _A.DD, _A.PP, _A.UU})
# Authored by the project team and consumed without being produced by any stage.
PURE_INPUTS = frozenset({_A.A, _A.K, _A.X, _A.FF, _A.JJ, _A.LL})


class Status(str, enum.Enum):
    MISSING = "Missing"
    DRAFT = "Draft"
    VALIDATED = "Validated"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Activity:
    name: str
    inputs: frozenset[ArtifactId]
    outputs: frozenset[ArtifactId]


@dataclass(frozen=True)
class StageSpec:
    number: int
    name: str
    inputs: frozenset[ArtifactId]
    outputs: frozenset[ArtifactId]
    activities: tuple[Activity, ...] = ()

    @property
    def tiered(self) -> bool:
        return self.number in TIERED_STAGES


def _ids(text: str) -> frozenset[ArtifactId]:
    return frozenset(ArtifactId(t) for t in text.split())


def _act(name: str, outputs: str, inputs: str) -> Activity:
    return Activity(name, _ids(inputs), _ids(outputs))


STAGES: dict[int, StageSpec] = {
    1: StageSpec(1, "Operating Context Assurance", _ids("A G"), _ids("B C D E F H"), (
        _act("Define autonomous capabilities", "D", "A"),
        _act("Define and validate the ODM", "B C", "A D"),
        _act("Define and validate operating scenarios", "E F", "B D"),
        _act("Instantiate operating context argument", "H", "G B C D E F"),
    )),
    2: StageSpec(2, "AS Hazardous Scenarios Identification", _ids("B E I"), _ids("WW XX YY J"), (
        _act("Analyse AS decisions", "WW", "B E"),
        _act("Identify hazardous scenarios", "XX", "WW B E"),
        _act("Validate hazardous scenarios", "YY", "XX WW"),
        _act("Instantiate hazardous scenarios argument", "J", "I WW XX YY"),
    )),
    3: StageSpec(3, "Safe Operating Concept Assurance", _ids("B D E XX K N"), _ids("L M O"), (
        _act("Define safe operating concept", "L", "B D E XX K"),
        _act("Validate safe operating concept", "M", "L XX"),
        _act("Instantiate SOC argument", "O", "N L M"),
    )),
    4: StageSpec(4, "AS Safety Requirements Assurance", _ids("P W S"), _ids("Q R T"), (
        _act("Define safety requirements", "Q", "P W"),
        _act("Validate safety requirements", "R", "Q P"),
        _act("Instantiate safety requirements argument", "T", "S P W Q R"),
    )),
    5: StageSpec(5, "AS Design Assurance", _ids("Q X U"), _ids("W V Y Z AA"), (
        _act("Create design at tier n", "W V", "Q X"),
        _act("Review and justify design", "Y Z", "V W X Q"),
        _act("Instantiate design assurance argument", "AA", "U V W X Y Z"),
    )),
    6: StageSpec(6, "Hazardous Failures Management", _ids("B W DD"), _ids("BB Y Q EE"), (
        _act("Identify potential hazardous failures", "BB", "W B"),
        _act("Define mitigations", "Q Y", "BB"),
        _act("Instantiate hazardous failures argument", "EE", "DD BB Q Y"),
    )),
    7: StageSpec(7, "Out of Context Operation Assurance", _ids("B FF JJ LL PP"),
                 _ids("GG HH II KK MM NN OO QQ"), (
        _act("Assess operation outside ODM", "GG", "FF B"),
        _act("Assure recognition of the ODM boundary", "HH II", "B"),
        _act("Assure transitions in and out of ODM", "KK", "JJ"),
        _act("Define and validate minimum risk strategy", "MM NN", "GG KK LL"),
        _act("Demonstrate risk strategy is satisfied", "OO", "MM"),
        _act("Instantiate out of context argument", "QQ", "PP GG HH II KK MM NN OO"),
    )),
    8: StageSpec(8, "AS Verification Assurance", _ids("B D E L Q UU"), _ids("RR SS TT VV"), (
        _act("Determine verification strategy", "RR", "B D E L Q"),
        _act("Create verification log", "SS", "RR Q B E"),
        _act("Verify AS", "TT", "SS Q"),
        _act("Instantiate verification argument", "VV", "UU RR SS TT"),
    )),
}

TIERED_STAGES = frozenset({4, 5, 6})

ALL_OUTPUTS: frozenset[ArtifactId] = frozenset().union(*(s.outputs for s in STAGES.values()))

DEFAULT_PATHS: dict[ArtifactId, str] = {
    _A.A: "concept.md",
    _A.B: "odm.json",
    _A.C: "validation/odm.md",
    _A.D: "capabilities.json",
    _A.E: "scenarios.json",
    _A.F: "validation/scenarios.md",
    _A.H: "arguments/H.json",
    _A.J: "arguments/J.json",
    _A.K: "sufficiently_safe.md",
    _A.L: "soc.md",
    _A.M: "validation/soc.md",
    _A.O: "arguments/O.json",
    _A.Q: "requirements/tier-{n}.json",
    _A.R: "validation/requirements-tier-{n}.md",
    _A.T: "arguments/T-tier-{n}.json",
    _A.V: "design/log-tier-{n}.json",
    _A.W: "design/tier-{n}.json",
    _A.X: "design/process-tier-{n}.md",
    _A.Y: "design/justification-tier-{n}.md",
    _A.Z: "design/review-tier-{n}.md",
    _A.AA: "arguments/AA-tier-{n}.json",
    _A.BB: "analysis/failures-tier-{n}.json",
    _A.EE: "arguments/EE-tier-{n}.json",
    _A.FF: "outside/key_features.md",
    _A.GG: "outside/analysis.md",
    _A.HH: "boundary.json",
    _A.II: "boundary_assessment.json",
    _A.JJ: "transition_model.json",
    _A.KK: "outside/transition_assessment.md",
    _A.LL: "outside/risk_acceptance.md",
    _A.MM: "outside/minimum_risk_strategy.md",
    _A.NN: "outside/strategy_justification.md",
    _A.OO: "outside/verification.md",
    _A.QQ: "arguments/QQ.json",
    _A.RR: "verification/strategy.json",
    _A.SS: "verification/log.json",
    _A.TT: "verification/results.json",
    _A.VV: "arguments/VV.json",
    _A.WW: "out/WW.json",
    _A.XX: "out/XX.json",
    _A.YY: "validation/hazards.md",
}


def default_path(artifact: ArtifactId, tier: int | None = None) -> str:
    return DEFAULT_PATHS[artifact].format(n=tier)


def get_stage(number: object) -> StageSpec:
    if isinstance(number, bool) or not isinstance(number, int) or number not in STAGES:
        raise UnknownStage(number)
    return STAGES[number]


@dataclass(frozen=True, order=True)
class ArtifactRef:
    """An artifact id, optionally pinned to one tier."""

    id: ArtifactId
    tier: int | None = None

    def __str__(self) -> str:
        return f"{self.id.value}@{self.tier}" if self.tier is not None else self.id.value

    def sort_key(self) -> tuple[int, int]:
        return (self.id.order, -1 if self.tier is None else self.tier)


@dataclass
class ArtifactRecord:
    """One artifact instance in a project.

    Attributes:
        id: Which SACE artifact this is.
        tier: Tier index, present exactly for tier-indexed artifacts.
        path: File location relative to the project root.
        status: Lifecycle state recorded in the manifest.
        checksum: Content hash at the time the record was last refreshed.
        validated_at: ISO-8601 timestamp of the last validation.
    """

    id: ArtifactId
    tier: int | None
    path: str
    status: Status = Status.DRAFT
    checksum: str = ""
    validated_at: str | None = None

    def __post_init__(self) -> None:
        self.id = ArtifactId(self.id)
        self.status = Status(self.status)
        if self.id.builtin:
            raise ValueError(f"{self.id} is a built-in pattern, not a project artifact")
        if self.id.tiered:
            if self.tier is None or isinstance(self.tier, bool) or not isinstance(self.tier, int) or self.tier < 0:
                raise ValueError(f"{self.id} is tier-indexed and needs a non-negative tier")
        elif self.tier is not None:
            raise ValueError(f"{self.id} is not tier-indexed; tier must be absent")

    @property
    def ref(self) -> ArtifactRef:
        return ArtifactRef(self.id, self.tier)

    def to_dict(self) -> dict:
        out: dict = {"id": self.id.value}
        if self.tier is not None:
            out["tier"] = self.tier
        out["path"] = self.path
        out["status"] = self.status.value
        out["checksum"] = self.checksum
        out["validated_at"] = self.validated_at
        return out


@dataclass
class ProjectManifest:
    name: str
    tiers: int = 1
    artifacts: list[ArtifactRecord] = field(default_factory=list)
    root: Path | None = None

    def records(self, artifact: ArtifactId, tier: int | None = None) -> list[ArtifactRecord]:
        return [r for r in self.artifacts if r.id == artifact and (tier is None or r.tier == tier)]

    def record(self, artifact: ArtifactId, tier: int | None = None) -> ArtifactRecord | None:
        found = self.records(artifact, tier)
        return found[0] if found else None

    def path_of(self, artifact: ArtifactId, tier: int | None = None) -> Path | None:
        """Absolute path of an artifact, falling back to the default layout."""
        if self.root is None:
            return None
        rec = self.record(artifact, tier)
        rel = rec.path if rec else default_path(artifact, tier)
        return self.root / rel

    def effective_status(self, record: ArtifactRecord) -> Status:
        if record.status == Status.MISSING:
            if self.root is not None and has_content(self.root / record.path):
                return Status.DRAFT
            return Status.MISSING
        if self.root is not None and not has_content(self.root / record.path):
            return Status.MISSING
        return record.status

    def status_of(self, artifact: ArtifactId, tier: int | None = None) -> Status:
        """Best status among matching records; ``tier=None`` matches any tier."""
        best = Status.MISSING
        rank = {Status.MISSING: 0, Status.DRAFT: 1, Status.VALIDATED: 2}
        for rec in self.records(artifact, tier):
            st = self.effective_status(rec)
            if rank[st] > rank[best]:
                best = st
        return best

    def tier_range(self) -> range:
        return range(self.tiers)

    def upsert(self, record: ArtifactRecord) -> None:
        for i, existing in enumerate(self.artifacts):
            if existing.id == record.id and existing.tier == record.tier:
                self.artifacts[i] = record
                return
        self.artifacts.append(record)

    def to_dict(self) -> dict:
        ordered = sorted(self.artifacts, key=lambda r: r.ref.sort_key())
        return {
            "name": self.name,
            "tiers": self.tiers,
            "artifacts": [r.to_dict() for r in ordered],
        }


def expected_refs(tiers: int) -> list[ArtifactRef]:
    """Every artifact a complete project with ``tiers`` tiers should hold."""
    refs = []
    for a in ArtifactId:
        if a.builtin or a == ArtifactId.P:
            continue
        if a.tiered:
            refs.extend(ArtifactRef(a, n) for n in range(tiers))
        else:
            refs.append(ArtifactRef(a))
    return refs


def load_manifest(root: Path) -> ProjectManifest:
    path = root / MANIFEST_NAME
    data = read_json(path)
    expect(isinstance(data, dict), path, "manifest must be a JSON object")
    expect(isinstance(data.get("name"), str), path, "manifest needs a string 'name'")
    tiers = data.get("tiers", 1)
    expect(isinstance(tiers, int) and not isinstance(tiers, bool) and tiers >= 1, path,
           "'tiers' must be a positive integer")
    records = []
    for i, item in enumerate(data.get("artifacts", [])):
        expect(isinstance(item, dict), path, f"artifacts[{i}] must be an object")
        try:
            records.append(ArtifactRecord(
                id=ArtifactId(item["id"]),
                tier=item.get("tier"),
                path=str(item["path"]),
                status=Status(item.get("status", "Draft")),
                checksum=str(item.get("checksum") or ""),
                validated_at=item.get("validated_at"),
            ))
        except (KeyError, ValueError) as exc:
            raise ArtifactParseError(path, f"artifacts[{i}]: {exc}") from exc
    return ProjectManifest(name=data["name"], tiers=tiers, artifacts=records, root=root)


def save_manifest(manifest: ProjectManifest, root: Path | None = None) -> Path:
    root = root or manifest.root
    if root is None:
        raise ValueError("manifest has no root directory")
    path = root / MANIFEST_NAME
    write_text_if_changed(path, dump_json(manifest.to_dict()))
    return path


# readiness


def resolve_input(artifact: ArtifactId, tier: int | None) -> ArtifactRef:
    """Map a stage input to the concrete artifact it denotes at ``tier``.

    P at tier n is the tier n-1 safety requirements; at tier 0 it is the
    SOC, whose safety requirements are the top of the decomposition.
    """
    if tier is None:
        return ArtifactRef(artifact)
    if artifact == ArtifactId.P:
        return ArtifactRef(ArtifactId.L) if tier == 0 else ArtifactRef(ArtifactId.Q, tier - 1)
    if artifact.tiered:
        return ArtifactRef(artifact, tier)
    return ArtifactRef(artifact)


@dataclass(frozen=True)
class ReadinessEntry:
    input: ArtifactId
    resolved: ArtifactRef
    status: str
    builtin: bool

    @property
    def label(self) -> str:
        return str(self.resolved)


@dataclass(frozen=True)
class ReadinessReport:
    stage: int
    tier: int | None
    entries: tuple[ReadinessEntry, ...]

    @property
    def ready(self) -> bool:
        return not self.missing

    @property
    def missing(self) -> frozenset[str]:
        return frozenset(e.label for e in self.entries
                         if not e.builtin and e.status == Status.MISSING.value)


def stage_readiness(project: ProjectManifest, stage: int, tier: int | None = None) -> ReadinessReport:
    spec = get_stage(stage)
    if spec.tiered and tier is None:
        raise TierRequired(stage)
    entries = []
    for inp in sorted(spec.inputs, key=lambda a: a.order):
        if inp.builtin:
            entries.append(ReadinessEntry(inp, ArtifactRef(inp), "Present", True))
            continue
        ref = resolve_input(inp, tier)
        status = project.status_of(ref.id, ref.tier)
        entries.append(ReadinessEntry(inp, ref, status.value, False))
    return ReadinessReport(stage, tier, tuple(entries))


# provenance


def _producers() -> dict[ArtifactId, list[Activity]]:
    out: dict[ArtifactId, list[Activity]] = {}
    for spec in STAGES.values():
        for act in spec.activities:
            for o in act.outputs:
                out.setdefault(o, []).append(act)
    return out


_PRODUCERS = _producers()


def direct_inputs(ref: ArtifactRef) -> set[ArtifactRef]:
    """Artifacts that feed directly into the activities producing ``ref``."""
    tier = ref.tier if ref.id.tiered else None
    deps: set[ArtifactRef] = set()
    for act in _PRODUCERS.get(ref.id, ()):
        for inp in act.inputs:
            if inp == ArtifactId.P and tier is None:
                # any-tier reference: P is the SOC or some requirements tier
                deps.update((ArtifactRef(ArtifactId.L), ArtifactRef(ArtifactId.Q)))
            else:
                deps.add(resolve_input(inp, tier))
    return deps


def upstream_refs(artifact: ArtifactId, tier: int | None = None, *,
                  include_builtin: bool = False) -> frozenset[ArtifactRef]:
    """Transitive upstream closure of one output artifact.

    A node only appears in its own closure when it sits on a dependency
    cycle (tier n requirements and design co-evolve).
    """
    artifact = ArtifactId(artifact)
    if artifact not in ALL_OUTPUTS:
        raise NotAnOutput(artifact)
    start = ArtifactRef(artifact, tier if artifact.tiered else None)
    seen: set[ArtifactRef] = set()
    queue = deque(direct_inputs(start))
    while queue:
        node = queue.popleft()
        if node in seen:
            continue
        seen.add(node)
        queue.extend(direct_inputs(node) - seen)
    if not include_builtin:
        seen = {r for r in seen if not r.id.builtin}
    return frozenset(seen)


def provenance(artifact: ArtifactId, tier: int | None = None, *,
               include_builtin: bool = False) -> frozenset[ArtifactId]:
    return frozenset(r.id for r in upstream_refs(artifact, tier, include_builtin=include_builtin))


# staleness


@dataclass(frozen=True)
class StaleFinding:
    artifact: ArtifactRef
    changed_upstream: tuple[ArtifactRef, ...]

    def __str__(self) -> str:
        ups = ", ".join(str(u) for u in self.changed_upstream)
        return f"{self.artifact} is stale (upstream changed: {ups})"


def _ts(text: str | None) -> datetime | None:
    if not text:
        return None
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        return None


def _changed_since(project: ProjectManifest, up: ArtifactRecord, when: datetime) -> bool:
    if project.root is not None and up.checksum:
        p = project.root / up.path
        if p.is_file() and file_checksum(p) != up.checksum:
            return True
    up_ts = _ts(up.validated_at)
    return up_ts is not None and up_ts > when


def stale_check(project: ProjectManifest) -> list[StaleFinding]:
    """Validated artifacts whose upstream inputs changed after validation."""
    findings = []
    for rec in sorted(project.artifacts, key=lambda r: r.ref.sort_key()):
        when = _ts(rec.validated_at)
        if rec.status != Status.VALIDATED or when is None or rec.id not in ALL_OUTPUTS:
            continue
        ups = upstream_refs(rec.id, rec.tier)
        changed = set()
        for up_ref in ups:
            for up in project.records(up_ref.id, up_ref.tier):
                if up is rec:
                    continue
                if _changed_since(project, up, when):
                    changed.add(up.ref)
        if changed:
            findings.append(StaleFinding(rec.ref, tuple(sorted(changed, key=ArtifactRef.sort_key))))
    return findings


def refresh_record(project: ProjectManifest, record: ArtifactRecord, *,
                   validated_at: str | None = None) -> ArtifactRecord:
    """Record the current checksum; mark Validated when a timestamp is given."""
    assert project.root is not None
    p = project.root / record.path
    if not has_content(p):
        return replace(record, status=Status.MISSING, checksum="", validated_at=None)
    checksum = file_checksum(p)
    if validated_at is not None:
        return replace(record, status=Status.VALIDATED, checksum=checksum, validated_at=validated_at)
    status = Status.DRAFT if record.status == Status.MISSING else record.status
    return replace(record, status=status, checksum=checksum)
