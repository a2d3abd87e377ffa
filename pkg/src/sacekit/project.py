"""Read-only snapshot of a SACE project directory.

Besides the registered artifacts a project holds a few source files that
are not artifacts in their own right:

``decisions.json``   decision points and classification rules
``rod.json``         reduced operating domain constraints
``trace.json``       explicit trace links with rationale
``dictionary.json``  domain vocabulary for requirement term checks

Missing files are tolerated; unparseable ones raise ``ArtifactParseError``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .common import expect, has_content, read_json
from .errors import ArtifactParseError, SaceError
from .hazards import DecisionModel, HazardousScenario, load_decisions, scenarios_from_document
from .odm import (
    AssessmentMatrix,
    BoundaryRecognizerSpec,
    OdmModel,
    RodConstraint,
    TransitionModel,
    assessment_matrix_from_dict,
    load_odm,
    load_rods,
    recognizer_from_dict,
    transition_model_from_dict,
)
from .registry import MANIFEST_NAME, ArtifactId, ProjectManifest, Status, load_manifest
from .reqlang import Ontology
from .trace import (
    Endpoint,
    HazardousFailureRecord,
    LinkKind,
    TraceLink,
    failure_from_dict,
    link_from_dict,
)

DECISIONS_FILE = "decisions.json"
ROD_FILE = "rod.json"
TRACE_FILE = "trace.json"
DICTIONARY_FILE = "dictionary.json"
OUT_DIR = "out"

AI = ArtifactId


@dataclass(frozen=True)
class SafetyRequirement:
    id: str
    tier: int
    text: str
    parents: tuple[tuple[str, str], ...] = ()
    rationale: str = ""

    @property
    def parent_ids(self) -> tuple[str, ...]:
        return tuple(p for p, _ in self.parents)


@dataclass(frozen=True)
class TestCase:
    id: str
    requirements: tuple[str, ...] = ()
    odm_features: tuple[str, ...] = ()
    scenarios: tuple[str, ...] = ()
    tags: tuple[str, ...] = ()
    rationale: str = ""


@dataclass(frozen=True)
class FormalProperty:
    id: str
    requirements: tuple[str, ...] = ()
    rationale: str = ""


@dataclass(frozen=True)
class TestResult:
    test: str
    requirement: str
    verdict: str


@dataclass(frozen=True)
class DesignDecisionRecord:
    id: str
    text: str
    robustness: str = ""
    fault_tolerance: str = ""
    runtime_monitoring: str = ""


@dataclass
class Project:
    root: Path
    manifest: ProjectManifest
    odm: OdmModel | None = None
    capabilities: tuple[str, ...] | None = None
    scenarios: dict[str, str] | None = None
    decisions: list[DecisionModel] | None = None
    hazardous: list[HazardousScenario] | None = None
    requirements: dict[int, list[SafetyRequirement]] = field(default_factory=dict)
    rods: list[RodConstraint] | None = None
    failures: dict[int, list[HazardousFailureRecord]] = field(default_factory=dict)
    explicit_links: list[TraceLink] = field(default_factory=list)
    test_cases: list[TestCase] | None = None
    formal_properties: list[FormalProperty] = field(default_factory=list)
    results: list[TestResult] | None = None
    design_decisions: dict[int, list[DesignDecisionRecord]] = field(default_factory=dict)
    recognizers: list[BoundaryRecognizerSpec] = field(default_factory=list)
    boundary_justification: str = ""
    assessment: AssessmentMatrix | None = None
    transition_model: TransitionModel | None = None
    ontology: Ontology | None = None
    strategy_justification: str = ""
    bindings: dict[str, dict] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.manifest.name

    def rel(self, artifact: ArtifactId, tier: int | None = None) -> str:
        p = self.manifest.path_of(artifact, tier)
        return p.relative_to(self.root).as_posix() if p else ""

    def present(self, artifact: ArtifactId, tier: int | None = None) -> bool:
        p = self.manifest.path_of(artifact, tier)
        return has_content(p)

    def all_requirements(self) -> list[SafetyRequirement]:
        return [r for t in sorted(self.requirements) for r in self.requirements[t]]

    def requirement_tier(self, rid: str) -> int | None:
        for r in self.all_requirements():
            if r.id == rid:
                return r.tier
        return None

    def derived_links(self) -> list[TraceLink]:
        out = []
        for r in self.all_requirements():
            if r.tier == 0:
                continue
            origin = self.rel(AI.Q, r.tier)
            for pid, why in r.parents:
                out.append(TraceLink(Endpoint("requirement", r.id, r.tier),
                                     Endpoint("requirement", pid, r.tier - 1),
                                     LinkKind.DECOMPOSES, why, origin))
        origin = self.rel(AI.SS)
        for tc in self.test_cases or ():
            for rid in tc.requirements:
                out.append(TraceLink(Endpoint("test", tc.id), Endpoint("requirement", rid, self.requirement_tier(rid)),
                                     LinkKind.EVIDENCES, tc.rationale, origin))
        for fp in self.formal_properties:
            for rid in fp.requirements:
                out.append(TraceLink(Endpoint("property", fp.id), Endpoint("requirement", rid, self.requirement_tier(rid)),
                                     LinkKind.EVIDENCES, fp.rationale, origin))
        return out

    @property
    def links(self) -> list[TraceLink]:
        return list(self.explicit_links) + self.derived_links()


def project_root(explicit: str | Path | None = None) -> Path:
    if explicit is not None:
        return Path(explicit)
    env = os.environ.get("SACE_PROJECT")
    return Path(env) if env else Path.cwd()


def _load(path: Path | None) -> Any:
    if not has_content(path):
        return None
    return read_json(path)


def _items(data: Any, key: str, path: Path) -> list:
    expect(isinstance(data, Mapping) and isinstance(data.get(key, []), list), path,
           f"expected an object with a '{key}' list")
    return list(data.get(key, []))


def _strs(value: Any) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        return (value,)
    return tuple(str(v) for v in value)


def _parents(raw: Any) -> tuple[tuple[str, str], ...]:
    out = []
    for p in raw or ():
        if isinstance(p, Mapping):
            out.append((str(p["id"]), str(p.get("rationale") or "")))
        else:
            out.append((str(p), ""))
    return tuple(out)


def load_requirements(path: Path, tier: int) -> list[SafetyRequirement]:
    data = read_json(path)
    out = []
    try:
        for r in _items(data, "requirements", path):
            out.append(SafetyRequirement(str(r["id"]), tier, str(r["text"]), _parents(r.get("parents")),
                                         str(r.get("rationale", ""))))
    except (KeyError, TypeError) as exc:
        raise ArtifactParseError(path, f"bad requirement: {exc}") from exc
    return out


def load_project(root: str | Path | None = None) -> Project:
    root = project_root(root)
    manifest = load_manifest(root)
    proj = Project(root=root, manifest=manifest)
    path = manifest.path_of

    def guarded(p: Path, fn):
        try:
            return fn()
        except ArtifactParseError:
            raise
        except (KeyError, TypeError, ValueError, SaceError) as exc:
            raise ArtifactParseError(p, str(exc)) from exc

    p = path(AI.B)
    if has_content(p):
        proj.odm = load_odm(p)
    p = path(AI.D)
    data = _load(p)
    if data is not None:
        proj.capabilities = guarded(p, lambda: tuple(str(c["id"]) for c in _items(data, "capabilities", p)))
    p = path(AI.E)
    data = _load(p)
    if data is not None:
        proj.scenarios = guarded(p, lambda: {str(s["id"]): str(s.get("summary", "")) for s in _items(data, "scenarios", p)})
    p = root / DECISIONS_FILE
    if has_content(p):
        proj.decisions = load_decisions(p, proj.scenarios)
    p = path(AI.XX)
    data = _load(p)
    if data is not None:
        proj.hazardous = guarded(p, lambda: scenarios_from_document(data))

    for n in manifest.tier_range():
        p = path(AI.Q, n)
        if has_content(p):
            proj.requirements[n] = load_requirements(p, n)
        p = path(AI.BB, n)
        data = _load(p)
        if data is not None:
            proj.failures[n] = guarded(p, lambda: [failure_from_dict(f, n) for f in _items(data, "failures", p)])
        p = path(AI.W, n)
        data = _load(p)
        if data is not None:
            proj.design_decisions[n] = guarded(p, lambda: [
                DesignDecisionRecord(str(d["id"]), str(d.get("text", "")), str(d.get("robustness", "")),
                                     str(d.get("fault_tolerance", "")), str(d.get("runtime_monitoring", "")))
                for d in _items(data, "decisions", p)])

    p = root / ROD_FILE
    if has_content(p):
        proj.rods = load_rods(p)
    p = root / TRACE_FILE
    data = _load(p)
    if data is not None:
        proj.explicit_links = guarded(p, lambda: [link_from_dict(x, TRACE_FILE) for x in _items(data, "links", p)])
    p = root / DICTIONARY_FILE
    data = _load(p)
    if data is not None:
        proj.ontology = guarded(p, lambda: Ontology.of(_strs(data.get("terms"))))

    p = path(AI.SS)
    data = _load(p)
    if data is not None:
        proj.test_cases = guarded(p, lambda: [
            TestCase(str(t["id"]), _strs(t.get("requirements")), _strs(t.get("odm_features")),
                     _strs(t.get("scenarios")), _strs(t.get("tags")), str(t.get("rationale", "")))
            for t in _items(data, "test_cases", p)])
        proj.formal_properties = guarded(p, lambda: [
            FormalProperty(str(f["id"]), _strs(f.get("requirements")), str(f.get("rationale", "")))
            for f in _items(data, "formal_properties", p)])
    p = path(AI.TT)
    data = _load(p)
    if data is not None:
        proj.results = guarded(p, lambda: [
            TestResult(str(r["test"]), str(r["requirement"]), str(r.get("verdict", "")))
            for r in _items(data, "results", p)])
    p = path(AI.RR)
    data = _load(p)
    if data is not None:
        proj.strategy_justification = guarded(p, lambda: str(data.get("justification", "")))
    p = path(AI.HH)
    data = _load(p)
    if data is not None:
        proj.recognizers = guarded(p, lambda: [recognizer_from_dict(r) for r in _items(data, "recognizers", p)])
        proj.boundary_justification = str(data.get("justification", ""))
    p = path(AI.II)
    data = _load(p)
    if data is not None:
        proj.assessment = guarded(p, lambda: assessment_matrix_from_dict(data))
    p = path(AI.JJ)
    data = _load(p)
    if data is not None:
        proj.transition_model = guarded(p, lambda: transition_model_from_dict(data))

    for a in (AI.H, AI.J, AI.O, AI.QQ, AI.VV):
        _binding(proj, a, None)
    for n in manifest.tier_range():
        for a in (AI.T, AI.AA, AI.EE):
            _binding(proj, a, n)
    return proj


def _binding(proj: Project, artifact: ArtifactId, tier: int | None) -> None:
    p = proj.manifest.path_of(artifact, tier)
    data = _load(p)
    if data is None:
        return
    expect(isinstance(data, Mapping) and isinstance(data.get("scalars", {}), Mapping), p,
           "binding document must be an object with optional 'scalars'")
    key = artifact.value if tier is None else f"{artifact.value}@{tier}"
    proj.bindings[key] = dict(data)


def evidence_status(proj: Project, artifact: ArtifactId, tier: int | None = None) -> Status:
    return proj.manifest.status_of(artifact, tier) if proj.manifest.records(artifact, tier) else (
        Status.DRAFT if proj.present(artifact, tier) else Status.MISSING)


def is_manifest_dir(root: Path) -> bool:
    return (root / MANIFEST_NAME).is_file()
