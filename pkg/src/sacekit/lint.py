"""Cross-artifact completeness and traceability checks.

Rule catalog (codes are stable):

====  =======  ==============================================================
E101  Error    hazardous scenario not mitigated by a tier-0 requirement,
               ROD or capability reduction
E102  Error    tier n >= 1 requirement without a Decomposes link to a parent
E103  Error    trace link with empty rationale
E104  Error    hazardous failure without mitigations
E105  Error    DerivedRequirement mitigation naming an unknown requirement
E106  Error    OperatingConceptLimitation mitigation naming an unknown ROD
E107  Error    assurance claim point without a confidence argument
W200  Warning  expected artifact file is missing
W201  Warning  requirement with no test case and no formal property
W202  Warning  ODM leaf feature not exercised by any test case
W203  Warning  operating scenario not exercised by any test case
W204  Warning  no test case tagged ``edge-case``
W205  Warning  leaf requirement without verification results
====  =======  ==============================================================
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .assembly import assemble_full_case
from .project import Project
from .registry import ArtifactId, expected_refs
from .trace import LinkKind, MitigationForm


class LintSeverity(str, enum.Enum):
    ERROR = "Error"
    WARNING = "Warning"


@dataclass(frozen=True, order=True)
class LintFinding:
    code: str
    locus: str
    message: str

    @property
    def severity(self) -> LintSeverity:
        return LintSeverity.ERROR if self.code.startswith("E") else LintSeverity.WARNING

    def __str__(self) -> str:
        return f"{self.code} {self.locus} {self.message}"

    def to_dict(self) -> dict:
        return {"code": self.code, "severity": self.severity.value, "locus": self.locus, "message": self.message}


EDGE_CASE_TAG = "edge-case"


def _mitigation_rules(proj: Project) -> list[LintFinding]:
    out = []
    tier0 = {r.id for r in proj.requirements.get(0, [])}
    rods = {r.id for r in proj.rods or ()}
    caps = set(proj.capabilities or ())
    reductions = {c for r in proj.rods or () for c in r.capability_reductions}
    covered = set()
    for link in proj.links:
        if link.kind != LinkKind.MITIGATES or link.target.kind != "scenario":
            continue
        src = link.source
        ok = (
            (src.kind == "requirement" and src.id in tier0)
            or (src.kind == "rod" and src.id in rods)
            or (src.kind == "capability" and src.id in caps and src.id in reductions)
        )
        if ok:
            covered.add(link.target.id)
    for s in proj.hazardous or ():
        if s.id not in covered:
            out.append(LintFinding("E101", s.id, "hazardous scenario has no mitigation from the safe operating concept"))
    return out


def _decomposition_rules(proj: Project) -> list[LintFinding]:
    out = []
    parented = set()
    for link in proj.links:
        if link.kind == LinkKind.DECOMPOSES and link.source.kind == "requirement" and link.target.kind == "requirement":
            t = link.source.tier
            if t is not None and any(r.id == link.target.id for r in proj.requirements.get(t - 1, [])):
                parented.add((link.source.id, t))
    for r in proj.all_requirements():
        if r.tier >= 1 and (r.id, r.tier) not in parented:
            out.append(LintFinding("E102", f"{r.id}@{r.tier}", "no Decomposes link to a tier "
                                   f"{r.tier - 1} requirement"))
    return out


def _rationale_rule(proj: Project) -> list[LintFinding]:
    return [LintFinding("E103", link.locus, f"{link.kind.value} link has no rationale")
            for link in proj.links if not link.rationale.strip()]


def _failure_rules(proj: Project) -> list[LintFinding]:
    out = []
    rods = {r.id for r in proj.rods or ()}
    for tier in sorted(proj.failures):
        reqs = {r.id for r in proj.requirements.get(tier, [])}
        for f in proj.failures[tier]:
            locus = f"{f.id}@{tier}"
            if f.hazardous and not f.mitigations:
                out.append(LintFinding("E104", locus, f"hazardous failure ({f.guideword.value}: {f.deviation}) "
                                       "has no mitigation"))
            for m in f.mitigations:
                if m.form == MitigationForm.DERIVED_REQUIREMENT and m.target not in reqs:
                    out.append(LintFinding("E105", locus, f"derived requirement {m.target!r} is not "
                                           f"in the tier {tier} requirements"))
                if m.form == MitigationForm.OPERATING_CONCEPT_LIMITATION and m.target not in rods:
                    out.append(LintFinding("E106", locus, f"operating concept limitation {m.target!r} "
                                           "is not a defined ROD"))
    return out


def _acp_rule(proj: Project) -> list[LintFinding]:
    case = assemble_full_case(proj, strict=False)
    return [LintFinding("E107", acp, "assurance claim point has no confidence argument")
            for acp in case.open_acps]


def _artifact_rule(proj: Project) -> list[LintFinding]:
    out = []
    for ref in expected_refs(proj.manifest.tiers):
        if not proj.present(ref.id, ref.tier):
            out.append(LintFinding("W200", str(ref), f"{ref.id.title} not found at {proj.rel(ref.id, ref.tier)}"))
    return out


def _verification_rules(proj: Project) -> list[LintFinding]:
    if proj.test_cases is None:
        return []
    out = []
    tested = {rid for tc in proj.test_cases for rid in tc.requirements}
    proven = {rid for fp in proj.formal_properties for rid in fp.requirements}
    for r in proj.all_requirements():
        if r.id not in tested and r.id not in proven:
            out.append(LintFinding("W201", f"{r.id}@{r.tier}", "no test case or formal property"))
    if proj.odm is not None:
        used = {p for tc in proj.test_cases for p in tc.odm_features}
        for path in proj.odm.leaf_paths():
            if path not in used:
                out.append(LintFinding("W202", path, "ODM feature not exercised by any test case"))
    if proj.scenarios is not None:
        used = {s for tc in proj.test_cases for s in tc.scenarios}
        for sid in proj.scenarios:
            if sid not in used:
                out.append(LintFinding("W203", sid, "operating scenario not exercised by any test case"))
    if not any(EDGE_CASE_TAG in tc.tags for tc in proj.test_cases):
        out.append(LintFinding("W204", proj.rel(ArtifactId.SS), "no test case is tagged edge-case"))
    if proj.results is not None:
        with_results = {r.requirement for r in proj.results}
        parents = {p for r in proj.all_requirements() for p in r.parent_ids}
        for r in proj.all_requirements():
            if r.id not in parents and r.id not in with_results:
                out.append(LintFinding("W205", f"{r.id}@{r.tier}", "leaf requirement has no verification results"))
    return out


def lint(proj: Project) -> list[LintFinding]:
    findings = (
        _mitigation_rules(proj)
        + _decomposition_rules(proj)
        + _rationale_rule(proj)
        + _failure_rules(proj)
        + _acp_rule(proj)
        + _artifact_rule(proj)
        + _verification_rules(proj)
    )
    return sorted(set(findings))


def has_errors(findings: list[LintFinding]) -> bool:
    return any(f.severity == LintSeverity.ERROR for f in findings)


# trace matrix


@dataclass(frozen=True)
class TraceRow:
    requirement: str
    tier: int
    parents: tuple[str, ...]
    children: tuple[str, ...]
    evidence: tuple[str, ...]
    scenarios: tuple[str, ...]


def trace_matrix(proj: Project) -> list[TraceRow]:
    """One row per requirement, derived from the project's trace links."""
    parents: dict[tuple[str, int], set[str]] = {}
    children: dict[tuple[str, int], set[str]] = {}
    evidence: dict[str, set[str]] = {}
    scenarios: dict[str, set[str]] = {}
    for link in proj.links:
        s, t = link.source, link.target
        if link.kind == LinkKind.DECOMPOSES and s.kind == t.kind == "requirement" and s.tier is not None:
            parents.setdefault((s.id, s.tier), set()).add(t.id)
            children.setdefault((t.id, s.tier - 1), set()).add(s.id)
        elif link.kind == LinkKind.EVIDENCES and t.kind == "requirement":
            evidence.setdefault(t.id, set()).add(s.id)
        elif link.kind == LinkKind.MITIGATES and s.kind == "requirement" and t.kind == "scenario":
            scenarios.setdefault(s.id, set()).add(t.id)
    return [
        TraceRow(r.id, r.tier,
                 tuple(sorted(parents.get((r.id, r.tier), ()))),
                 tuple(sorted(children.get((r.id, r.tier), ()))),
                 tuple(sorted(evidence.get(r.id, ()))),
                 tuple(sorted(scenarios.get(r.id, ()))))
        for r in proj.all_requirements()
    ]


def render_trace_matrix(rows: list[TraceRow]) -> str:
    header = ["Requirement", "Tier", "Parents", "Children", "Evidence", "Scenarios mitigated"]
    body = [[r.requirement, str(r.tier), ", ".join(r.parents) or "-", ", ".join(r.children) or "-",
             ", ".join(r.evidence) or "-", ", ".join(r.scenarios) or "-"] for r in rows]
    widths = [max(len(x) for x in col) for col in zip(header, *body)]

    def line(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

    return "\n".join([line(header), line(["-" * w for w in widths])] + [line(b) for b in body]) + "\n"
