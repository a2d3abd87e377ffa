"""Assemble the complete assurance argument for a project.

The baseline argument is developed by the tier decomposition at G4 and
every assurance claim point receives the sub-argument built from the
matching pattern.  A sub-argument is only attached when its binding
document (for example ``arguments/T-tier-1.json``) exists; its scalars
override values derived from the project data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .errors import MissingSubArgument, NotWellFormed, SaceError
from .gsn import GsnGraph, attach_confidence, check_wellformed, merge_under
from .instantiation import (
    SOC_ROOT,
    Binding,
    InstantiatedArgument,
    TierRequirement,
    TierSpec,
    instantiate,
    instantiate_decomposition,
    with_suffix,
)
from .patterns import PatternId
from .project import Project, evidence_status
from .registry import ArtifactId, Status
from .trace import LinkKind, MitigationForm

AI = ArtifactId


@dataclass(frozen=True)
class EvidenceRef:
    ref: str
    path: str
    checksum: str
    status: Status


@dataclass
class AssembledCase:
    graph: GsnGraph
    attached: dict[str, str] = field(default_factory=dict)
    skipped: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def open_acps(self) -> list[str]:
        return self.graph.unsatisfied_acps()

    @property
    def pattern_kinds(self) -> set[str]:
        return set(self.attached.values())


def _ev(proj: Project, a: ArtifactId, tier: int | None = None) -> EvidenceRef:
    rec = proj.manifest.record(a, tier)
    ref = a.value if tier is None else f"{a.value}@{tier}"
    return EvidenceRef(ref, proj.rel(a, tier), rec.checksum if rec else "", evidence_status(proj, a, tier))


def _make(proj: Project, pid: PatternId, key: str, scalars: dict[str, Any], *,
          collections: dict[str, list] | None = None, choices: dict[str, list[str]] | None = None,
          evidence: dict[str, EvidenceRef] | None = None) -> Binding:
    doc = proj.bindings.get(key, {})
    merged = {**scalars, **doc.get("scalars", {})}
    return Binding(pid, merged, collections or {}, choices or {}, evidence or {})


def _mitigators(proj: Project) -> dict[str, set[str]]:
    """Scenario id -> endpoint kinds with a Mitigates link to it."""
    out: dict[str, set[str]] = {}
    for link in proj.links:
        if link.kind == LinkKind.MITIGATES and link.target.kind == "scenario":
            out.setdefault(link.target.id, set()).add(link.source.kind)
    return out


def _evidenced(proj: Project) -> dict[str, list[str]]:
    """Requirement id -> verification routes ("G8.2" testing, "G8.6" formal)."""
    out: dict[str, list[str]] = {}
    for tc in proj.test_cases or ():
        for rid in tc.requirements:
            out.setdefault(rid, [])
            if "G8.2" not in out[rid]:
                out[rid].append("G8.2")
    for fp in proj.formal_properties:
        for rid in fp.requirements:
            out.setdefault(rid, [])
            if "G8.6" not in out[rid]:
                out[rid].append("G8.6")
    return out


def bindings_for(proj: Project) -> dict[str, Binding]:
    """Bindings for every sub-argument, keyed like ``T@1`` or ``UU#2@1``."""
    sysname = proj.name
    out: dict[str, Binding] = {}

    leaves = proj.odm.leaf_paths() if proj.odm else []
    out["H"] = _make(proj, PatternId.G, "H", {
        "System": sysname, "B": proj.rel(AI.B), "D": proj.rel(AI.D), "E": proj.rel(AI.E),
        "C": proj.rel(AI.C), "F": proj.rel(AI.F),
    }, collections={"OdmFeature": leaves},
        evidence={"Sn1.1": _ev(proj, AI.C), "Sn1.3": _ev(proj, AI.C), "Sn1.2": _ev(proj, AI.F)})

    out["J"] = _make(proj, PatternId.I, "J", {
        "System": sysname, "E": proj.rel(AI.E), "B": proj.rel(AI.B),
        "WW": proj.rel(AI.WW), "YY": proj.rel(AI.YY),
    }, evidence={"Sn2.1": _ev(proj, AI.WW), "Sn2.2": _ev(proj, AI.WW), "Sn2.3": _ev(proj, AI.YY)})

    scen = [s.id for s in proj.hazardous or ()]
    mit = _mitigators(proj)
    choices = {}
    for k, sid in enumerate(scen, 1):
        pick = []
        if "rod" in mit.get(sid, ()):
            pick.append("G3.5")
        if "capability" in mit.get(sid, ()):
            pick.append("G3.6")
        if pick:
            choices[f"G3.4#{k}"] = pick
    m = _ev(proj, AI.M)
    out["O"] = _make(proj, PatternId.N, "O", {
        "XX": proj.rel(AI.XX), "L": proj.rel(AI.L), "M": proj.rel(AI.M),
    }, collections={"HazardousScenario": scen}, choices=choices,
        evidence={"Sn3.1": m, "Sn3.2": m, "Sn3.3": m})

    out["QQ"] = _make(proj, PatternId.PP, "QQ", {
        "System": sysname, "B": proj.rel(AI.B), "HH": proj.rel(AI.HH),
        "BoundaryJustification": proj.boundary_justification or "Boundary interpretation justified in HH",
        "II": proj.rel(AI.II), "GG": proj.rel(AI.GG), "NN": proj.rel(AI.NN),
        "OO": proj.rel(AI.OO), "KK": proj.rel(AI.KK),
    }, evidence={"Sn7.1": _ev(proj, AI.II), "Sn7.2": _ev(proj, AI.GG), "Sn7.3": _ev(proj, AI.NN),
                 "Sn7.4": _ev(proj, AI.OO), "Sn7.5": _ev(proj, AI.KK), "Sn7.6": _ev(proj, AI.KK)})

    routes = _evidenced(proj)
    for n in proj.manifest.tier_range():
        reqs = proj.requirements.get(n, [])
        parents: dict[str, list[str]] = {}
        for r in reqs:
            for p in (r.parent_ids if n else (SOC_ROOT,)):
                parents.setdefault(p, []).append(r.id)
        out[f"T@{n}"] = _make(proj, PatternId.S, f"T@{n}", {
            "Tier": n, "TierRequirementMap": {p: ", ".join(ids) for p, ids in parents.items()},
            "W": proj.rel(AI.W, n), "R": proj.rel(AI.R, n),
        }, collections={"ParentRequirement": sorted(parents)}, evidence={"Sn4.1": _ev(proj, AI.R, n)})

        decisions = proj.design_decisions.get(n, [])
        scalars: dict[str, Any] = {
            "Tier": n, "V": proj.rel(AI.V, n), "Y": proj.rel(AI.Y, n),
            "X": proj.rel(AI.X, n), "Z": proj.rel(AI.Z, n),
        }
        for role, attr in (("Robustness", "robustness"), ("FaultTolerance", "fault_tolerance"),
                           ("RuntimeMonitoring", "runtime_monitoring")):
            vals = {d.id: getattr(d, attr) for d in decisions if getattr(d, attr)}
            if vals:
                scalars[role] = vals
        y = _ev(proj, AI.Y, n)
        out[f"AA@{n}"] = _make(proj, PatternId.U, f"AA@{n}", scalars,
                               collections={"DesignDecision": [d.id for d in decisions]},
                               evidence={"Sn5.1": y, "Sn5.6": y, "Sn5.7": y, "Sn5.8": y,
                                         "Sn5.2": _ev(proj, AI.X, n), "Sn5.3": _ev(proj, AI.Z, n)})

        failures = [f for f in proj.failures.get(n, []) if f.hazardous]
        route = {
            MitigationForm.DERIVED_REQUIREMENT: "Sn6.3",
            MitigationForm.DESIGN_CHANGE: "Sn6.2",
            MitigationForm.EXISTING_DESIGN_SUFFICIENT: "Sn6.2",
            MitigationForm.OPERATING_CONCEPT_LIMITATION: "Sn6.5",
        }
        fchoices = {}
        for k, f in enumerate(failures, 1):
            fchoices[f"G6.4#{k}"] = sorted({route[mi.form] for mi in f.mitigations})
        out[f"EE@{n}"] = _make(proj, PatternId.DD, f"EE@{n}", {
            "Tier": n, "BB": proj.rel(AI.BB, n), "Q": proj.rel(AI.Q, n),
            "Y": proj.rel(AI.Y, n), "L": proj.rel(AI.L),
        }, collections={"HazardousFailure": [f.id for f in failures]}, choices=fchoices,
            evidence={"Sn6.1": _ev(proj, AI.BB, n), "Sn6.3": _ev(proj, AI.Q, n), "Sn6.2": y,
                      "Sn6.4": y, "Sn6.5": _ev(proj, AI.L)})

        for k, r in enumerate(reqs, 1):
            if r.id not in routes:
                continue
            out[f"UU#{k}@{n}"] = _make(proj, PatternId.UU, "VV", {
                "Tier": n, "RR": proj.rel(AI.RR), "SS": proj.rel(AI.SS), "TT": proj.rel(AI.TT),
                "StrategyJustification": proj.strategy_justification or "Verification strategy justified in RR",
            }, collections={"Requirement": [r.id]}, choices={"S8.1": routes[r.id]},
                evidence={"Sn8.1": _ev(proj, AI.TT), "Sn8.4": _ev(proj, AI.TT), "Sn8.2": _ev(proj, AI.SS),
                          "Sn8.3": _ev(proj, AI.SS), "Sn8.5": _ev(proj, AI.SS), "Sn8.6": _ev(proj, AI.SS)})
    return out


def tier_specs(proj: Project) -> list[TierSpec]:
    routes = _evidenced(proj)
    specs = []
    for n in proj.manifest.tier_range():
        reqs = proj.requirements.get(n, [])
        specs.append(TierSpec(
            n,
            [TierRequirement(r.id, r.parent_ids, r.text) for r in reqs],
            {r.id for r in reqs if r.id in routes},
            proj.rel(AI.Q, n),
            proj.rel(AI.W, n),
        ))
    return specs


_SITES = [
    # binding key, pattern kind, ACP label
    ("H", "G", "ACP-context"),
    ("J", "I", "ACP-hazards"),
    ("O", "N", "ACP-soc"),
    ("QQ", "PP", "ACP-outside"),
]


def assemble_full_case(proj: Project, *, strict: bool = True) -> AssembledCase:
    """Build the whole argument.

    With ``strict`` a missing binding document raises ``MissingSubArgument``
    and binding problems raise; otherwise the affected claim points stay
    open and the problems are returned as warnings.
    """
    base = instantiate(PatternId.BASELINE, Binding(PatternId.BASELINE, {
        "System": proj.name,
        "OperatingContext": proj.rel(AI.B),
        "HazardousScenarios": proj.rel(AI.XX),
    }, evidence={}), strict=strict)
    case = AssembledCase(base.graph, warnings=list(base.warnings))

    specs = tier_specs(proj)
    if not strict:
        # a partial project: argue only over the tiers written so far
        n = next((k for k, s in enumerate(specs) if not s.requirements), len(specs))
        specs = specs[:n]
    if any(s.requirements for s in specs):
        try:
            decomp = instantiate_decomposition(proj.name, specs, strict=strict)
        except SaceError as exc:
            if strict:
                raise
            decomp = None
            case.skipped.append(f"G4: {type(exc).__name__}: {exc}")
        if decomp is not None:
            case.graph = merge_under(case.graph, "G4", decomp.graph)
            case.warnings += decomp.warnings
    else:
        case.skipped.append("G4: no safety requirements")

    bindings = bindings_for(proj)

    def attach(key: str, doc_key: str, kind: str, acp: str, suffix: str = "") -> None:
        if acp not in case.graph.acp_edges():
            return
        if doc_key not in proj.bindings:
            if strict:
                raise MissingSubArgument(kind, f"no binding document for {doc_key}")
            case.skipped.append(f"{acp}: no binding document for {doc_key}")
            return
        try:
            arg: InstantiatedArgument = instantiate(bindings[key].pattern, bindings[key], strict=strict)
        except NotWellFormed:
            raise
        except Exception as exc:
            if strict:
                raise
            case.skipped.append(f"{acp}: {type(exc).__name__}: {exc}")
            return
        if suffix:
            arg = with_suffix(arg, suffix)
        case.graph = attach_confidence(case.graph, acp, arg.graph)
        case.attached[acp] = kind
        case.warnings += arg.warnings

    for key, kind, acp in _SITES:
        attach(key, key, kind, acp)
    for n in proj.manifest.tier_range():
        attach(f"T@{n}", f"T@{n}", "S", f"ACP-requirements@{n}", f"@{n}")
        attach(f"AA@{n}", f"AA@{n}", "U", f"ACP-design@{n}", f"@{n}")
        attach(f"EE@{n}", f"EE@{n}", "DD", f"ACP-failures@{n}", f"@{n}")
        for k in range(1, len(proj.requirements.get(n, [])) + 1):
            acp = f"ACP-verification#{k}@{n}"
            if f"UU#{k}@{n}" in bindings:
                attach(f"UU#{k}@{n}", "VV", "UU", acp, f"#{k}@{n}")
            elif acp in case.graph.acp_edges():
                case.skipped.append(f"{acp}: requirement has no verification evidence")

    problems = check_wellformed(case.graph)
    if problems:
        raise NotWellFormed(problems)
    return case
