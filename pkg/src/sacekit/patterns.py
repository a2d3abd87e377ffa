"""Built-in argument patterns.

Node identifiers follow the published figure labels.  Statement wording is
reconstructed from the accompanying descriptions, so every node carries
``reconstructed: True`` in its metadata.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

from .gsn import (
    PLACEHOLDER,
    Choice,
    EdgeKind,
    Flag,
    GsnEdge,
    GsnNode,
    GsnPattern,
    Multiplicity,
    NodeKind,
    Role,
)
from .registry import ArtifactId


class PatternId(str, enum.Enum):
    BASELINE = "Baseline"
    DECOMPOSITION = "Decomposition"
    G = "G-OperatingContext"
    I = "I-HazardousScenarios"  # noqa: E741
    N = "N-SOC"
    S = "S-SafetyRequirements"
    U = "U-DesignAssurance"
    DD = "DD-HazardousFailures"
    PP = "PP-OutOfContext"
    UU = "UU-Verification"

    @property
    def artifact(self) -> ArtifactId | None:
        """The built-in pattern artifact, if this pattern is one of the staged ones."""
        head = self.value.split("-")[0]
        return ArtifactId(head) if self not in (PatternId.BASELINE, PatternId.DECOMPOSITION) else None

    @property
    def instance_artifact(self) -> ArtifactId | None:
        return _INSTANCE_OF.get(self)

    @property
    def tiered(self) -> bool:
        return self in (PatternId.S, PatternId.U, PatternId.DD, PatternId.UU, PatternId.DECOMPOSITION)

    @classmethod
    def parse(cls, text: str) -> "PatternId":
        key = text.strip().lower()
        for p in cls:
            if key in (p.value.lower(), p.name.lower(), p.value.split("-")[0].lower()):
                return p
        raise ValueError(f"unknown pattern {text!r}")

    def __str__(self) -> str:
        return self.value


_INSTANCE_OF = {
    PatternId.G: ArtifactId.H,
    PatternId.I: ArtifactId.J,
    PatternId.N: ArtifactId.O,
    PatternId.S: ArtifactId.T,
    PatternId.U: ArtifactId.AA,
    PatternId.DD: ArtifactId.EE,
    PatternId.PP: ArtifactId.QQ,
    PatternId.UU: ArtifactId.VV,
}


@dataclass(frozen=True)
class RoleSpec:
    name: str
    binding_type: str
    collection: bool

    def __str__(self) -> str:
        return f"{self.name}:{self.binding_type}"


class _Builder:
    def __init__(self, pid: PatternId, root: str):
        self.pid = pid
        self.root = root
        self.nodes: list[GsnNode] = []
        self.edges: list[GsnEdge] = []
        self.roles: list[Role] = []
        self.mults: list[Multiplicity] = []
        self.choices: list[Choice] = []

    def role(self, name: str, binding_type: str, optional: bool = False) -> "_Builder":
        self.roles.append(Role(name, binding_type, optional))
        return self

    def _node(self, nid: str, kind: NodeKind, statement: str, *, artifact: str | None = None,
              optional: bool = False, undeveloped: bool = False, **meta) -> str:
        flags = set()
        if PLACEHOLDER.search(statement):
            flags.add(Flag.UNINSTANTIATED)
        if optional:
            flags.add(Flag.OPTIONAL)
        if undeveloped:
            flags.add(Flag.UNDEVELOPED)
        metadata = {"reconstructed": True, **meta}
        self.nodes.append(GsnNode(nid, kind, statement, frozenset(flags), artifact, metadata))
        return nid

    def goal(self, nid: str, statement: str, **kw) -> str:
        return self._node(nid, NodeKind.GOAL, statement, **kw)

    def strategy(self, nid: str, statement: str, **kw) -> str:
        return self._node(nid, NodeKind.STRATEGY, statement, **kw)

    def solution(self, nid: str, artifact: ArtifactId, statement: str | None = None) -> str:
        text = statement or f"{artifact.title} {{{artifact.value}}}"
        return self._node(nid, NodeKind.SOLUTION, text, artifact=artifact.value)

    def context(self, nid: str, statement: str, artifact: ArtifactId | None = None) -> str:
        return self._node(nid, NodeKind.CONTEXT, statement, artifact=artifact.value if artifact else None)

    def justification(self, nid: str, statement: str) -> str:
        return self._node(nid, NodeKind.JUSTIFICATION, statement)

    def sup(self, src: str, *targets: str, acp: str | None = None, role: str | None = None) -> None:
        for t in targets:
            self.edges.append(GsnEdge(src, t, EdgeKind.SUPPORTED_BY, acp))
            if role:
                self.mults.append(Multiplicity(src, t, role))

    def ctx(self, src: str, *targets: str, acp: str | None = None) -> None:
        for t in targets:
            self.edges.append(GsnEdge(src, t, EdgeKind.IN_CONTEXT_OF, acp))

    def choice(self, node: str, options: tuple[str, ...], lo: int, hi: int) -> None:
        self.choices.append(Choice(node, options, lo, hi))

    def build(self) -> GsnPattern:
        return GsnPattern(
            nodes=tuple(self.nodes),
            edges=tuple(self.edges),
            root=self.root,
            pattern_id=self.pid.value,
            roles=tuple(self.roles),
            multiplicities=tuple(self.mults),
            choices=tuple(self.choices),
            metadata={"reconstructed": True},
        )


_AI = ArtifactId


def _baseline() -> GsnPattern:
    b = _Builder(PatternId.BASELINE, "G0")
    b.role("System", "text").role("OperatingContext", "artifact").role("HazardousScenarios", "artifact")
    b.goal("G0", "{System} is sufficiently safe to operate")
    b.strategy("S1", "Argument over operation within and outside the defined operating context")
    b.context("C1", "Defined operating context: {OperatingContext}")
    b.goal("G1", "{System} is sufficiently safe when operating within the defined operating context")
    b.goal("G3", "All hazardous scenarios identified for {System} are sufficiently mitigated")
    b.context("C2", "Identified hazardous scenarios: {HazardousScenarios}", _AI.XX)
    b.goal("G4", "{System} operates such that the defined Safe Operating Concept is satisfied",
           undeveloped=True)
    b.goal("G7", "{System} remains sufficiently safe when operating outside the defined operating context",
           undeveloped=True)
    b.sup("G0", "S1")
    b.ctx("S1", "C1", acp="ACP-context")
    b.sup("S1", "G1")
    b.sup("S1", "G7", acp="ACP-outside")
    b.sup("G1", "G3")
    b.ctx("G3", "C2", acp="ACP-hazards")
    b.sup("G3", "G4", acp="ACP-soc")
    return b.build()


def _decomposition() -> GsnPattern:
    b = _Builder(PatternId.DECOMPOSITION, "G4")
    b.role("System", "text").role("Tier", "int").role("NextTier", "int")
    b.role("TierRequirements", "artifact").role("TierDesign", "artifact")
    b.role("SafetyRequirement", "collection")
    b.goal("G4", "{System} operates such that the defined Safe Operating Concept is satisfied")
    b.strategy("S3", "Argument over the safety requirements identified at tier {Tier}")
    b.context("C4", "Safety requirements for tier {Tier}: {TierRequirements}", _AI.Q)
    b.context("C5", "Design for tier {Tier}: {TierDesign}", _AI.W)
    b.goal("G5", "Safety requirement {SafetyRequirement} is addressed by the tier {Tier} design")
    b.goal("G8", "Evidence demonstrates that safety requirement {SafetyRequirement} is satisfied",
           undeveloped=True)
    b.goal("G9", "Safety requirement {SafetyRequirement} is addressed through the tier {NextTier} "
                 "decomposition", undeveloped=True, recursion="S3")
    b.goal("G6", "Potential hazardous failures introduced by the tier {Tier} design are acceptably managed",
           undeveloped=True)
    b.sup("G4", "S3")
    b.ctx("S3", "C4", acp="ACP-requirements")
    b.ctx("S3", "C5", acp="ACP-design")
    b.sup("S3", "G5", role="SafetyRequirement")
    b.sup("G5", "G8", acp="ACP-verification")
    b.sup("G5", "G9")
    b.choice("G5", ("G8", "G9"), 1, 2)
    b.sup("S3", "G6", acp="ACP-failures")
    return b.build()


def _operating_context() -> GsnPattern:
    b = _Builder(PatternId.G, "G1.1")
    b.role("System", "text").role("B", "artifact").role("D", "artifact").role("E", "artifact")
    b.role("OdmFeature", "collection").role("C", "artifact").role("F", "artifact")
    b.goal("G1.1", "The defined operating context for {System} is sufficient for safe operation")
    b.goal("G1.2", "The ODM supports {System} fulfilling its autonomous capabilities safely")
    b.context("C1.1", "Operational Domain Model {B}", _AI.B)
    b.context("C1.2", "Autonomous capabilities {D}", _AI.D)
    b.strategy("S1.1", "Argument over the features included in the ODM")
    b.goal("G1.5", "All features of the environment relevant to safe operation are included in the ODM")
    b.solution("Sn1.1", _AI.C)
    b.goal("G1.3", "ODM feature {OdmFeature} is defined at an appropriate level of detail")
    b.solution("Sn1.3", _AI.C, "Granularity review of {OdmFeature} in {C}")
    b.goal("G1.4", "The operating scenarios identify all relevant situations within the ODM")
    b.context("C1.3", "Operating scenarios {E}", _AI.E)
    b.solution("Sn1.2", _AI.F)
    b.sup("G1.1", "G1.2", "G1.4")
    b.ctx("G1.2", "C1.1", "C1.2")
    b.sup("G1.2", "S1.1")
    b.sup("S1.1", "G1.5")
    b.sup("S1.1", "G1.3", role="OdmFeature")
    b.sup("G1.5", "Sn1.1")
    b.sup("G1.3", "Sn1.3")
    b.ctx("G1.4", "C1.3")
    b.sup("G1.4", "Sn1.2")
    return b.build()


def _hazardous_scenarios() -> GsnPattern:
    b = _Builder(PatternId.I, "G2.1")
    b.role("System", "text").role("E", "artifact").role("B", "artifact")
    b.role("WW", "artifact").role("YY", "artifact")
    b.goal("G2.1", "The hazardous scenarios for {System} have been sufficiently identified")
    b.goal("G2.2", "Hazardous scenarios were identified through analysis of the decisions taken by "
                   "{System} in its operating scenarios")
    b.context("C2.1", "Operating scenarios {E}", _AI.E)
    b.context("C2.2", "Operational Domain Model {B}", _AI.B)
    b.goal("G2.4", "All relevant decisions in each operating scenario have been correctly analysed")
    b.solution("Sn2.1", _AI.WW)
    b.goal("G2.5", "Interactions between {System} and its environment have been sufficiently considered")
    b.solution("Sn2.2", _AI.WW, "Interaction analysis in {WW}")
    b.goal("G2.3", "The identified hazardous scenarios have been validated")
    b.solution("Sn2.3", _AI.YY)
    b.sup("G2.1", "G2.2", "G2.3")
    b.ctx("G2.2", "C2.1", "C2.2")
    b.sup("G2.2", "G2.4", "G2.5")
    b.sup("G2.4", "Sn2.1")
    b.sup("G2.5", "Sn2.2")
    b.sup("G2.3", "Sn2.3")
    return b.build()


def _soc() -> GsnPattern:
    b = _Builder(PatternId.N, "G3.1")
    b.role("XX", "artifact").role("L", "artifact").role("M", "artifact")
    b.role("HazardousScenario", "collection")
    b.goal("G3.1", "The Safe Operating Concept sufficiently mitigates all identified hazardous scenarios")
    b.context("C3.1", "Hazardous scenarios {XX}", _AI.XX)
    b.context("C3.2", "Safe Operating Concept {L}", _AI.L)
    b.goal("G3.2", "If the Safe Operating Concept is met, hazardous scenario {HazardousScenario} "
                   "is sufficiently mitigated")
    b.goal("G3.3", "The safety requirements sufficiently mitigate {HazardousScenario}")
    b.solution("Sn3.1", _AI.M)
    b.goal("G3.4", "Additional operating constraints for {HazardousScenario} are justified", optional=True)
    b.goal("G3.5", "The reduced operating domain defined for {HazardousScenario} is justified")
    b.solution("Sn3.2", _AI.M, "ROD justification in {M}")
    b.goal("G3.6", "The reduction in autonomous capability defined for {HazardousScenario} is justified")
    b.solution("Sn3.3", _AI.M, "Capability reduction justification in {M}")
    b.ctx("G3.1", "C3.1", "C3.2")
    b.sup("G3.1", "G3.2", role="HazardousScenario")
    b.sup("G3.2", "G3.3", "G3.4")
    b.sup("G3.3", "Sn3.1")
    b.sup("G3.4", "G3.5", "G3.6")
    b.choice("G3.4", ("G3.5", "G3.6"), 1, 2)
    b.sup("G3.5", "Sn3.2")
    b.sup("G3.6", "Sn3.3")
    return b.build()


def _safety_requirements() -> GsnPattern:
    b = _Builder(PatternId.S, "G4.1")
    b.role("Tier", "int").role("ParentRequirement", "collection").role("TierRequirementMap", "map")
    b.role("W", "artifact").role("R", "artifact")
    b.goal("G4.1", "The safety requirements inherited by tier {Tier} are adequately allocated, "
                   "decomposed and interpreted")
    b.context("C4.1", "Tier {Tier} design {W}", _AI.W)
    b.goal("G4.2", "The tier {Tier} safety requirements sufficiently capture the intent of the "
                   "inherited safety requirements")
    b.goal("G4.3", "The intent of {ParentRequirement} is captured by {TierRequirementMap[ParentRequirement]}")
    b.solution("Sn4.1", _AI.R)
    b.ctx("G4.1", "C4.1")
    b.sup("G4.1", "G4.2")
    b.sup("G4.2", "G4.3", role="ParentRequirement")
    b.sup("G4.3", "Sn4.1")
    return b.build()


def _design() -> GsnPattern:
    b = _Builder(PatternId.U, "G5.1")
    b.role("Tier", "int").role("V", "artifact").role("DesignDecision", "collection")
    b.role("Y", "artifact").role("X", "artifact").role("Z", "artifact")
    b.role("Robustness", "map", optional=True)
    b.role("FaultTolerance", "map", optional=True)
    b.role("RuntimeMonitoring", "map", optional=True)
    b.goal("G5.1", "The tier {Tier} design ensures the tier {Tier} safety requirements are satisfied")
    b.goal("G5.2", "The key design decisions at tier {Tier} are justified")
    b.context("C5.1", "Development log {V}", _AI.V)
    b.goal("G5.5", "Design decision {DesignDecision} is appropriate for satisfying the safety requirements")
    b.solution("Sn5.1", _AI.Y)
    b.goal("G5.6", "Robustness of {DesignDecision}: {Robustness[DesignDecision]}", optional=True)
    b.solution("Sn5.6", _AI.Y, "Robustness justification in {Y}")
    b.goal("G5.7", "Fault tolerance of {DesignDecision}: {FaultTolerance[DesignDecision]}", optional=True)
    b.solution("Sn5.7", _AI.Y, "Fault tolerance justification in {Y}")
    b.goal("G5.8", "Runtime monitoring for {DesignDecision}: {RuntimeMonitoring[DesignDecision]}",
           optional=True)
    b.solution("Sn5.8", _AI.Y, "Runtime monitoring justification in {Y}")
    b.goal("G5.3", "The defined design process for tier {Tier} has been followed")
    b.solution("Sn5.2", _AI.X)
    b.goal("G5.4", "The tier {Tier} design has been reviewed for errors that could cause hazards")
    b.solution("Sn5.3", _AI.Z)
    b.sup("G5.1", "G5.2", "G5.3", "G5.4")
    b.ctx("G5.2", "C5.1")
    b.sup("G5.2", "G5.5", role="DesignDecision")
    b.sup("G5.5", "Sn5.1", "G5.6", "G5.7", "G5.8")
    b.sup("G5.6", "Sn5.6")
    b.sup("G5.7", "Sn5.7")
    b.sup("G5.8", "Sn5.8")
    b.sup("G5.3", "Sn5.2")
    b.sup("G5.4", "Sn5.3")
    return b.build()


def _hazardous_failures() -> GsnPattern:
    b = _Builder(PatternId.DD, "G6")
    b.role("Tier", "int").role("BB", "artifact").role("HazardousFailure", "collection")
    b.role("Q", "artifact").role("Y", "artifact").role("L", "artifact")
    b.goal("G6", "Potential hazardous failures at tier {Tier} are acceptably managed")
    b.context("C6.1", "Safety analysis report {BB}", _AI.BB)
    b.goal("G6.1", "Potential hazardous failures at tier {Tier} have been completely and correctly identified")
    b.solution("Sn6.1", _AI.BB)
    b.goal("G6.2", "Sufficient mitigations are in place for each identified potential hazardous failure")
    b.goal("G6.3", "Hazardous failure {HazardousFailure} is sufficiently addressed")
    b.goal("G6.4", "Mitigations are in place for {HazardousFailure}")
    b.solution("Sn6.3", _AI.Q, "Derived safety requirements {Q}")
    b.solution("Sn6.2", _AI.Y, "Design justification {Y}")
    b.solution("Sn6.5", _AI.L, "Operating concept limitations {L}")
    b.goal("G6.5", "The mitigations for {HazardousFailure} are sufficient")
    b.solution("Sn6.4", _AI.Y, "Mitigation sufficiency justification in {Y}")
    b.ctx("G6", "C6.1")
    b.sup("G6", "G6.1", "G6.2")
    b.sup("G6.1", "Sn6.1")
    b.sup("G6.2", "G6.3", role="HazardousFailure")
    b.sup("G6.3", "G6.4", "G6.5")
    b.sup("G6.4", "Sn6.3", "Sn6.2", "Sn6.5")
    b.choice("G6.4", ("Sn6.3", "Sn6.2", "Sn6.5"), 1, 3)
    b.sup("G6.5", "Sn6.4")
    return b.build()


def _out_of_context() -> GsnPattern:
    b = _Builder(PatternId.PP, "G7")
    b.role("System", "text").role("B", "artifact").role("HH", "artifact")
    b.role("BoundaryJustification", "text").role("II", "artifact")
    b.role("GG", "artifact").role("NN", "artifact").role("OO", "artifact").role("KK", "artifact")
    b.goal("G7", "{System} remains sufficiently safe when operating outside the defined operating context")
    b.context("C7.1", "Operational Domain Model {B}", _AI.B)
    b.goal("G7.1", "{System} recognises when it is leaving the ODM")
    b.context("C7.2", "Interpretation of the ODM boundary {HH}", _AI.HH)
    b.justification("J7.1", "{BoundaryJustification}")
    b.solution("Sn7.1", _AI.II)
    b.goal("G7.2", "If {System} leaves the ODM, a minimum risk strategy keeps it sufficiently safe")
    b.solution("Sn7.2", _AI.GG)
    b.solution("Sn7.3", _AI.NN)
    b.solution("Sn7.4", _AI.OO)
    b.goal("G7.3", "{System} remains sufficiently safe while transitioning across the ODM boundary")
    b.goal("G7.11", "Unsafe transitions across the ODM boundary have been identified")
    b.solution("Sn7.5", _AI.KK)
    b.goal("G7.12", "The risk from unsafe transitions is minimised")
    b.solution("Sn7.6", _AI.KK, "Transition mitigations in {KK}")
    b.ctx("G7", "C7.1")
    b.sup("G7", "G7.1", "G7.2", "G7.3")
    b.ctx("G7.1", "C7.2", "J7.1")
    b.sup("G7.1", "Sn7.1")
    b.sup("G7.2", "Sn7.2", "Sn7.3", "Sn7.4")
    b.sup("G7.3", "G7.11", "G7.12")
    b.sup("G7.11", "Sn7.5")
    b.sup("G7.12", "Sn7.6")
    return b.build()


def _verification() -> GsnPattern:
    b = _Builder(PatternId.UU, "G8")
    b.role("Tier", "int").role("RR", "artifact").role("StrategyJustification", "text")
    b.role("Requirement", "collection").role("TT", "artifact").role("SS", "artifact")
    b.goal("G8", "The tier {Tier} verification evidence demonstrates the safety requirements are satisfied")
    b.strategy("S8.1", "Argument over the verification strategy")
    b.context("C8.1", "Verification strategy {RR}", _AI.RR)
    b.justification("J8.1", "{StrategyJustification}")
    b.goal("G8.2", "Testing demonstrates that {Requirement} is satisfied")
    b.goal("G8.3", "The test cases for {Requirement} are passed")
    b.solution("Sn8.1", _AI.TT)
    b.goal("G8.4", "The test cases for {Requirement} give sufficient coverage")
    b.solution("Sn8.2", _AI.SS)
    b.goal("G8.5", "The test platform for {Requirement} is sufficiently representative")
    b.solution("Sn8.3", _AI.SS, "Test platform description in {SS}")
    b.goal("G8.6", "Formal verification demonstrates that {Requirement} is satisfied")
    b.goal("G8.7", "The formal properties specified for {Requirement} are proven")
    b.solution("Sn8.4", _AI.TT, "Proof results {TT}")
    b.goal("G8.10", "The formal model is an accurate representation of the system and its environment")
    b.solution("Sn8.5", _AI.SS, "Formal model validation in {SS}")
    b.goal("G8.8", "The specified properties sufficiently represent {Requirement}")
    b.solution("Sn8.6", _AI.SS, "Property derivation rationale in {SS}")
    b.sup("G8", "S8.1")
    b.ctx("S8.1", "C8.1", "J8.1")
    b.sup("S8.1", "G8.2", role="Requirement")
    b.sup("S8.1", "G8.6", role="Requirement")
    b.choice("S8.1", ("G8.2", "G8.6"), 1, 2)
    b.sup("G8.2", "G8.3", "G8.4", "G8.5")
    b.sup("G8.3", "Sn8.1")
    b.sup("G8.4", "Sn8.2")
    b.sup("G8.5", "Sn8.3")
    b.sup("G8.6", "G8.7", "G8.8")
    b.sup("G8.7", "Sn8.4", "G8.10")
    b.sup("G8.10", "Sn8.5")
    b.sup("G8.8", "Sn8.6")
    return b.build()


_FACTORIES = {
    PatternId.BASELINE: _baseline,
    PatternId.DECOMPOSITION: _decomposition,
    PatternId.G: _operating_context,
    PatternId.I: _hazardous_scenarios,
    PatternId.N: _soc,
    PatternId.S: _safety_requirements,
    PatternId.U: _design,
    PatternId.DD: _hazardous_failures,
    PatternId.PP: _out_of_context,
    PatternId.UU: _verification,
}


@lru_cache(maxsize=None)
def get_pattern(pid: PatternId | str) -> GsnPattern:
    if not isinstance(pid, PatternId):
        pid = PatternId.parse(pid)
    return _FACTORIES[pid]()


def mandatory_choices(pattern: GsnPattern) -> list[Choice]:
    """Choice points whose parent is always present (not an optional node)."""
    nodes = pattern.node_map
    return [c for c in pattern.choices if not nodes[c.node].has(Flag.OPTIONAL) and c.min > 0
            and not _is_choice_option(pattern, c.node)]


def _is_choice_option(pattern: GsnPattern, node_id: str) -> bool:
    return any(node_id in c.options for c in pattern.choices)


def required_roles(pid: PatternId | str) -> list[RoleSpec]:
    """Roles (and mandatory choice points) a binding must supply, in declaration order."""
    p = get_pattern(pid)
    out = [RoleSpec(r.name, r.binding_type, r.collection) for r in p.roles if not r.optional]
    out += [RoleSpec(c.node, "choice", False) for c in mandatory_choices(p)]
    return out
