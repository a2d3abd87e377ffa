"""Expansion of argument patterns into concrete GSN graphs."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

from .errors import (
    ChoiceCardinality,
    DanglingRequirement,
    EmptyCollection,
    MissingRole,
    NotWellFormed,
    RoleTypeMismatch,
    UnexpectedRole,
    UnknownParent,
)
from .gsn import (
    PLACEHOLDER,
    EdgeKind,
    Flag,
    GsnEdge,
    GsnGraph,
    GsnNode,
    GsnPattern,
    NodeKind,
    check_wellformed,
)
from .patterns import PatternId, get_pattern, mandatory_choices

SCALAR_TYPES = ("text", "int", "artifact", "map")


@dataclass
class Binding:
    """Values for a pattern's roles.

    Attributes:
        pattern: Pattern this binding targets.
        scalars: Values for text, int, artifact and map roles.
        collections: Element lists for collection roles.
        choices: Selected options keyed by choice node id. A key with a
            clone suffix (``G6.4#2``) overrides the plain key for that clone.
        evidence: Artifact records keyed by solution node id (plain or cloned).
    """

    pattern: PatternId | str
    scalars: dict[str, Any] = field(default_factory=dict)
    collections: dict[str, list] = field(default_factory=dict)
    choices: dict[str, list[str]] = field(default_factory=dict)
    evidence: dict[str, Any] = field(default_factory=dict)
    tiers: list[int] | None = None


@dataclass(frozen=True)
class TraceEntry:
    node: str
    pattern_node: str
    clone: tuple[int, ...]
    values: Mapping[str, str]


@dataclass
class InstantiatedArgument:
    graph: GsnGraph
    trace: list[TraceEntry]
    warnings: list[str] = field(default_factory=list)
    attachments: dict[str, list[str]] = field(default_factory=dict)


def _base(key: str) -> str:
    return key.split("#", 1)[0].split("@", 1)[0]


def _check_binding(p: GsnPattern, b: Binding) -> None:
    if b.pattern and str(PatternId.parse(str(b.pattern))) != p.pattern_id:
        raise UnexpectedRole(f"binding is for {b.pattern}, not {p.pattern_id}")
    declared = {r.name: r for r in p.roles}
    for r in p.roles:
        slot = b.collections if r.collection else b.scalars
        if r.name not in slot:
            if r.optional:
                continue
            raise MissingRole(r.name)
        val = slot[r.name]
        if r.collection and not isinstance(val, (list, tuple)):
            raise RoleTypeMismatch(r.name, "list")
        if r.binding_type == "int" and (isinstance(val, bool) or not isinstance(val, int)):
            raise RoleTypeMismatch(r.name, "integer")
        if r.binding_type == "map" and not isinstance(val, Mapping):
            raise RoleTypeMismatch(r.name, "mapping")
    for name in b.scalars:
        r = declared.get(name)
        if r is None or r.collection:
            raise UnexpectedRole(name)
    for name in b.collections:
        r = declared.get(name)
        if r is None or not r.collection:
            raise UnexpectedRole(name)
    choice_nodes = {c.node for c in p.choices}
    for key in b.choices:
        if _base(key) not in choice_nodes:
            raise UnexpectedRole(key)
    for c in mandatory_choices(p):
        if not any(_base(k) == c.node for k in b.choices):
            raise MissingRole(c.node)


class _Expander:
    def __init__(self, p: GsnPattern, b: Binding, strict: bool):
        self.p = p
        self.b = b
        self.strict = strict
        self.pnodes = p.node_map
        self.out_edges: dict[str, list[GsnEdge]] = {}
        for e in p.edges:
            self.out_edges.setdefault(e.source, []).append(e)
        self.optional_roles = {r.name for r in p.roles if r.optional}
        self.nodes: dict[str, GsnNode] = {}
        self.edges: list[GsnEdge] = []
        self.trace: list[TraceEntry] = []
        self.warnings: list[str] = []

    def _lookup(self, name: str, scope: Mapping[str, Any]) -> Any:
        if name in scope:
            return scope[name]
        if name in self.b.scalars:
            return self.b.scalars[name]
        if name in self.b.collections:
            return self.b.collections[name]
        raise KeyError(name)

    @staticmethod
    def _render(val: Any) -> str:
        if isinstance(val, (list, tuple)):
            return ", ".join(str(v) for v in val)
        return str(val)

    def _substitute(self, text: str, scope: Mapping[str, Any], node_id: str):
        used: dict[str, str] = {}
        missing_optional = False
        optional_hit = False

        def repl(m):
            nonlocal missing_optional, optional_hit
            name, key = m.group(1), m.group(2)
            if name in self.optional_roles:
                optional_hit = True
            try:
                val = self._lookup(name, scope)
                if key is not None:
                    k = self._render(self._lookup(key, scope))
                    if not isinstance(val, Mapping) or k not in val:
                        raise KeyError(name)
                    val = val[k]
                    used[f"{name}[{k}]"] = self._render(val)
                else:
                    used[name] = self._render(val)
                return self._render(val)
            except KeyError:
                if name in self.optional_roles:
                    missing_optional = True
                    return m.group(0)
                raise MissingRole(name) from None

        out = PLACEHOLDER.sub(repl, text)
        return out, used, missing_optional, optional_hit

    def _selection(self, pid: str, new_id: str) -> list[str] | None:
        if new_id in self.b.choices:
            return list(self.b.choices[new_id])
        if pid in self.b.choices:
            return list(self.b.choices[pid])
        return None

    def expand(self, pid: str, scope: Mapping[str, Any], suffix: str, clone: tuple[int, ...]) -> str | None:
        new_id = pid + suffix
        if new_id in self.nodes:
            return new_id
        pn = self.pnodes[pid]
        choice = self.p.choice_at(pid)
        selection = self._selection(pid, new_id) if choice else None

        text, used, missing_optional, optional_hit = self._substitute(pn.statement, scope, new_id)
        if pn.has(Flag.OPTIONAL):
            if choice is not None:
                keep = bool(selection)
            else:
                keep = optional_hit and not missing_optional
            if not keep:
                return None
        elif missing_optional:
            raise MissingRole(next(m.group(1) for m in PLACEHOLDER.finditer(text)))

        meta = dict(pn.metadata)
        meta["pattern_node"] = pid
        if pn.kind == NodeKind.SOLUTION:
            self._attach_evidence(pid, new_id, pn, meta)
        flags = set(pn.flags) - {Flag.UNINSTANTIATED, Flag.OPTIONAL}
        self.nodes[new_id] = GsnNode(new_id, pn.kind, text, frozenset(flags), pn.artifact, meta)
        self.trace.append(TraceEntry(new_id, pid, clone, dict(sorted(used.items()))))

        if choice is not None:
            selection = selection or []
            unknown = [o for o in selection if o not in choice.options]
            if unknown:
                raise UnexpectedRole(f"{new_id}:{unknown[0]}")
            selection = [o for o in choice.options if o in selection]
            if not (choice.min <= len(selection) <= choice.max):
                if self.strict:
                    raise ChoiceCardinality(new_id, len(selection), choice.min, choice.max)
                self.warnings.append(f"{new_id}: choice selects {len(selection)} option(s); left undeveloped")
                selection = selection[: choice.max]

        for e in self.out_edges.get(pid, ()):
            tgt = e.target
            if choice is not None and tgt in choice.options and tgt not in selection:
                continue
            mult = self.p.multiplicity_on(pid, tgt)
            if mult is None:
                cid = self.expand(tgt, scope, suffix, clone)
                if cid:
                    self._edge(new_id, cid, e, suffix)
                continue
            elems = list(self.b.collections.get(mult.role, ()))
            if not elems:
                optional_branch = self.pnodes[tgt].has(Flag.OPTIONAL)
                if not optional_branch:
                    if self.strict:
                        raise EmptyCollection(mult.role)
                    self.warnings.append(f"{new_id}: no {mult.role} elements; branch left undeveloped")
                continue
            for k, el in enumerate(elems, 1):
                csuf = f"{suffix}#{k}"
                cid = self.expand(tgt, {**scope, mult.role: el}, csuf, clone + (k,))
                if cid:
                    self._edge(new_id, cid, e, csuf)

        node = self.nodes[new_id]
        if not self.strict and node.kind in (NodeKind.GOAL, NodeKind.STRATEGY) and not node.has(Flag.UNDEVELOPED):
            if not any(x.source == new_id and x.kind == EdgeKind.SUPPORTED_BY for x in self.edges):
                self.nodes[new_id] = replace(node, flags=node.flags | {Flag.UNDEVELOPED})
        return new_id

    def _edge(self, src: str, tgt: str, e: GsnEdge, suffix: str) -> None:
        acp = f"{e.acp}{suffix}" if e.acp else None
        self.edges.append(GsnEdge(src, tgt, e.kind, acp))

    def _attach_evidence(self, pid: str, new_id: str, pn: GsnNode, meta: dict) -> None:
        rec = self.b.evidence.get(new_id) or self.b.evidence.get(pid)
        if rec is None:
            self.warnings.append(f"{new_id}: no evidence record bound for {pn.artifact}")
            return
        status = str(getattr(rec, "status", "Missing"))
        meta["evidence"] = {
            "artifact": str(getattr(rec, "ref", rec)),
            "path": getattr(rec, "path", ""),
            "checksum": getattr(rec, "checksum", ""),
            "status": status,
        }
        if status != "Validated":
            self.warnings.append(f"{new_id}: evidence {meta['evidence']['artifact']} is {status}")


def instantiate(pattern: GsnPattern | PatternId | str, binding: Binding, *, strict: bool = True) -> InstantiatedArgument:
    """Expand a pattern with a binding.

    Multiplicity targets are cloned once per collection element with ids
    suffixed ``#k`` (1-based); unselected choice options and optional nodes
    without bound content are dropped.  With ``strict=False`` cardinality and
    empty-collection problems leave the parent undeveloped and are reported
    as warnings instead of raising.
    """
    p = pattern if isinstance(pattern, GsnPattern) else get_pattern(pattern)
    _check_binding(p, binding)
    ex = _Expander(p, binding, strict)
    ex.expand(p.root, {}, "", ())
    graph = GsnGraph(tuple(ex.nodes.values()), tuple(ex.edges), p.root)
    problems = check_wellformed(graph)
    if problems:
        raise NotWellFormed(problems)
    return InstantiatedArgument(graph, ex.trace, ex.warnings)


def with_suffix(arg: InstantiatedArgument, suffix: str) -> InstantiatedArgument:
    """Rename every node and ACP label by appending ``suffix``."""
    g = arg.graph
    nodes = tuple(replace(n, id=n.id + suffix) for n in g.nodes)
    edges = tuple(GsnEdge(e.source + suffix, e.target + suffix, e.kind, e.acp + suffix if e.acp else None)
                  for e in g.edges)
    graph = GsnGraph(nodes, edges, g.root + suffix, frozenset(a + suffix for a in g.satisfied_acps))
    trace = [replace(t, node=t.node + suffix) for t in arg.trace]
    return InstantiatedArgument(graph, trace, list(arg.warnings),
                                {k: [s + suffix for s in v] for k, v in arg.attachments.items()})


def rename_node(arg: InstantiatedArgument, old: str, new: str) -> InstantiatedArgument:
    g = arg.graph
    ren = (lambda x: new if x == old else x)
    nodes = tuple(replace(n, id=ren(n.id)) for n in g.nodes)
    edges = tuple(replace(e, source=ren(e.source), target=ren(e.target)) for e in g.edges)
    graph = GsnGraph(nodes, edges, ren(g.root), g.satisfied_acps)
    trace = [replace(t, node=ren(t.node)) for t in arg.trace]
    return InstantiatedArgument(graph, trace, list(arg.warnings), dict(arg.attachments))


# system decomposition


@dataclass(frozen=True)
class TierRequirement:
    id: str
    parents: tuple[str, ...] = ()
    text: str = ""


@dataclass
class TierSpec:
    """Inputs for one tier of the decomposition argument.

    Attributes:
        tier: Tier index.
        requirements: Safety requirements defined at this tier.
        evidenced: Ids of requirements with verification evidence.
        requirements_ref: Reference text for the tier requirements artifact.
        design_ref: Reference text for the tier design artifact.
    """

    tier: int
    requirements: list[TierRequirement]
    evidenced: set[str] = field(default_factory=set)
    requirements_ref: str = ""
    design_ref: str = ""


SOC_ROOT = "SOC"


def decomposition_choices(tiers: Sequence[TierSpec], *, strict: bool = True) -> list[dict[str, list[str]]]:
    """Per-tier choice maps selecting G8 and/or G9 for every requirement clone."""
    for idx, spec in enumerate(tiers if strict else ()):
        prev_ids = {r.id for r in tiers[idx - 1].requirements} if idx else {SOC_ROOT}
        for r in spec.requirements:
            if idx and not r.parents:
                raise UnknownParent(r.id, spec.tier, None)
            for p in r.parents:
                if p not in prev_ids:
                    raise UnknownParent(r.id, spec.tier, p)
    out = []
    for idx, spec in enumerate(tiers):
        nxt = tiers[idx + 1].requirements if idx + 1 < len(tiers) else []
        parented = {p for r in nxt for p in r.parents}
        choices = {}
        for k, r in enumerate(spec.requirements, 1):
            pick = []
            if r.id in spec.evidenced:
                pick.append("G8")
            if r.id in parented:
                pick.append("G9")
            if not pick:
                if strict:
                    raise DanglingRequirement(r.id, spec.tier)
                pick.append("G8")
            choices[f"G5#{k}"] = pick
        out.append(choices)
    return out


def instantiate_decomposition(system: str, tiers: Sequence[TierSpec], *, strict: bool = True) -> InstantiatedArgument:
    """Build the tier-by-tier requirements argument rooted at G4.

    Node ids carry an ``@tier`` suffix.  Each G9 clone at tier n links to
    the strategy S3 of tier n+1; the last tier has no G9 children.
    """
    if not tiers:
        raise ValueError("at least one tier is required")
    order = [t.tier for t in tiers]
    if order != list(range(order[0], order[0] + len(order))):
        raise ValueError(f"tiers must be consecutive and ascending, got {order}")
    all_choices = decomposition_choices(tiers, strict=strict)
    pieces: list[InstantiatedArgument] = []
    for spec, choices in zip(tiers, all_choices):
        b = Binding(
            PatternId.DECOMPOSITION,
            scalars={
                "System": system,
                "Tier": spec.tier,
                "NextTier": spec.tier + 1,
                "TierRequirements": spec.requirements_ref or f"tier {spec.tier} requirements",
                "TierDesign": spec.design_ref or f"tier {spec.tier} design",
            },
            collections={"SafetyRequirement": [r.id for r in spec.requirements]},
            choices=choices,
        )
        pieces.append(with_suffix(instantiate(PatternId.DECOMPOSITION, b, strict=strict), f"@{spec.tier}"))

    first = rename_node(pieces[0], f"G4@{tiers[0].tier}", "G4")
    nodes = list(first.graph.nodes)
    edges = list(first.graph.edges)
    trace = list(first.trace)
    warnings = list(first.warnings)
    for spec, piece in zip(tiers[1:], pieces[1:]):
        drop = f"G4@{spec.tier}"
        nodes += [n for n in piece.graph.nodes if n.id != drop]
        edges += [e for e in piece.graph.edges if e.source != drop]
        trace += [t for t in piece.trace if t.node != drop]
        warnings += piece.warnings

    by_id = {n.id: i for i, n in enumerate(nodes)}
    for spec in tiers[:-1]:
        target = f"S3@{spec.tier + 1}"
        for n in list(nodes):
            if n.metadata.get("pattern_node") == "G9" and n.id.endswith(f"@{spec.tier}"):
                edges.append(GsnEdge(n.id, target, EdgeKind.SUPPORTED_BY))
                nodes[by_id[n.id]] = replace(n, flags=n.flags - {Flag.UNDEVELOPED})
    graph = GsnGraph(tuple(nodes), tuple(edges), "G4")
    problems = check_wellformed(graph)
    if problems:
        raise NotWellFormed(problems)
    return InstantiatedArgument(graph, trace, warnings)
