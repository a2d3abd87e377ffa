"""Goal Structuring Notation graphs and argument patterns.

A graph is immutable; operations such as :func:`attach_confidence` return
new graphs.  Patterns extend graphs with roles, multiplicities and choices
and are expanded by :mod:`sacekit.instantiation`.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping

from .common import Violation
from .errors import (
    AcpAlreadySatisfied,
    DuplicateAcp,
    NodeIdCollision,
    NotWellFormed,
    UnknownAcp,
)

PLACEHOLDER = re.compile(r"\{([A-Za-z][A-Za-z0-9_]*)(?:\[([A-Za-z][A-Za-z0-9_]*)\])?\}")


class NodeKind(str, enum.Enum):
    GOAL = "Goal"
    STRATEGY = "Strategy"
    SOLUTION = "Solution"
    CONTEXT = "Context"
    JUSTIFICATION = "Justification"
    ASSUMPTION = "Assumption"


class EdgeKind(str, enum.Enum):
    SUPPORTED_BY = "SupportedBy"
    IN_CONTEXT_OF = "InContextOf"


class Flag(str, enum.Enum):
    UNDEVELOPED = "Undeveloped"
    UNINSTANTIATED = "Uninstantiated"
    OPTIONAL = "Optional"


SUPPORT_TARGETS = frozenset({NodeKind.GOAL, NodeKind.STRATEGY, NodeKind.SOLUTION})
CONTEXT_TARGETS = frozenset({NodeKind.CONTEXT, NodeKind.JUSTIFICATION, NodeKind.ASSUMPTION})
EDGE_SOURCES = frozenset({NodeKind.GOAL, NodeKind.STRATEGY})


@dataclass(frozen=True)
class GsnNode:
    """One GSN element.

    Attributes:
        id: Unique node identifier, e.g. ``G3.2`` or ``G3.2#1``.
        kind: GSN element type.
        statement: Claim or description; patterns may hold ``{Role}`` placeholders.
        flags: GSN decorations.
        artifact: Artifact id cited by a solution or context, if any.
        metadata: Free-form extras (evidence checksum, reconstruction marker).
    """

    id: str
    kind: NodeKind
    statement: str
    flags: frozenset[Flag] = frozenset()
    artifact: str | None = None
    metadata: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def has(self, flag: Flag) -> bool:
        return flag in self.flags


@dataclass(frozen=True)
class GsnEdge:
    source: str
    target: str
    kind: EdgeKind = EdgeKind.SUPPORTED_BY
    acp: str | None = None


@dataclass(frozen=True)
class GsnGraph:
    nodes: tuple[GsnNode, ...]
    edges: tuple[GsnEdge, ...]
    root: str
    satisfied_acps: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for n in self.nodes:
            if n.id in seen:
                raise ValueError(f"duplicate node id {n.id!r}")
            seen.add(n.id)

    @property
    def node_map(self) -> dict[str, GsnNode]:
        return {n.id: n for n in self.nodes}

    def node(self, node_id: str) -> GsnNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def children(self, node_id: str, kind: EdgeKind | None = None) -> list[str]:
        return [e.target for e in self.edges if e.source == node_id and (kind is None or e.kind == kind)]

    def acp_edges(self) -> dict[str, list[GsnEdge]]:
        out: dict[str, list[GsnEdge]] = {}
        for e in self.edges:
            if e.acp:
                out.setdefault(e.acp, []).append(e)
        return out

    def acp_labels(self) -> list[str]:
        return sorted(self.acp_edges())

    def unsatisfied_acps(self) -> list[str]:
        return [a for a in self.acp_labels() if a not in self.satisfied_acps]

    def subtree(self, node_id: str) -> set[str]:
        """Ids reachable from ``node_id`` over both edge kinds."""
        adj = _adjacency(self.edges)
        seen = {node_id}
        stack = [node_id]
        while stack:
            for nxt in adj.get(stack.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen


@dataclass(frozen=True)
class Role:
    """A placeholder a binding must (or may) supply.

    ``binding_type`` is one of ``text``, ``int``, ``artifact``, ``map`` or
    ``collection``.
    """

    name: str
    binding_type: str
    optional: bool = False

    @property
    def collection(self) -> bool:
        return self.binding_type == "collection"


@dataclass(frozen=True)
class Multiplicity:
    source: str
    target: str
    role: str


@dataclass(frozen=True)
class Choice:
    node: str
    options: tuple[str, ...]
    min: int = 1
    max: int = 1


@dataclass(frozen=True)
class GsnPattern(GsnGraph):
    pattern_id: str = ""
    roles: tuple[Role, ...] = ()
    multiplicities: tuple[Multiplicity, ...] = ()
    choices: tuple[Choice, ...] = ()
    metadata: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def role(self, name: str) -> Role | None:
        for r in self.roles:
            if r.name == name:
                return r
        return None

    def choice_at(self, node_id: str) -> Choice | None:
        for c in self.choices:
            if c.node == node_id:
                return c
        return None

    def multiplicity_on(self, source: str, target: str) -> Multiplicity | None:
        for m in self.multiplicities:
            if m.source == source and m.target == target:
                return m
        return None


# well-formedness


def _adjacency(edges: Iterable[GsnEdge], kind: EdgeKind | None = None) -> dict[str, list[str]]:
    adj: dict[str, list[str]] = {}
    for e in edges:
        if kind is None or e.kind == kind:
            adj.setdefault(e.source, []).append(e.target)
    return adj


def _cycle_nodes(nodes: list[str], adj: dict[str, list[str]]) -> list[list[str]]:
    """Strongly connected components that contain a cycle (Tarjan)."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    comps: list[list[str]] = []
    counter = 0

    for start in nodes:
        if start in index:
            continue
        work = [(start, iter(adj.get(start, ())))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(adj.get(w, ()))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                if len(comp) > 1 or v in adj.get(v, ()):
                    comps.append(sorted(comp))
    return comps


def check_wellformed(g: GsnGraph) -> list[Violation]:
    """Structural checks; an empty list means the graph is well-formed.

    Codes: GSN001 cycle, GSN002 dangling support, GSN003 solution with
    children, GSN004 unreachable node, GSN005 placeholder problem, GSN006
    bad edge kind.
    """
    out: list[Violation] = []
    nodes = g.node_map
    is_pattern = isinstance(g, GsnPattern)
    declared = {r.name for r in g.roles} if is_pattern else set()

    support = _adjacency([e for e in g.edges if e.source in nodes and e.target in nodes],
                         EdgeKind.SUPPORTED_BY)
    for comp in _cycle_nodes([n.id for n in g.nodes], support):
        out.append(Violation("GSN001", comp[0], "SupportedBy cycle through " + ", ".join(comp)))

    for e in g.edges:
        for end in (e.source, e.target):
            if end not in nodes:
                out.append(Violation("GSN002", f"{e.source}->{e.target}", f"edge references unknown node {end!r}"))
    has_support = {e.source for e in g.edges if e.kind == EdgeKind.SUPPORTED_BY and e.target in nodes}
    for n in g.nodes:
        if n.kind in (NodeKind.GOAL, NodeKind.STRATEGY) and n.id not in has_support:
            if not n.has(Flag.UNDEVELOPED):
                out.append(Violation("GSN002", n.id, f"{n.kind.value.lower()} has no supporting element"))

    for e in g.edges:
        src = nodes.get(e.source)
        if src is not None and src.kind == NodeKind.SOLUTION and e.kind == EdgeKind.SUPPORTED_BY:
            out.append(Violation("GSN003", e.source, f"solution supported by {e.target}"))

    if g.root not in nodes:
        out.append(Violation("GSN004", g.root, "root node is missing"))
    else:
        if nodes[g.root].kind not in (NodeKind.GOAL, NodeKind.STRATEGY):
            out.append(Violation("GSN006", g.root, "root must be a goal or strategy"))
        reach = g.subtree(g.root)
        for n in g.nodes:
            if n.id not in reach:
                out.append(Violation("GSN004", n.id, f"not reachable from {g.root}"))

    for n in g.nodes:
        for m in PLACEHOLDER.finditer(n.statement):
            names = [x for x in m.groups() if x]
            if not is_pattern:
                out.append(Violation("GSN005", n.id, f"unbound placeholder {m.group(0)}"))
            else:
                for name in names:
                    if name not in declared:
                        out.append(Violation("GSN005", n.id, f"placeholder {{{name}}} is not a declared role"))
        if not is_pattern and n.has(Flag.UNINSTANTIATED):
            out.append(Violation("GSN005", n.id, "node is still marked uninstantiated"))

    for e in g.edges:
        src, tgt = nodes.get(e.source), nodes.get(e.target)
        if src is None or tgt is None:
            continue
        allowed = SUPPORT_TARGETS if e.kind == EdgeKind.SUPPORTED_BY else CONTEXT_TARGETS
        if tgt.kind not in allowed:
            out.append(Violation("GSN006", f"{e.source}->{e.target}",
                                 f"{e.kind.value} cannot target a {tgt.kind.value}"))
        if src.kind not in EDGE_SOURCES and not (src.kind == NodeKind.SOLUTION and e.kind == EdgeKind.SUPPORTED_BY):
            out.append(Violation("GSN006", f"{e.source}->{e.target}",
                                 f"a {src.kind.value} cannot be the source of {e.kind.value}"))

    if is_pattern:
        edge_set = {(e.source, e.target, e.kind) for e in g.edges}
        for m in g.multiplicities:
            if (m.source, m.target, EdgeKind.SUPPORTED_BY) not in edge_set:
                out.append(Violation("GSN002", f"{m.source}->{m.target}", "multiplicity on a missing edge"))
            r = g.role(m.role)
            if r is None or not r.collection:
                out.append(Violation("GSN005", m.target, f"multiplicity role {m.role!r} is not a declared collection"))
        for c in g.choices:
            for opt in c.options:
                if (c.node, opt, EdgeKind.SUPPORTED_BY) not in edge_set:
                    out.append(Violation("GSN006", f"{c.node}->{opt}", "choice option is not a supporting child"))
            if not (0 <= c.min <= c.max <= len(c.options)):
                out.append(Violation("GSN006", c.node, "choice bounds are inconsistent"))

    return sorted(set(out))


# confidence arguments


def _anchor(g: GsnGraph, edge: GsnEdge) -> str:
    if edge.kind == EdgeKind.SUPPORTED_BY:
        return edge.target
    return edge.source


def merge_under(g: GsnGraph, anchor: str, sub: GsnGraph, *, acp: str | None = None) -> GsnGraph:
    """Hang ``sub`` below ``anchor``.

    When the sub-argument root has the anchor's own id it develops that
    claim, so the two nodes are fused and the anchor keeps its statement.
    """
    nodes = {n.id: n for n in g.nodes}
    if anchor not in nodes:
        raise KeyError(anchor)
    fused = sub.root == anchor
    for n in sub.nodes:
        if n.id in nodes and not (fused and n.id == anchor):
            raise NodeIdCollision(n.id)
    new_nodes = list(g.nodes)
    for n in sub.nodes:
        if fused and n.id == anchor:
            continue
        new_nodes.append(n)
    new_edges = list(g.edges) + list(sub.edges)
    if not fused:
        new_edges.append(GsnEdge(anchor, sub.root, EdgeKind.SUPPORTED_BY))
    anchor_node = nodes[anchor]
    if anchor_node.has(Flag.UNDEVELOPED):
        idx = new_nodes.index(anchor_node)
        new_nodes[idx] = replace(anchor_node, flags=anchor_node.flags - {Flag.UNDEVELOPED})
    satisfied = set(g.satisfied_acps) | set(sub.satisfied_acps)
    if acp:
        satisfied.add(acp)
    return GsnGraph(tuple(new_nodes), tuple(new_edges), g.root, frozenset(satisfied))


def attach_confidence(g: GsnGraph, acp_label: str, confidence: GsnGraph) -> GsnGraph:
    """Attach a confidence argument at an assurance claim point."""
    edges = g.acp_edges().get(acp_label)
    if not edges:
        raise UnknownAcp(acp_label)
    if len(edges) > 1:
        raise DuplicateAcp(acp_label)
    if acp_label in g.satisfied_acps:
        raise AcpAlreadySatisfied(acp_label)
    return merge_under(g, _anchor(g, edges[0]), confidence, acp=acp_label)


# DOT export

_SHAPES = {
    NodeKind.GOAL: 'shape=box',
    NodeKind.STRATEGY: 'shape=parallelogram',
    NodeKind.SOLUTION: 'shape=circle',
    NodeKind.CONTEXT: 'shape=box, style=rounded',
    NodeKind.JUSTIFICATION: 'shape=ellipse, xlabel="J"',
    NodeKind.ASSUMPTION: 'shape=ellipse, xlabel="A"',
}


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def to_dot(g: GsnGraph) -> str:
    violations = check_wellformed(g)
    if violations:
        raise NotWellFormed(violations)
    lines = ["digraph gsn {", "  rankdir=TB;", '  node [fontname="Helvetica", fontsize=10];']
    for n in g.nodes:
        label = f"{n.id}\n{n.statement}"
        extra = ""
        if n.has(Flag.UNDEVELOPED):
            label += "\n<>"
            extra = ", peripheries=2"
        lines.append(f"  {_quote(n.id)} [{_SHAPES[n.kind]}{extra}, label={_quote(label)}];")
    for e in g.edges:
        attrs = ["arrowhead=normal"] if e.kind == EdgeKind.SUPPORTED_BY else ["arrowhead=empty"]
        if e.acp:
            mark = "ACP" if e.acp in g.satisfied_acps else "ACP (open)"
            attrs += ["arrowtail=dot", "dir=both", "color=red", f"label={_quote(mark + ': ' + e.acp)}"]
        lines.append(f"  {_quote(e.source)} -> {_quote(e.target)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# interchange


def node_to_dict(n: GsnNode) -> dict:
    out: dict[str, Any] = {"id": n.id, "kind": n.kind.value, "statement": n.statement}
    if n.flags:
        out["flags"] = sorted(f.value for f in n.flags)
    if n.artifact:
        out["artifact"] = n.artifact
    if n.metadata:
        out["metadata"] = dict(sorted(n.metadata.items()))
    return out


def edge_to_dict(e: GsnEdge) -> dict:
    out: dict[str, Any] = {"from": e.source, "to": e.target, "kind": e.kind.value}
    if e.acp:
        out["acp"] = e.acp
    return out


def to_dict(g: GsnGraph) -> dict:
    out: dict[str, Any] = {
        "root": g.root,
        "nodes": [node_to_dict(n) for n in g.nodes],
        "edges": [edge_to_dict(e) for e in g.edges],
    }
    if g.satisfied_acps:
        out["satisfied_acps"] = sorted(g.satisfied_acps)
    if isinstance(g, GsnPattern):
        out["pattern"] = g.pattern_id
        out["roles"] = [{"name": r.name, "type": r.binding_type, "optional": r.optional} for r in g.roles]
        out["multiplicities"] = [{"from": m.source, "to": m.target, "role": m.role} for m in g.multiplicities]
        out["choices"] = [{"node": c.node, "options": list(c.options), "min": c.min, "max": c.max}
                          for c in g.choices]
    return out


def from_dict(data: Mapping[str, Any]) -> GsnGraph:
    nodes = tuple(
        GsnNode(
            id=n["id"],
            kind=NodeKind(n["kind"]),
            statement=n.get("statement", ""),
            flags=frozenset(Flag(f) for f in n.get("flags", ())),
            artifact=n.get("artifact"),
            metadata=dict(n.get("metadata", {})),
        )
        for n in data["nodes"]
    )
    edges = tuple(
        GsnEdge(e["from"], e["to"], EdgeKind(e.get("kind", "SupportedBy")), e.get("acp"))
        for e in data["edges"]
    )
    base = dict(nodes=nodes, edges=edges, root=data["root"],
                satisfied_acps=frozenset(data.get("satisfied_acps", ())))
    if "pattern" not in data:
        return GsnGraph(**base)
    return GsnPattern(
        **base,
        pattern_id=data["pattern"],
        roles=tuple(Role(r["name"], r["type"], r.get("optional", False)) for r in data.get("roles", ())),
        multiplicities=tuple(Multiplicity(m["from"], m["to"], m["role"]) for m in data.get("multiplicities", ())),
        choices=tuple(Choice(c["node"], tuple(c["options"]), c["min"], c["max"]) for c in data.get("choices", ())),
    )
