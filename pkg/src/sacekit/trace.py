"""Trace links and safety-analysis records shared by the loader and linter."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Mapping


class LinkKind(str, enum.Enum):
    DECOMPOSES = "Decomposes"
    MITIGATES = "Mitigates"
    EVIDENCES = "Evidences"
    CONSTRAINS = "Constrains"


@dataclass(frozen=True, order=True)
class Endpoint:
    kind: str
    id: str
    tier: int | None = None

    def __str__(self) -> str:
        return f"{self.kind}:{self.id}" + (f"@{self.tier}" if self.tier is not None else "")

    @classmethod
    def parse(cls, data: Any) -> "Endpoint":
        if isinstance(data, Mapping):
            return cls(str(data["kind"]), str(data["id"]), data.get("tier"))
        kind, _, rest = str(data).partition(":")
        ident, _, tier = rest.partition("@")
        if not kind or not ident:
            raise ValueError(f"bad endpoint {data!r}")
        return cls(kind, ident, int(tier) if tier else None)


@dataclass(frozen=True)
class TraceLink:
    """A justified relationship between two project elements.

    A link without rationale is still loaded so the linter can report it.
    """

    source: Endpoint
    target: Endpoint
    kind: LinkKind
    rationale: str = ""
    origin: str = ""

    @property
    def locus(self) -> str:
        return f"{self.source}->{self.target}"


class Guideword(str, enum.Enum):
    MORE = "More"
    LESS = "Less"
    AS_WELL_AS = "AsWellAs"
    PART_OF = "PartOf"
    OTHER_THAN = "OtherThan"
    INTERMITTENT = "Intermittent"
    ERRONEOUS_BUT_CREDIBLE = "ErroneousButCredible"
    OTHER = "Other"


class MitigationForm(str, enum.Enum):
    DESIGN_CHANGE = "DesignChange"
    OPERATING_CONCEPT_LIMITATION = "OperatingConceptLimitation"
    DERIVED_REQUIREMENT = "DerivedRequirement"
    EXISTING_DESIGN_SUFFICIENT = "ExistingDesignSufficient"


@dataclass(frozen=True)
class Mitigation:
    form: MitigationForm
    target: str = ""
    justification: str = ""


@dataclass(frozen=True)
class HazardousFailureRecord:
    id: str
    tier: int
    element: str
    guideword: Guideword
    deviation: str
    hazardous: bool
    mitigations: tuple[Mitigation, ...] = ()
    guideword_text: str = ""


def failure_from_dict(data: Mapping[str, Any], tier: int) -> HazardousFailureRecord:
    return HazardousFailureRecord(
        id=str(data["id"]),
        tier=tier,
        element=str(data.get("element", "")),
        guideword=Guideword(data["guideword"]),
        deviation=str(data.get("deviation", "")),
        hazardous=bool(data.get("hazardous", False)),
        mitigations=tuple(
            Mitigation(MitigationForm(m["form"]), str(m.get("target", "")), str(m.get("justification", "")))
            for m in data.get("mitigations", ())
        ),
        guideword_text=str(data.get("guideword_text", "")),
    )


def link_from_dict(data: Mapping[str, Any], origin: str = "") -> TraceLink:
    return TraceLink(
        Endpoint.parse(data["from"]),
        Endpoint.parse(data["to"]),
        LinkKind(data["kind"]),
        str(data.get("rationale") or ""),
        origin,
    )
