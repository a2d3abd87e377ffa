"""Exception hierarchy shared by every sacekit module."""

from __future__ import annotations


class SaceError(Exception):
    """Base class for all toolkit errors."""


# registry


class UnknownStage(SaceError, ValueError):
    def __init__(self, stage: object):
        super().__init__(f"unknown stage {stage!r}; expected 1..8")
        self.stage = stage


class TierRequired(SaceError, ValueError):
    def __init__(self, stage: int):
        super().__init__(f"stage {stage} consumes tier-indexed inputs; a tier is required")
        self.stage = stage


class NotAnOutput(SaceError, ValueError):
    def __init__(self, artifact: object):
        super().__init__(f"{artifact} is not produced by any stage")
        self.artifact = artifact


class ArtifactParseError(SaceError):
    """A project file exists but cannot be read as the expected document."""

    def __init__(self, path: object, detail: str):
        super().__init__(f"{path}: {detail}")
        self.path = path
        self.detail = detail


# gsn


class NotWellFormed(SaceError):
    def __init__(self, violations: list):
        codes = ", ".join(sorted({v.code for v in violations}))
        super().__init__(f"graph is not well-formed ({codes})")
        self.violations = list(violations)


class UnknownAcp(SaceError, KeyError):
    def __init__(self, label: str):
        super().__init__(label)
        self.label = label

    def __str__(self) -> str:
        return f"no assurance claim point labelled {self.label!r}"


class DuplicateAcp(SaceError, ValueError):
    def __init__(self, label: str):
        super().__init__(f"assurance claim point {label!r} labels more than one edge")
        self.label = label


class AcpAlreadySatisfied(SaceError, ValueError):
    def __init__(self, label: str):
        super().__init__(f"assurance claim point {label!r} already has a confidence argument")
        self.label = label


class NodeIdCollision(SaceError, ValueError):
    def __init__(self, node_id: str):
        super().__init__(f"node id {node_id!r} exists in both graphs")
        self.node_id = node_id


# instantiation


class BindingError(SaceError):
    """Base for binding problems detected during instantiation."""


class MissingRole(BindingError):
    def __init__(self, role: str):
        super().__init__(f"binding does not supply role {role!r}")
        self.role = role


class UnexpectedRole(BindingError):
    def __init__(self, role: str):
        super().__init__(f"binding supplies {role!r}, which the pattern does not declare")
        self.role = role


class RoleTypeMismatch(BindingError):
    def __init__(self, role: str, expected: str):
        super().__init__(f"role {role!r} must be bound to a {expected}")
        self.role = role
        self.expected = expected


class ChoiceCardinality(BindingError):
    def __init__(self, node_id: str, selected: int, lo: int, hi: int):
        super().__init__(f"choice at {node_id} selects {selected} option(s); allowed {lo}..{hi}")
        self.node_id = node_id
        self.selected = selected


class EmptyCollection(BindingError):
    def __init__(self, role: str):
        super().__init__(f"collection role {role!r} is empty but its branch is mandatory")
        self.role = role


class DanglingRequirement(BindingError):
    def __init__(self, requirement: str, tier: int):
        super().__init__(
            f"tier {tier} requirement {requirement!r} has neither evidence nor a child decomposition"
        )
        self.requirement = requirement
        self.tier = tier


class UnknownParent(BindingError):
    def __init__(self, requirement: str, tier: int, parent: str | None):
        what = f"unknown parent {parent!r}" if parent else "no parent"
        super().__init__(f"tier {tier} requirement {requirement!r} has {what}")
        self.requirement = requirement
        self.tier = tier
        self.parent = parent


class MissingSubArgument(SaceError):
    def __init__(self, pattern: object, detail: str = ""):
        msg = f"sub-argument for pattern {pattern} is not available"
        super().__init__(msg + (f": {detail}" if detail else ""))
        self.pattern = pattern


# requirements language


class RequirementSyntaxError(SaceError, ValueError):
    """Base for structured-requirement parse failures."""


class NoShall(RequirementSyntaxError):
    pass


class NoSystemName(RequirementSyntaxError):
    pass


class DanglingIf(RequirementSyntaxError):
    pass


class EmptyResponse(RequirementSyntaxError):
    pass


# hazard enumeration


class InvalidDecisionPoint(SaceError, ValueError):
    pass


class UncoveredRows(SaceError):
    def __init__(self, rows: list):
        super().__init__(f"{len(rows)} situation row(s) match no classification rule")
        self.rows = list(rows)


# odm


class MisalignedTrace(SaceError, ValueError):
    pass
