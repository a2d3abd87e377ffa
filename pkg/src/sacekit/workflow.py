"""Project-level operations behind the command line."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .common import Violation, dump_json, has_content, write_text_if_changed
from .errors import ArtifactParseError, TierRequired
from .hazards import (
    ChecklistItem,
    HazardousScenario,
    SituationRow,
    render_table,
    validation_checklist,
    ww_document,
    xx_document,
)
from .odm import check_assessment_matrix, check_odm, check_rod, check_transition_model
from .project import (
    DECISIONS_FILE,
    DICTIONARY_FILE,
    OUT_DIR,
    ROD_FILE,
    TRACE_FILE,
    Project,
    load_project,
)
from .registry import (
    MANIFEST_NAME,
    ArtifactId,
    ArtifactRecord,
    ArtifactRef,
    ProjectManifest,
    Status,
    default_path,
    expected_refs,
    get_stage,
    load_manifest,
    refresh_record,
    save_manifest,
)

AI = ArtifactId

_SOURCE_STUBS = {
    DECISIONS_FILE: {"decision_points": []},
    ROD_FILE: {"rods": []},
    TRACE_FILE: {"links": []},
    DICTIONARY_FILE: {"terms": []},
}


def init_project(root: Path, name: str, tiers: int = 1) -> ProjectManifest:
    """Write a manifest and empty stubs for every expected artifact.

    Stubs are zero-byte files, which count as missing until filled in.
    Generated artifacts under ``out/`` get no stub.
    """
    root.mkdir(parents=True, exist_ok=True)
    if (root / MANIFEST_NAME).exists():
        raise FileExistsError(root / MANIFEST_NAME)
    records = []
    for ref in expected_refs(tiers):
        rel = default_path(ref.id, ref.tier)
        records.append(ArtifactRecord(ref.id, ref.tier, rel, Status.MISSING))
        if rel.startswith(f"{OUT_DIR}/"):
            continue
        p = root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        if not p.exists():
            p.touch()
    for rel, doc in _SOURCE_STUBS.items():
        p = root / rel
        if not p.exists():
            p.write_text(dump_json(doc), encoding="utf-8")
    manifest = ProjectManifest(name, tiers, records, root)
    save_manifest(manifest)
    return manifest


@dataclass
class EnumerationResult:
    rows: dict[str, list[SituationRow]]
    scenarios: list[HazardousScenario]
    written: list[Path] = field(default_factory=list)


def enumerate_project(root: Path) -> EnumerationResult:
    """Regenerate out/WW.json, out/WW.txt and out/XX.json from decisions.json."""
    proj = load_project(root)
    if proj.decisions is None:
        raise ArtifactParseError(root / DECISIONS_FILE, "no decision points to enumerate")
    rows: dict[str, list[SituationRow]] = {}
    scenarios: list[HazardousScenario] = []
    tables = []
    models = sorted(proj.decisions, key=lambda m: m.point.id)
    for m in models:
        r, s = m.analyse()
        rows[m.point.id] = r
        scenarios += s
        tables.append(render_table(m.point, r))
    ww = proj.manifest.path_of(AI.WW)
    xx = proj.manifest.path_of(AI.XX)
    txt = ww.with_suffix(".txt")
    for p in (ww, xx):
        p.parent.mkdir(parents=True, exist_ok=True)
    write_text_if_changed(ww, dump_json(ww_document(models, rows)))
    write_text_if_changed(xx, dump_json(xx_document(scenarios)))
    write_text_if_changed(txt, "\n".join(tables))
    return EnumerationResult(rows, scenarios, [ww, txt, xx])


def hazard_checklist(proj: Project) -> list[ChecklistItem]:
    models = proj.decisions or []
    rows = {}
    for m in models:
        rows[m.point.id] = m.analyse()[0]
    paths = proj.odm.paths() if proj.odm else []
    return validation_checklist(models, rows, proj.hazardous or [], (proj.scenarios or {}).keys(), paths)


def odm_violations(proj: Project) -> list[Violation]:
    out = []
    if proj.odm is not None:
        out += check_odm(proj.odm)
        for rod in proj.rods or ():
            out += check_rod(proj.odm, rod, proj.capabilities)
    if proj.transition_model is not None:
        out += check_transition_model(proj.transition_model)
    if proj.assessment is not None:
        out += check_assessment_matrix(proj.assessment)
    return sorted(out)


def stage_problems(proj: Project, stage: int) -> list[str]:
    """Checks that must pass before a stage's outputs may be marked validated."""
    if stage == 1 and proj.odm is not None:
        return [str(v) for v in check_odm(proj.odm)]
    if stage == 2:
        return [f"{item.check}: {f}" for item in hazard_checklist(proj) for f in item.failures]
    if stage == 3 and proj.odm is not None:
        return [str(v) for rod in proj.rods or () for v in check_rod(proj.odm, rod, proj.capabilities)]
    if stage == 7:
        out = []
        if proj.transition_model is not None:
            out += [str(v) for v in check_transition_model(proj.transition_model)]
        if proj.assessment is not None:
            out += [str(v) for v in check_assessment_matrix(proj.assessment)]
        return out
    return []


@dataclass
class ValidationOutcome:
    validated: list[ArtifactRef]
    missing: list[ArtifactRef]
    problems: list[str]

    @property
    def ok(self) -> bool:
        return not self.missing and not self.problems


def now_iso() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


def validate_stage(root: Path, stage: int, tier: int | None = None, *, when: str | None = None) -> ValidationOutcome:
    """Mark a stage's outputs Validated once they exist and its checks pass."""
    spec = get_stage(stage)
    if spec.tiered and tier is None:
        raise TierRequired(stage)
    if not spec.tiered:
        tier = None
    proj = load_project(root)
    manifest = proj.manifest
    refs = [ArtifactRef(a, tier if a.tiered else None) for a in sorted(spec.outputs, key=lambda a: a.order)]
    missing = [r for r in refs if not proj.present(r.id, r.tier)]
    problems = stage_problems(proj, stage)
    if missing or problems:
        return ValidationOutcome([], missing, problems)
    when = when or now_iso()
    for r in refs:
        rec = manifest.record(r.id, r.tier) or ArtifactRecord(r.id, r.tier, default_path(r.id, r.tier), Status.DRAFT)
        manifest.upsert(refresh_record(manifest, rec, validated_at=when))
    save_manifest(manifest)
    return ValidationOutcome(refs, [], [])


def refresh_all(root: Path, *, validated_at: str | None = None) -> ProjectManifest:
    """Record checksums for every expected artifact, optionally validating all present ones."""
    manifest = load_manifest(root)
    for ref in expected_refs(manifest.tiers):
        rec = manifest.record(ref.id, ref.tier) or ArtifactRecord(
            ref.id, ref.tier, default_path(ref.id, ref.tier), Status.MISSING)
        present = has_content(root / rec.path)
        manifest.upsert(refresh_record(manifest, rec, validated_at=validated_at if present else None))
    save_manifest(manifest)
    return manifest
