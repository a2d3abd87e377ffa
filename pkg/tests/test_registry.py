import json

import pytest

from sacekit.errors import ArtifactParseError, NotAnOutput, TierRequired, UnknownStage
from sacekit.registry import (
    ALL_OUTPUTS,
    BUILTIN_PATTERNS,
    PURE_INPUTS,
    STAGES,
    TIERED,
    ArtifactId,
    ArtifactRecord,
    ArtifactRef,
    ProjectManifest,
    Status,
    get_stage,
    load_manifest,
    provenance,
    refresh_record,
    save_manifest,
    stage_readiness,
    stale_check,
)
from sacekit.workflow import init_project, refresh_all

A = ArtifactId


def test_cc_does_not_exist():
    with pytest.raises(ValueError):
        ArtifactId("CC")
    assert len(ArtifactId) == 50


def test_every_artifact_has_a_distinct_title():
    titles = [a.title for a in ArtifactId]
    assert all(titles) and len(set(titles)) == len(titles)
    assert A.B.title == "Operational Domain Model"


@pytest.mark.parametrize("n, inputs, outputs", [
    (1, "A G", "B C D E F H"),
    (2, "B E I", "WW XX YY J"),
    (7, "B FF JJ LL PP", "GG HH II KK MM NN OO QQ"),
])
def test_stage_io_constants(n, inputs, outputs):
    spec = STAGES[n]
    assert {a.value for a in spec.inputs} == set(inputs.split())
    assert {a.value for a in spec.outputs} == set(outputs.split())


def test_no_artifact_is_orphaned():
    assert ALL_OUTPUTS | PURE_INPUTS | BUILTIN_PATTERNS | {A.P} == set(ArtifactId)


def test_patterns_are_never_outputs():
    assert not (ALL_OUTPUTS & BUILTIN_PATTERNS)


@pytest.mark.parametrize("bad", [0, 9, "3", True, None])
def test_get_stage_rejects(bad):
    with pytest.raises(UnknownStage):
        get_stage(bad)


def test_record_tier_rules():
    ArtifactRecord(A.Q, 0, "q.json")
    with pytest.raises(ValueError):
        ArtifactRecord(A.Q, None, "q.json")
    with pytest.raises(ValueError):
        ArtifactRecord(A.B, 0, "odm.json")
    with pytest.raises(ValueError):
        ArtifactRecord(A.G, None, "g.json")
    with pytest.raises(ValueError):
        ArtifactRecord(A.Q, -1, "q.json")


def test_tiered_set():
    assert {a.value for a in TIERED} == set("P Q R T V W X Y Z AA BB EE".split())


def test_provenance_examples():
    xx = provenance(A.XX)
    assert {A.B, A.E, A.A, A.WW} <= xx
    assert provenance(A.H) >= {A.B, A.C, A.D, A.E, A.F}
    with pytest.raises(NotAnOutput):
        provenance(A.A)


def test_provenance_excludes_patterns_by_default():
    assert A.G not in provenance(A.H)
    assert A.G in provenance(A.H, include_builtin=True)


def test_provenance_monotone():
    for y in ALL_OUTPUTS:
        up = provenance(y, 1)
        for x in up & ALL_OUTPUTS:
            assert provenance(x, 1) <= up | {x}, (x, y)


def test_tier_zero_requirements_trace_to_soc():
    from sacekit.registry import upstream_refs
    ups = upstream_refs(A.Q, 0)
    assert ArtifactRef(A.L) in ups
    assert all(r.tier in (None, 0) for r in ups)
    assert ArtifactRef(A.Q, 0) in upstream_refs(A.Q, 1)


def _empty(tmp_path, tiers=1):
    return init_project(tmp_path / "p", "demo", tiers)


def test_readiness_empty_stage1(tmp_path):
    rep = stage_readiness(_empty(tmp_path), 1)
    assert not rep.ready and rep.missing == {"A"}
    builtin = [e for e in rep.entries if e.builtin]
    assert [e.input for e in builtin] == [A.G] and builtin[0].status == "Present"


def test_readiness_stage2_ready(tmp_path):
    m = _empty(tmp_path)
    for a in "A B C D E F".split():
        p = m.path_of(A(a))
        p.write_text("x")
    assert stage_readiness(load_manifest(m.root), 2).ready


def test_readiness_stage6_missing_w(tmp_path):
    m = _empty(tmp_path, 2)
    m.path_of(A.B).write_text("x")
    m.path_of(A.Q, 1).write_text("x")
    rep = stage_readiness(load_manifest(m.root), 6, 1)
    assert rep.missing == {"W@1"}


def test_readiness_errors(tmp_path):
    m = _empty(tmp_path)
    with pytest.raises(TierRequired):
        stage_readiness(m, 4)
    with pytest.raises(UnknownStage):
        stage_readiness(m, 0)


def test_readiness_is_side_effect_free(tmp_path):
    m = _empty(tmp_path)
    before = (m.root / "sace.json").read_bytes()
    first = [stage_readiness(m, n, 0 if STAGES[n].tiered else None) for n in STAGES]
    second = [stage_readiness(m, n, 0 if STAGES[n].tiered else None) for n in STAGES]
    assert first == second
    assert (m.root / "sace.json").read_bytes() == before


def test_zero_byte_stub_counts_as_missing(tmp_path):
    m = _empty(tmp_path)
    assert m.path_of(A.A).exists() and m.path_of(A.A).stat().st_size == 0
    assert m.status_of(A.A) == Status.MISSING
    m.path_of(A.A).write_text("concept")
    assert m.status_of(A.A) == Status.DRAFT


def test_manifest_round_trip(tmp_path):
    m = _empty(tmp_path, 2)
    again = load_manifest(m.root)
    assert again.to_dict() == m.to_dict()
    save_manifest(again)
    assert load_manifest(m.root).to_dict() == m.to_dict()


def test_manifest_parse_errors(tmp_path):
    (tmp_path / "sace.json").write_text("{not json")
    with pytest.raises(ArtifactParseError):
        load_manifest(tmp_path)
    (tmp_path / "sace.json").write_text(json.dumps({"name": "x", "artifacts": [{"id": "Q", "path": "q"}]}))
    with pytest.raises(ArtifactParseError):
        load_manifest(tmp_path)


def test_checksum_changes_with_payload(tmp_path):
    m = _empty(tmp_path)
    p = m.path_of(A.B)
    p.write_text("one")
    r1 = refresh_record(m, m.record(A.B))
    p.write_text("two")
    r2 = refresh_record(m, m.record(A.B))
    assert r1.checksum and r1.checksum != r2.checksum


def _validated_project(tmp_path):
    m = _empty(tmp_path)
    for rec in m.artifacts:
        p = m.root / rec.path
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(f"{rec.id.value}\n")
    return refresh_all(m.root, validated_at="2022-01-01T00:00:00+00:00")


def test_stale_check_clean(tmp_path):
    assert stale_check(_validated_project(tmp_path)) == []


def test_modify_b_marks_j_stale(tmp_path):
    m = _validated_project(tmp_path)
    m.path_of(A.B).write_text("changed")
    stale = {f.artifact for f in stale_check(m)}
    assert ArtifactRef(A.J) in stale
    assert ArtifactRef(A.B) not in stale


def test_modify_k_marks_o_stale(tmp_path):
    m = _validated_project(tmp_path)
    m.path_of(A.K).write_text("changed")
    stale = {f.artifact for f in stale_check(m)}
    assert ArtifactRef(A.O) in stale
    assert ArtifactRef(A.H) not in stale


def test_every_stale_finding_names_a_changed_upstream(tmp_path):
    m = _validated_project(tmp_path)
    m.path_of(A.E).write_text("changed")
    for f in stale_check(m):
        assert ArtifactRef(A.E) in f.changed_upstream


def test_pure_manifest_without_root():
    m = ProjectManifest("x")
    assert m.path_of(A.B) is None
