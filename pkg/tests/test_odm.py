import pytest

from sacekit.errors import ArtifactParseError, MisalignedTrace
from sacekit.odm import (
    AssessmentCell,
    AssessmentMatrix,
    BoundaryRecognizerSpec,
    Categorical,
    Narrowing,
    Numeric,
    OdmFeature,
    OdmModel,
    OdmState,
    RecognitionCase,
    RecognitionFailure,
    RodConstraint,
    Sample,
    Transition,
    TransitionModel,
    TruthSample,
    check_assessment_matrix,
    check_odm,
    check_rod,
    check_transition_model,
    evaluate_trace,
    load_trace_csv,
    odm_from_dict,
    recognizer_from_dict,
)

VEHICLE = OdmModel((
    OdmFeature("speed", Numeric(0, 40, "km/h"), granularity_rationale="speed bands"),
    OdmFeature("weather", children=(
        OdmFeature("rain", Categorical(("none", "light", "heavy")), granularity_rationale="wiper settings"),
    )),
))


def codes(vs):
    return [v.code for v in vs]


def test_paths():
    assert VEHICLE.paths() == ["speed", "weather", "weather/rain"]
    assert VEHICLE.leaf_paths() == ["speed", "weather/rain"]
    assert VEHICLE.feature("weather/rain").domain.values[0] == "none"


def test_check_odm_clean():
    assert check_odm(VEHICLE) == []


def test_check_odm_problems():
    bad = OdmModel((
        OdmFeature("a", Numeric(5, 5), granularity_rationale="r"),
        OdmFeature("a", Categorical(()), granularity_rationale="r"),
        OdmFeature("b"),
    ))
    assert codes(check_odm(bad)) == ["ODM001", "ODM002", "ODM002", "ODM003", "ODM004"]


def test_odm_from_dict():
    odm = odm_from_dict({"features": [{"name": "speed", "kind": "numeric", "min": 0, "max": 40,
                                       "granularity_rationale": "r"}]})
    assert odm.features[0].domain == Numeric(0.0, 40.0)


def rod(*narrowings, caps=()):
    return RodConstraint("ROD-1", "sensor degraded", tuple(narrowings), tuple(caps))


def test_rod_low_speed():
    assert check_rod(VEHICLE, rod(Narrowing("speed", Numeric(0, 10)))) == []


def test_rod_equal_is_not_strict():
    assert codes(check_rod(VEHICLE, rod(Narrowing("speed", Numeric(0, 40))))) == ["ROD002"]


def test_rod_unknown_feature():
    assert codes(check_rod(VEHICLE, rod(Narrowing("fog_density", Numeric(0, 1))))) == ["ROD001"]


def test_rod_kind_mismatch_and_widening():
    vs = check_rod(VEHICLE, rod(Narrowing("speed", Categorical(("slow",))),
                                Narrowing("weather/rain", Categorical(("none", "hail")))))
    assert codes(vs) == ["ROD002", "ROD002"]


def test_rod_empty_and_capabilities():
    assert codes(check_rod(VEHICLE, rod())) == ["ROD003"]
    assert check_rod(VEHICLE, rod(caps=("CAP-1",)), ["CAP-1"]) == []
    assert codes(check_rod(VEHICLE, rod(caps=("CAP-9",)), ["CAP-1"])) == ["ROD004"]


ALL_STATES = tuple(s.value for s in OdmState)


def test_transition_model_complete():
    ts = tuple(Transition(a, b, assessed_unsafe_modes=("late handover",))
               for a in ALL_STATES for b in ALL_STATES if a != b)
    assert check_transition_model(TransitionModel(ALL_STATES, ts)) == []


def test_transition_model_missing_state():
    states = ALL_STATES[:3]
    ts = tuple(Transition(a, b, assessed_safe=True) for a in states for b in states if a != b)
    assert codes(check_transition_model(TransitionModel(states, ts))) == ["TM001"]


def test_ship_channel_narrows():
    ts = (
        Transition("InOdm-Autonomous", "OutOdm-Autonomous", "channel narrows"),
        Transition("OutOdm-Autonomous", "OutOdm-NonAutonomous", "crew takes over"),
        Transition("OutOdm-NonAutonomous", "InOdm-NonAutonomous", "re-enter", assessed_safe=True),
        Transition("InOdm-NonAutonomous", "InOdm-Autonomous", "autonomy engaged"),
    )
    vs = check_transition_model(TransitionModel(ALL_STATES, ts))
    assert [(v.code, v.locus) for v in vs] == [("TM002", "InOdm-Autonomous->OutOdm-Autonomous")]


def test_transition_model_other_codes():
    ts = (Transition("InOdm-Autonomous", "InOdm-NonAutonomous"),
          Transition("InOdm-Autonomous", "InOdm-NonAutonomous"),
          Transition("InOdm-Autonomous", "Docked"))
    found = set(codes(check_transition_model(TransitionModel(ALL_STATES, ts))))
    assert found == {"TM003", "TM004", "TM005"}


def full_matrix(**override):
    cells = {(c, f): AssessmentCell(False, rationale="benign") for c in RecognitionCase for f in RecognitionFailure}
    cells.update(override)
    return AssessmentMatrix(cells)


def test_matrix_complete():
    m = full_matrix(**{})
    m.cells[RecognitionCase.CROSSING, RecognitionFailure.TIMELINESS] = AssessmentCell(True, "MRS-1")
    assert check_assessment_matrix(m) == []


def test_matrix_missing_cell():
    m = full_matrix()
    del m.cells[RecognitionCase.RE_ENTERING, RecognitionFailure.HYSTERESIS]
    assert codes(check_assessment_matrix(m)) == ["BA001"]


def test_matrix_unmitigated_hazard():
    m = full_matrix()
    m.cells[RecognitionCase.CROSSING, RecognitionFailure.ACCURACY] = AssessmentCell(True, "")
    vs = check_assessment_matrix(m)
    assert [(v.code, v.locus) for v in vs] == [("BA002", "CrossingxAccuracy")]


# recognizer


def run(values, truth, **kw):
    spec = BoundaryRecognizerSpec("f", kw.pop("threshold", 0.5), **kw)
    ts = [Sample(float(k), v) for k, v in enumerate(values)]
    gs = [TruthSample(float(k), t) for k, t in enumerate(truth)]
    return evaluate_trace(spec, ts, gs)


def test_constant_inside():
    m = run([0.1] * 20, [True] * 20)
    assert m.declarations == () and m.detections == () and m.flip_flops == 0
    assert m.false_negatives == () and m.false_positives == ()


def test_worked_example():
    m = run([0.1, 0.2, 0.9, 0.9, 0.2, 0.1], [True, True, False, False, True, True],
            debounce_in=2, debounce_out=2)
    assert [(d.index, d.inside, d.latency) for d in m.detections] == [(3, False, 1), (5, True, 1)]
    assert m.false_positives == () and m.false_negatives == ()
    assert m.first_outside() == 3


def test_alternating():
    values = [0.9 if k % 2 else 0.1 for k in range(20)]
    truth = [True] * 20
    assert run(values, truth, debounce_in=1, debounce_out=1).flip_flops > 0
    slow = run(values, truth, debounce_in=3, debounce_out=3)
    assert slow.declarations == () and slow.detections == ()


def test_margin_detects_earlier():
    values = [0.1, 0.3, 0.42, 0.46, 0.6, 0.7]
    truth = [True, True, True, True, False, False]
    assert run(values, truth).first_outside() == 4
    early = run(values, truth, margin=0.1)
    assert early.first_outside() == 2
    assert early.false_positives == (2,)


def test_missed_and_late():
    m = run([0.1, 0.9, 0.9, 0.9, 0.9, 0.9], [True, False, False, False, False, False],
            debounce_out=4, max_latency=2)
    assert [(d.latency, d.late) for d in m.detections] == [(3, True)]
    m = run([0.1, 0.1, 0.1], [True, False, False])
    assert m.false_negatives == (1,)


def test_early_declaration_is_not_missed():
    m = run([0.1, 0.9, 0.9, 0.9], [True, True, False, False])
    assert m.false_negatives == () and m.false_positives == (1,)


def test_level():
    spec = BoundaryRecognizerSpec("f", 0.5, margin=0.1, span=2.0)
    assert spec.level == pytest.approx(0.3)


@pytest.mark.parametrize("kw", [dict(margin=-0.1), dict(span=0), dict(debounce_in=0), dict(debounce_out=0)])
def test_spec_invariants(kw):
    with pytest.raises(ValueError):
        BoundaryRecognizerSpec("f", 0.5, **kw)


def test_recognizer_from_dict():
    spec = recognizer_from_dict({"proxy": {"feature": "rain", "sensor": "wiper", "margin": 0.2, "span": 3},
                                 "threshold": 2, "debounce_in": 3, "debounce_out": 2, "max_latency": 4})
    assert spec == BoundaryRecognizerSpec("rain", 2.0, 3, 2, 0.2, 3.0, 4, "wiper")


@pytest.mark.parametrize("trace, truth", [
    ([], []),
    ([Sample(0, 0.1)], [TruthSample(0, True), TruthSample(1, True)]),
    ([Sample(0, 0.1), Sample(1, 0.2)], [TruthSample(0, True), TruthSample(2, True)]),
    ([Sample(1, 0.1), Sample(0, 0.2)], [TruthSample(1, True), TruthSample(0, True)]),
    ([Sample(0, float("nan"))], [TruthSample(0, True)]),
])
def test_misaligned(trace, truth):
    with pytest.raises(MisalignedTrace):
        evaluate_trace(BoundaryRecognizerSpec("f", 0.5), trace, truth)


def test_load_trace_csv(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("t,value,truth_inside\n0,0.1,true\n1,0.9,0\n")
    trace, truth = load_trace_csv(p)
    assert trace == [Sample(0.0, 0.1), Sample(1.0, 0.9)]
    assert [g.inside for g in truth] == [True, False]


@pytest.mark.parametrize("text", ["value,t\n0.1,0\n", "t,value,truth_inside\n0,x,true\n",
                                  "t,value,truth_inside\n0,0.1,maybe\n"])
def test_load_trace_csv_errors(tmp_path, text):
    p = tmp_path / "t.csv"
    p.write_text(text)
    with pytest.raises(ArtifactParseError):
        load_trace_csv(p)


def test_load_trace_csv_missing(tmp_path):
    with pytest.raises(ArtifactParseError):
        load_trace_csv(tmp_path / "nope.csv")
