import numpy as np
import pytest

from vocstress.coupling import (
    InsufficientResponders,
    NoHRData,
    analyze_cohort,
    analyze_participant,
    classify_reactors,
    lag_scan,
    moderator_analysis,
    phase_effect,
)
from vocstress.sim import CohortSpec, Emitter, ParticipantSpec, Reactivity, simulate_cohort, simulate_participant
from vocstress.stats import DegenerateInput, InsufficientOverlap


def test_classify_reactors_paper_ranges():
    deltas = {"a": 2.2, "b": 9.4, "c": 10.6, "d": 26.4}
    classes = classify_reactors(deltas)
    assert classes == {"a": "Low", "b": "Low", "c": "High", "d": "High"}


def test_classify_reactors_tie_rule():
    assert set(classify_reactors({"a": 5.0, "b": 5.0, "c": 5.0}).values()) == {"Low"}
    # odd count: the median element goes Low
    classes = classify_reactors({"a": 1.0, "b": 2.0, "c": 3.0})
    assert classes == {"a": "Low", "b": "Low", "c": "High"}


def test_classify_reactors_needs_two():
    with pytest.raises(NoHRData):
        classify_reactors({"solo": 8.0})


def test_classify_reactors_affine_invariance(rng):
    deltas = {f"p{i}": float(v) for i, v in enumerate(rng.normal(8, 4, 11))}
    base = classify_reactors(deltas)
    scaled = classify_reactors({k: 3.5 * v + 11.0 for k, v in deltas.items()})
    assert base == scaled


def _series_with_delay(rng, n=220, k=8, sign=1.0):
    base = np.zeros(n)
    base[60:140] = 1.0
    # smooth the step so the correlation profile has a clean peak
    kernel = np.ones(5) / 5
    base = np.convolve(base, kernel, mode="same")
    x = base + rng.normal(0, 0.05, n)
    y = np.empty(n)
    y[k:] = sign * base[:-k]
    y[:k] = sign * base[0]
    y += rng.normal(0, 0.05, n)
    return x, y


def test_lag_scan_identity(rng):
    x, _ = _series_with_delay(rng)
    pc = lag_scan(x, x, n_perm=200, seed=0)
    assert pc.best_lag_s == 0.0
    assert pc.r == pytest.approx(1.0)


def test_lag_scan_planted_positive(rng):
    x, y = _series_with_delay(rng, k=8, sign=1.0)  # 40 s
    pc = lag_scan(x, y, n_perm=200, seed=1)
    assert abs(pc.best_lag_s - 40.0) <= 5.0
    assert pc.r > 0.8 and pc.p < 0.05


def test_lag_scan_planted_negative(rng):
    x, y = _series_with_delay(rng, k=12, sign=-1.0)  # 60 s
    pc = lag_scan(x, y, n_perm=200, seed=2)
    assert abs(pc.best_lag_s - 60.0) <= 5.0
    assert pc.r < -0.8 and pc.p < 0.05


def test_lag_scan_insufficient():
    with pytest.raises(InsufficientOverlap):
        lag_scan(np.arange(50.0), np.arange(50.0))


def test_participant_lag_recovery(session_p1):
    spec, record = session_p1
    pairs, delta, stress_norm, momentary = analyze_participant(record, n_perm=300, seed=0)
    assert pairs["hr"] is not None
    assert abs(pairs["hr"].best_lag_s - spec.coupling_lag_s) <= 5.0
    assert pairs["hr"].r > 0.8
    assert pairs["hr"].p < 0.05
    assert stress_norm == pytest.approx(0.73, abs=0.1)


def test_phase_effect_planted_elevation():
    records = []
    for seed in range(6):
        records.append(
            simulate_participant(
                ParticipantSpec(
                    participant_id=f"H{seed}", seed=seed, reactivity=Reactivity.HIGH,
                    emitter=Emitter.HIGH, coupling_sign=1, coupling_lag_s=40.0,
                    baseline_tvoc=400.0,
                )
            )
        )
    pe = phase_effect(records, "High")
    assert pe.anova.p < 0.01
    # arithmetic vs baseline contrast: elevated with a large effect
    row = next(r for r in pe.posthoc if r[0] == "baseline" and r[1] == "arithmetic")
    _, _, diff, p_adj, d = row
    assert diff > 0.4 and p_adj < 0.05 and d > 0.8
    assert len(pe.posthoc) == 21  # all pairs of the 7 levels


def test_phase_effect_constant_degenerate():
    records = [
        simulate_participant(
            ParticipantSpec(participant_id=f"N{seed}", seed=seed, coupling_sign=0,
                            noise=__import__("vocstress.sim", fromlist=["NoiseLevels"]).NoiseLevels(tvoc_rel=0.0))
        )
        for seed in range(2)
    ]
    # zero-noise null coupling -> constant normalized TVOC -> degenerate
    with pytest.raises(DegenerateInput):
        phase_effect(records, "flat")


def test_moderator_planted_direction():
    result = simulate_cohort(
        CohortSpec(n=12, sign_pos_frac=0.5, sign_neg_frac=0.5, snr_db=14.0,
                   min_baseline_tvoc=150.0,
                   dropout={"hr": 1.0, "gsr": 1.0, "tvoc": 1.0, "gas320": 1.0}),
        seed=21,
    )
    report = analyze_cohort(result.sessions, n_perm=300, seed=5)
    assert report.moderator is not None
    mod = report.moderator
    assert mod.hr_test is not None
    assert mod.hr_test.p < 0.05 and mod.hr_test.effect_size > 2.0
    pos, neg = mod.sign_split
    assert pos == 6 and neg == 6
    assert mod.emitter_means["High"][0] > 0.4 > mod.emitter_means["Low"][0]


def test_moderator_insufficient():
    results = []
    with pytest.raises(InsufficientResponders):
        moderator_analysis(results)


def test_null_cohort_responder_rate():
    hits = total = 0
    for seed in range(15):
        spec = ParticipantSpec(
            participant_id=f"N{seed}", seed=seed + 1000, coupling_sign=0,
            baseline_tvoc=300.0,
        )
        record = simulate_participant(spec)
        pairs, _, _, _ = analyze_participant(record, n_perm=199, seed=seed)
        pc = pairs["hr"]
        if pc is not None:
            total += 1
            if pc.p < 0.05:
                hits += 1
    assert total >= 14
    assert hits / total <= 0.2
