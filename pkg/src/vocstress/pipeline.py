"""End-to-end reproduction run: cohort -> features -> CV -> coupling ->
attribution, emitting every report table plus a pass/fail check list.

The run is deterministic for a given seed: report bytes are identical across
re-runs and independent of the --threads setting (stages execute in a fixed
order regardless of the worker budget).
"""

from __future__ import annotations

import os

import numpy as np

from .attribution.fusion import full_attribution
from .core import validate_session, write_archive
from .coupling import analyze_cohort
from .features import FEATURE_NAMES, build_dataset, save_dataset_csv
from .learn import ModelSpec, evaluate
from .reporting import (
    render_attribution,
    render_coupling,
    render_eval_table,
    render_fusion,
    render_loso_table,
    render_manipulation,
)
from .sim import CohortSpec, simulate_cohort
from .sim.cohort import build_specs


class CheckFailure(AssertionError):
    pass


def _default_spec(config: dict[str, str]) -> CohortSpec:
    kwargs = dict(
        n=24,
        sign_pos_frac=0.5,
        sign_neg_frac=0.5,
        snr_db=12.0,
        min_baseline_tvoc=120.0,
        hr_noise_bpm=3.0,
        gsr_noise_rel=0.10,
        resp_delta=-2.0,
        dropout={"hr": 1.0, "gsr": 1.0, "tvoc": 1.0, "gas320": 1.0},
    )
    casts = {
        "n": int,
        "high_reactor_frac": float,
        "sign_pos_frac": float,
        "sign_neg_frac": float,
        "snr_db": float,
        "min_baseline_tvoc": float,
        "hr_noise_bpm": float,
        "gsr_noise_rel": float,
        "resp_delta": float,
    }
    for key, cast in casts.items():
        if key in config:
            kwargs[key] = cast(config[key])
    return CohortSpec(**kwargs)


def reproduce(out_dir: str, seed: int = 42, config: dict[str, str] | None = None, threads: int = 1) -> bool:
    """Run the whole workbench; returns True iff every embedded check passes."""
    config = config or {}
    os.makedirs(out_dir, exist_ok=True)
    session_dir = os.path.join(out_dir, "sessions")
    os.makedirs(session_dir, exist_ok=True)
    checks: list[tuple[str, bool, str]] = []

    def check(name: str, ok: bool, detail: str = "") -> None:
        checks.append((name, bool(ok), detail))

    spec = _default_spec(config)
    cohort = simulate_cohort(spec, seed)
    specs = cohort.specs
    sessions = cohort.sessions

    violations = []
    for s in sessions:
        violations.extend(validate_session(s))
        write_archive(s, os.path.join(session_dir, f"session_{s.meta.id}.txt"))
    check("archives-valid", not violations, f"{len(violations)} violations")

    dataset = build_dataset(sessions)
    save_dataset_csv(dataset, os.path.join(out_dir, "dataset.csv"))
    check(
        "feature-vector-length",
        dataset.X_raw.shape[1] == len(FEATURE_NAMES) == 22,
        f"{dataset.X_raw.shape[1]} columns",
    )
    check("labels-partition", set(np.unique(dataset.y)) <= {0, 1}, "")
    check("imputation-complete", not np.isnan(dataset.X).any(), "")

    # planted-group recovery: median split must reproduce the reactivity mix
    from .coupling import classify_reactors, analyze_participant  # noqa: F401

    deltas = {}
    hr_by_id = {}
    for s, ps in zip(sessions, specs):
        from .ingest import align

        streams = align(s.frames, s.markers)
        end = s.marker_time("SESSION_END") or s.frames[-1].timestamp + 1
        from .coupling import hr_stress_delta

        d = hr_stress_delta(streams, s.markers, end)
        if d is not None:
            deltas[s.meta.id] = d
            hr_by_id[s.meta.id] = ps.reactivity.value
    classes = classify_reactors(deltas)
    agree = sum(1 for pid, cls in classes.items() if cls == hr_by_id[pid])
    check("reactor-recovery", agree == len(classes), f"{agree}/{len(classes)}")

    coupling_report = analyze_cohort(sessions, n_perm=500, seed=seed)
    with open(os.path.join(out_dir, "coupling_report.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_manipulation(coupling_report) + "\n" + render_coupling(coupling_report))

    # planted sign is defined on the HR pair (respiration legitimately flips
    # when breathing slows under stress)
    truth_sign = {p.participant_id: p.coupling_sign for p in specs}
    sign_hits, sign_total = 0, 0
    for res in coupling_report.results:
        expected = truth_sign[res.participant]
        pc = res.pairs.get("hr")
        if expected == 0 or pc is None or pc.p >= 0.05:
            continue
        sign_total += 1
        if (1 if pc.r > 0 else -1) == expected:
            sign_hits += 1
    check(
        "coupling-sign-recovery",
        sign_total > 0 and sign_hits >= 0.9 * sign_total,
        f"{sign_hits}/{sign_total}",
    )

    emitter_truth = {p.participant_id: p for p in specs}
    emitter_ok = True
    for res in coupling_report.results:
        p = emitter_truth[res.participant]
        if p.coupling_sign == 1 and res.stress_tvoc_norm_mean is not None:
            target = 0.73 if p.emitter.value == "High" else 0.06
            if abs(res.stress_tvoc_norm_mean - target) > 0.1:
                emitter_ok = False
    check("emitter-target-band", emitter_ok, "")

    kfold_reports = []
    for kind in ("rf", "svm_rbf", "svm_linear"):
        kfold_reports.append(evaluate(ModelSpec(kind=kind), dataset, "kfold", seed=seed))
    with open(os.path.join(out_dir, "classification_kfold.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_eval_table(kfold_reports, "CLASSIFICATION PERFORMANCE (STRATIFIED 5-FOLD)"))
    check(
        "kfold-metrics-in-range",
        all(0.0 <= r.mean_sd("acc")[0] <= 1.0 for r in kfold_reports),
        "",
    )

    loso_report = evaluate(ModelSpec(kind="rf"), dataset, "loso", seed=seed)
    with open(os.path.join(out_dir, "classification_loso.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_loso_table(loso_report))

    attr = full_attribution(dataset, seed=seed)
    with open(os.path.join(out_dir, "fusion_attribution.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_fusion(attr) + "\n" + render_attribution(attr))
    check(
        "modality-shares-sum-100",
        abs(sum(attr.three_way_pct.values()) - 100.0) <= 0.1,
        f"{sum(attr.three_way_pct.values()):.3f}",
    )

    # Shapley local accuracy on a sample of rows
    from .attribution import shap_matrix
    from .learn.models import train

    model = train(ModelSpec(kind="rf"), dataset.X, dataset.y, seed=seed)
    probe = dataset.X[:: max(1, dataset.X.shape[0] // 50)]
    phis, base = shap_matrix(model, probe)
    residual = float(np.abs(base + phis.sum(axis=1) - model.predict_proba(probe)).max())
    check("shap-local-accuracy", residual < 1e-9, f"max residual {residual:.2e}")

    lines = ["EMBEDDED CHECKS", "-" * 72]
    for name, ok, detail in checks:
        status = "PASS" if ok else "FAIL"
        lines.append(f"{status}  {name}" + (f"  [{detail}]" if detail else ""))
    all_ok = all(ok for _, ok, _ in checks)
    lines.append("-" * 72)
    lines.append("RESULT: " + ("ALL CHECKS PASSED" if all_ok else "CHECK FAILURES PRESENT"))
    with open(os.path.join(out_dir, "checks.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    if not all_ok:
        failing = [name for name, ok, _ in checks if not ok]
        print(f"failed checks: {', '.join(failing)}")
    return all_ok
