"""Plain-text report tables with a fixed layout (diff-able golden files)."""

from __future__ import annotations

from typing import Optional

from .coupling import CouplingReport, PhaseEffect
from .learn.cv import EvalReport
from .attribution.fusion import AttributionReport
from .stats import TestResult


def fmt_p(p: float) -> str:
    """APA-style p: 'p < .001' below a millionth of slack, else 'p = .xxx'."""
    if p < 0.001:
        return "p < .001"
    return f"p = {p:.3f}".replace("0.", ".", 1) if p < 1 else "p = 1.000"


def fmt_r3(x: float) -> str:
    s = f"{x:.3f}"
    return s.replace("0.", ".", 1) if abs(x) < 1 else s


def _rule(width: int = 72) -> str:
    return "-" * width


def render_test(label: str, res: Optional[TestResult], stat_name: str = "t") -> str:
    if res is None:
        return f"{label}: not computable"
    df = res.df
    if isinstance(df, tuple):
        df_s = f"({df[0]:.0f},{df[1]:.0f})"
    elif df is None:
        df_s = ""
    else:
        df_s = f"({df:.0f})"
    parts = [f"{label}: {stat_name}{df_s} = {res.statistic:.2f}, {fmt_p(res.p)}"]
    if res.effect_size is not None:
        parts.append(f"d = {res.effect_size:.2f}")
    return ", ".join(parts)


def render_manipulation(report: CouplingReport) -> str:
    m = report.manipulation
    lines = ["MANIPULATION CHECK", _rule()]
    if m.get("hr_means"):
        b, s = m["hr_means"]
        sds = m.get("hr_sds") or (float("nan"), float("nan"))
        lines.append(
            f"Heart rate: baseline {b:.1f} bpm (SD {sds[0]:.1f}) -> stress {s:.1f} bpm (SD {sds[1]:.1f})"
        )
        lines.append("  " + render_test(f"paired t (n={m['hr_n']})", m.get("hr_test")))
    else:
        lines.append("Heart rate: no data")
    if m.get("gsr_means"):
        b, s = m["gsr_means"]
        delta = 100.0 * (s - b) / b if b else float("nan")
        lines.append(f"Skin conductance: baseline {b:.0f} au -> stress {s:.0f} au ({delta:+.0f}%)")
        lines.append("  " + render_test(f"paired t (n={m['gsr_n']})", m.get("gsr_test")))
    else:
        lines.append("Skin conductance: no data")
    return "\n".join(lines) + "\n"


def _render_phase_effect(pe: PhaseEffect) -> list[str]:
    lines = [
        render_test(
            f"{pe.group} reactors (n={pe.n}) phase effect", pe.anova, stat_name="F"
        )
    ]
    lines.append("  post-hoc (Bonferroni, m=21): level_a vs level_b  mean_diff  p_adj  d")
    for a, b, diff, p_adj, d in pe.posthoc:
        marker = " *" if p_adj < 0.05 else ""
        lines.append(
            f"    {a:<10} vs {b:<10} {diff:+8.3f}  {fmt_r3(p_adj):>6}  {d:+.2f}{marker}"
        )
    return lines


def render_coupling(report: CouplingReport) -> str:
    lines = ["PHYSIOLOGY-VOC COUPLING", _rule()]
    lines.append("Responder rates (significant lagged correlation at alpha = .05):")
    labels = {"hr": "HR -> TVOC", "gsr": "GSR -> TVOC", "resp": "RR -> TVOC"}
    for pair, (k, n) in report.responder_rates.items():
        pct = 100.0 * k / n if n else 0.0
        lines.append(f"  {labels[pair]:<12} {k:>2}/{n:<2} ({pct:.0f}%)")
    k, n = report.overall_responders
    pct = 100.0 * k / n if n else 0.0
    lines.append(f"  any pair     {k:>2}/{n:<2} ({pct:.0f}%)")
    lines.append("")
    lines.append("Per-participant couplings:")
    lines.append("  id      reactor emitter responder sign  pair    lag_s      r        p")
    for res in report.results:
        first = True
        for pair in ("hr", "gsr", "resp"):
            pc = res.pairs.get(pair)
            if pc is None:
                continue
            head = (
                f"  {res.participant:<7} {res.reactor_class or '-':<7} "
                f"{res.emitter_class or '-':<7} {'yes' if res.responder else 'no':<9} "
                f"{res.coupling_sign if res.coupling_sign is not None else 0:+d}   "
                if first
                else " " * 41
            )
            lines.append(
                head + f"{pair:<6} {pc.best_lag_s:5.0f}  {pc.r:+.3f}  {fmt_r3(pc.p):>6}"
            )
            first = False
    lines.append("")
    if report.moderator is not None:
        mod = report.moderator
        lines.append("Moderator analysis (High vs Low emitters among responders):")
        for name, (mean, sd, n) in mod.emitter_means.items():
            lines.append(f"  {name} emitters: stress TVOC_norm {mean:.2f} (SD {sd:.2f}), n = {n}")
        lines.append("  " + render_test("HR coupling r, High vs Low", mod.hr_test))
        lines.append("  " + render_test("RR coupling r, High vs Low", mod.resp_test))
        pos, neg = mod.sign_split
        lines.append(f"  coupling direction split: {pos} positive / {neg} negative")
        if mod.cv_abs_r_pct is not None:
            lines.append(f"  CV of |r| across responders: {mod.cv_abs_r_pct:.0f}%")
    else:
        lines.append("Moderator analysis: insufficient responders per emitter class")
    lines.append("")
    high_rs = [
        r.momentary_r
        for r in report.results
        if r.reactor_class == "High" and r.momentary_r is not None
    ]
    if high_rs:
        mean_r = sum(high_rs) / len(high_rs)
        lines.append(
            f"Momentary (lag 0) HR-TVOC correlation, High reactors: mean r = {fmt_r3(mean_r)} "
            f"(n = {len(high_rs)})"
        )
        lines.append("")
    lines.append("Phase effect on normalized TVOC by reactor group:")
    for pe in report.phase_effects:
        lines.extend(_render_phase_effect(pe))
    return "\n".join(lines) + "\n"


def render_eval_table(reports: list[EvalReport], title: str) -> str:
    lines = [title, _rule()]
    lines.append(f"{'Model':<14} {'Accuracy':>9} {'SD':>6} {'Precision':>10} {'Recall':>7} {'F1':>6} {'SD':>6} {'AUC':>6}")
    names = {"rf": "Random Forest", "svm_rbf": "SVM (RBF)", "svm_linear": "SVM (Linear)"}
    for rep in reports:
        acc, acc_sd = rep.mean_sd("acc")
        prec, _ = rep.mean_sd("prec")
        rec, _ = rep.mean_sd("rec")
        f1, f1_sd = rep.mean_sd("f1")
        auc, _ = rep.mean_sd("auc")
        lines.append(
            f"{names.get(rep.model_kind, rep.model_kind):<14} {fmt_r3(acc):>9} {fmt_r3(acc_sd):>6} "
            f"{fmt_r3(prec):>10} {fmt_r3(rec):>7} {fmt_r3(f1):>6} {fmt_r3(f1_sd):>6} {fmt_r3(auc):>6}"
        )
    n = reports[0].n_samples if reports else 0
    lines.append(f"Note: SD across folds. N = {n} windows.")
    return "\n".join(lines) + "\n"


def render_loso_table(rep: EvalReport) -> str:
    lines = ["LEAVE-ONE-SUBJECT-OUT CROSS-VALIDATION", _rule()]
    acc, _ = rep.mean_sd("acc")
    f1, _ = rep.mean_sd("f1")
    lo, hi = rep.loso_range()
    lines.append(f"{'Overall Accuracy':<28} {fmt_r3(acc)}")
    lines.append(f"{'Overall F1-Score':<28} {fmt_r3(f1)}")
    lines.append(f"{'Min Accuracy (Participant)':<28} {fmt_r3(lo)}")
    lines.append(f"{'Max Accuracy (Participant)':<28} {fmt_r3(hi)}")
    lines.append(f"{'Participants (n)':<28} {len(rep.folds)}")
    lines.append("Note: each participant served once as the test set.")
    return "\n".join(lines) + "\n"


def render_fusion(report: AttributionReport) -> str:
    lines = ["MULTIMODAL FUSION", _rule()]
    lines.append(f"{'Modality':<20} {'N':>3} {'Accuracy':>9} {'F1':>6} {'AUC':>6}")
    for row in report.fusion:
        lines.append(
            f"{row.modality:<20} {row.n_features:>3} {fmt_r3(row.acc):>9} {fmt_r3(row.f1):>6} {fmt_r3(row.auc):>6}"
        )
    best = max((r.acc for r in report.fusion[:-1]), default=float("nan"))
    rel = 100.0 * report.improvement / best if best else float("nan")
    lines.append(
        f"Note: improvement = {report.improvement:+.3f} accuracy ({rel:+.1f}%) vs best unimodal."
    )
    return "\n".join(lines) + "\n"


def render_attribution(report: AttributionReport) -> str:
    lines = ["FEATURE IMPORTANCE BY MODALITY (Shapley)", _rule()]
    lines.append(f"{'Modality':<9} {'Total':>7} {'Share':>7}  Top features")
    for mod in ("HR", "VOC", "GSR"):
        top = "  ".join(f"{n} ({fmt_r3(v)})" for n, v in report.top_features[mod])
        lines.append(
            f"{mod:<9} {fmt_r3(report.three_way_totals[mod]):>7} {report.three_way_pct[mod]:>6.1f}%  {top}"
        )
    lines.append("Four-way totals: " + "  ".join(
        f"{m}={fmt_r3(v)}" for m, v in report.four_way_totals.items()
    ))
    lines.append("Note: mean absolute Shapley value aggregated across all windows.")
    return "\n".join(lines) + "\n"
