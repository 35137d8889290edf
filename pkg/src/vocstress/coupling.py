"""Physiology-VOC coupling analysis: reactivity groups, lag scans,
responder classification, phase-effect ANOVA and the emitter moderator test.

Sign conventions: physiological inputs are arousal-positive (heart rate in
bpm, GSR as conductance, respiration in breaths/min) and TVOC is taken raw,
so a positive lag correlation means arousal accompanies VOC elevation. The
emitter split uses the elevation-positive normalization, making the 0.4
threshold a proportional rise over baseline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .core.types import Phase, SessionRecord
from .ingest.align import AlignedStreams, align
from .preprocess import (
    baseline_stats,
    gsr_conductance,
    norm_increase,
    phase_interval_ms,
)
from .stats import (
    DegenerateInput,
    InsufficientOverlap,
    TestResult,
    bonferroni,
    coef_variation,
    independent_t,
    lagged_corr_p,
    paired_t,
    rm_anova,
)

LAG_GRID_S = 5.0
MAX_LAG_S = 120.0
ALPHA = 0.05
EMITTER_THRESHOLD = 0.4
PAIR_NAMES = ("hr", "gsr", "resp")

# Seven-level phase structure for the within-group ANOVA: the six
# marker-delimited phases plus the pooled stress block (Stroop+Arithmetic).
ANOVA_LEVELS = ("baseline", "stroop", "arithmetic", "stress", "rec1", "rec2", "rec3")


class NoHRData(ValueError):
    pass


class InsufficientResponders(ValueError):
    pass


@dataclass(frozen=True)
class PairCoupling:
    best_lag_s: float
    r: float
    p: float


@dataclass(frozen=True)
class CouplingResult:
    participant: str
    pairs: dict[str, Optional[PairCoupling]]
    responder: bool
    coupling_sign: Optional[int]  # sign of r of the most significant pair
    reactor_class: Optional[str]  # High / Low, None without HR data
    emitter_class: Optional[str]
    stress_tvoc_norm_mean: Optional[float]
    hr_delta: Optional[float]
    momentary_r: Optional[float] = None  # HR-TVOC Pearson r at lag 0
    momentary_p: Optional[float] = None

    def best_abs_r(self) -> Optional[float]:
        sig = [pc for pc in self.pairs.values() if pc is not None and pc.p < ALPHA]
        if not sig:
            return None
        return max(abs(pc.r) for pc in sig)


@dataclass(frozen=True)
class ModeratorSection:
    hr_test: Optional[TestResult]
    resp_test: Optional[TestResult]
    emitter_means: dict[str, tuple[float, float, int]]  # class -> (mean, sd, n)
    sign_split: tuple[int, int]  # (positive, negative)
    cv_abs_r_pct: Optional[float]


@dataclass(frozen=True)
class PhaseEffect:
    group: str
    n: int
    anova: TestResult
    # (level_a, level_b, mean_diff, p_adj, d) for all level pairs
    posthoc: list[tuple[str, str, float, float, float]]


@dataclass(frozen=True)
class CouplingReport:
    results: list[CouplingResult]
    responder_rates: dict[str, tuple[int, int]]  # pair -> (significant, tested)
    overall_responders: tuple[int, int]
    moderator: Optional[ModeratorSection]
    phase_effects: list[PhaseEffect]
    manipulation: dict[str, object]


def classify_reactors(deltas: dict[str, float]) -> dict[str, str]:
    """Median split on stress-minus-baseline HR change; ties fall to Low."""
    if len(deltas) < 2:
        raise NoHRData("median split needs at least two participants with HR data")
    med = float(np.median(list(deltas.values())))
    return {pid: ("High" if d > med else "Low") for pid, d in deltas.items()}


@njit(cache=True)
def _best_lag_r(x, y, n_lags, offset):
    """Max-|r| lag for y circularly shifted by offset; ties to the smaller lag.

    Returns (best_k, best_r); best_k = -1 when no lag has enough overlap.
    NaNs are skipped pairwise.
    """
    n = x.shape[0]
    best_k = -1
    best_r = 0.0
    for k in range(n_lags):
        sx = sy = sxx = syy = sxy = 0.0
        m = 0
        for i in range(n - k):
            a = x[i]
            b = y[(i + k + offset) % n]
            if a == a and b == b:
                m += 1
                sx += a
                sy += b
                sxx += a * a
                syy += b * b
                sxy += a * b
        if m < 10:
            continue
        cov = sxy - sx * sy / m
        vx = sxx - sx * sx / m
        vy = syy - sy * sy / m
        if vx <= 0.0 or vy <= 0.0:
            continue
        r = cov / np.sqrt(vx * vy)
        if best_k < 0 or abs(r) > abs(best_r) + 1e-12:
            best_r = r
            best_k = k
    return best_k, best_r


@njit(cache=True)
def _scan_perm_exceed(x, y, n_lags, shifts, threshold):
    count = 0
    for s in shifts:
        k, r = _best_lag_r(x, y, n_lags, s)
        if k >= 0 and abs(r) >= threshold - 1e-12:
            count += 1
    return count


@njit(cache=True)
def _surrogate_exceed(x, surrogates, n_lags, threshold):
    count = 0
    for j in range(surrogates.shape[0]):
        k, r = _best_lag_r(x, surrogates[j], n_lags, 0)
        if k >= 0 and abs(r) >= threshold - 1e-12:
            count += 1
    return count


def _phase_surrogates(y: np.ndarray, n_sur: int, rng: np.random.Generator) -> np.ndarray:
    """Fourier surrogates of y: same power spectrum, randomized phases.

    NaNs are filled with the series mean before the transform; the surrogates
    come back complete.
    """
    filled = y.copy()
    mask = np.isnan(filled)
    mean = float(np.nanmean(filled))
    filled[mask] = mean
    spec = np.fft.rfft(filled - mean)
    mags = np.abs(spec)
    n = filled.size
    out = np.empty((n_sur, n))
    for j in range(n_sur):
        phases = rng.uniform(0.0, 2.0 * np.pi, spec.size)
        phases[0] = 0.0
        if n % 2 == 0:
            phases[-1] = 0.0 if rng.random() < 0.5 else np.pi
        out[j] = np.fft.irfft(mags * np.exp(1j * phases), n) + mean
    return np.ascontiguousarray(out)


def lag_scan(
    physio: np.ndarray,
    tvoc: np.ndarray,
    *,
    dt_s: float = LAG_GRID_S,
    max_lag_s: float = MAX_LAG_S,
    n_perm: int = 1000,
    seed: int = 0,
    surrogates: Optional[np.ndarray] = None,
) -> PairCoupling:
    """r at every grid lag in [0, max_lag]; returns the |r|-maximizing lag.

    The physiological series leads: r(lag) correlates physio(t) with
    tvoc(t+lag); ties break toward the smaller lag. The p-value re-runs the
    whole scan on spectrum-preserving phase surrogates of the VOC series (a
    max-statistic null), so scanning 25 lags does not inflate the false
    positive rate and autocorrelation is respected.
    """
    physio = np.ascontiguousarray(physio, dtype=np.float64)
    tvoc = np.ascontiguousarray(tvoc, dtype=np.float64)
    if physio.size != tvoc.size:
        raise ValueError("series must share a grid")
    n_lags = int(round(max_lag_s / dt_s)) + 1
    max_k = n_lags - 1
    valid = ~(np.isnan(physio) | np.isnan(tvoc))
    if physio.size - max_k < 60 or int(valid.sum()) < 60:
        raise InsufficientOverlap("need >= 60 overlapping samples at maximum lag")
    best_k, best_r = _best_lag_r(physio, tvoc, n_lags, 0)
    if best_k < 0:
        raise DegenerateInput("no lag with computable correlation")
    if surrogates is None:
        surrogates = _phase_surrogates(tvoc, n_perm, np.random.default_rng(seed))
    exceed = _surrogate_exceed(physio, surrogates, n_lags, abs(best_r))
    p = (1.0 + exceed) / (surrogates.shape[0] + 1.0)
    return PairCoupling(best_lag_s=best_k * dt_s, r=float(best_r), p=float(p))


def _phase_mask(series, markers, phase: Phase, session_end_ms: int) -> np.ndarray:
    interval = phase_interval_ms(markers, phase, session_end_ms)
    t = series.times_ms()
    if interval is None:
        return np.zeros(t.size, dtype=bool)
    return (t >= interval[0]) & (t < interval[1])


def hr_stress_delta(streams: AlignedStreams, markers, session_end_ms: int) -> Optional[float]:
    """Mean stress-phase HR minus mean baseline HR (None without HR data)."""
    hr = streams.hr
    base = _phase_mask(hr, markers, Phase.BASELINE, session_end_ms)
    stress = _phase_mask(hr, markers, Phase.STROOP, session_end_ms) | _phase_mask(
        hr, markers, Phase.ARITHMETIC, session_end_ms
    )
    b = hr.values[base]
    s = hr.values[stress]
    b, s = b[~np.isnan(b)], s[~np.isnan(s)]
    if b.size == 0 or s.size == 0:
        return None
    return float(s.mean() - b.mean())


def stress_tvoc_norm_mean(streams: AlignedStreams, markers, session_end_ms: int) -> Optional[float]:
    """Mean baseline-normalized TVOC elevation over the stress phases."""
    tv = streams.tvoc
    base = _phase_mask(tv, markers, Phase.BASELINE, session_end_ms)
    stress = _phase_mask(tv, markers, Phase.STROOP, session_end_ms) | _phase_mask(
        tv, markers, Phase.ARITHMETIC, session_end_ms
    )
    b = tv.values[base]
    s = tv.values[stress]
    b, s = b[~np.isnan(b)], s[~np.isnan(s)]
    if b.size == 0 or s.size == 0 or b.mean() == 0:
        return None
    return float(np.mean(norm_increase(b.mean(), s)))


def scan_series(streams: AlignedStreams) -> dict[str, np.ndarray]:
    """The three physiology series and TVOC on the common 0.2 Hz grid."""
    n = streams.tvoc.values.size
    hr5 = streams.hr.values[:: int(round(streams.tvoc.dt_ms / streams.hr.dt_ms))][:n]
    if hr5.size < n:
        hr5 = np.concatenate([hr5, np.full(n - hr5.size, np.nan)])
    gsr = streams.gsr.values[:n]
    with np.errstate(divide="ignore", invalid="ignore"):
        gsr_c = np.where(gsr > 0, gsr_conductance(np.where(gsr > 0, gsr, 1.0)), np.nan)
    return {
        "hr": hr5,
        "gsr": gsr_c,
        "resp": streams.resp.values[:n],
        "tvoc": streams.tvoc.values[:n],
    }


def analyze_participant(
    record: SessionRecord, *, n_perm: int = 1000, seed: int = 0
):
    """Lag couplings per pair, HR delta, stress TVOC elevation and the
    momentary (lag 0) HR-TVOC correlation for one session."""
    streams = align(record.frames, record.markers)
    session_end = record.marker_time("SESSION_END") or (record.frames[-1].timestamp + 1)
    series = scan_series(streams)
    # one surrogate ensemble of the session's TVOC stream, shared by all
    # physiological pairs (the null model belongs to the series, not the pair)
    surrogates = _phase_surrogates(
        np.ascontiguousarray(series["tvoc"], dtype=np.float64),
        n_perm,
        np.random.default_rng(seed),
    )
    pairs: dict[str, Optional[PairCoupling]] = {}
    for name in PAIR_NAMES:
        try:
            pairs[name] = lag_scan(
                series[name], series["tvoc"], n_perm=n_perm, seed=seed, surrogates=surrogates
            )
        except (InsufficientOverlap, DegenerateInput):
            pairs[name] = None
    delta = hr_stress_delta(streams, record.markers, session_end)
    stress_norm = stress_tvoc_norm_mean(streams, record.markers, session_end)
    try:
        momentary = lagged_corr_p(
            series["hr"], series["tvoc"], 0.0, dt_s=LAG_GRID_S, n_perm=n_perm, seed=seed
        )
    except (InsufficientOverlap, DegenerateInput, ValueError):
        momentary = None
    return pairs, delta, stress_norm, momentary


def phase_mean_tvoc_norm(record: SessionRecord) -> Optional[dict[str, float]]:
    """Per-level mean TVOC elevation for the seven ANOVA levels."""
    streams = align(record.frames, record.markers)
    session_end = record.marker_time("SESSION_END") or (record.frames[-1].timestamp + 1)
    base = baseline_stats(streams, record.markers, session_end)
    if "tvoc" not in base.means or base.means["tvoc"] == 0:
        return None
    tv = streams.tvoc
    out = {}
    level_phases = {
        "baseline": (Phase.BASELINE,),
        "stroop": (Phase.STROOP,),
        "arithmetic": (Phase.ARITHMETIC,),
        "stress": (Phase.STROOP, Phase.ARITHMETIC),
        "rec1": (Phase.RECOVERY1,),
        "rec2": (Phase.RECOVERY2,),
        "rec3": (Phase.RECOVERY3,),
    }
    for level, phases in level_phases.items():
        mask = np.zeros(tv.values.size, dtype=bool)
        for ph in phases:
            mask |= _phase_mask(tv, record.markers, ph, session_end)
        vals = tv.values[mask]
        vals = vals[~np.isnan(vals)]
        if vals.size == 0:
            return None
        out[level] = float(np.mean(norm_increase(base.means["tvoc"], vals)))
    return out


def phase_effect(records: list[SessionRecord], group: str) -> PhaseEffect:
    """Within-group phase ANOVA on mean TVOC elevation plus Bonferroni post-hocs."""
    rows = []
    for rec in records:
        means = phase_mean_tvoc_norm(rec)
        if means is not None:
            rows.append([means[level] for level in ANOVA_LEVELS])
    if len(rows) < 2:
        raise DegenerateInput(f"group {group!r} has fewer than 2 complete participants")
    matrix = np.asarray(rows)
    if np.allclose(matrix, matrix.flat[0]):
        raise DegenerateInput("constant response across all phases and subjects")
    anova = rm_anova(matrix)
    m = len(ANOVA_LEVELS) * (len(ANOVA_LEVELS) - 1) // 2
    posthoc = []
    raw = []
    for i in range(len(ANOVA_LEVELS)):
        for j in range(i + 1, len(ANOVA_LEVELS)):
            a, b = matrix[:, j], matrix[:, i]
            diff = float(np.mean(a - b))
            try:
                res = paired_t(a, b)
                raw.append((ANOVA_LEVELS[i], ANOVA_LEVELS[j], diff, res.p, res.effect_size))
            except DegenerateInput:
                raw.append((ANOVA_LEVELS[i], ANOVA_LEVELS[j], diff, 1.0, 0.0))
    adjusted = bonferroni([r[3] for r in raw], m)
    for (la, lb, diff, _, d), p_adj in zip(raw, adjusted):
        posthoc.append((la, lb, diff, p_adj, float(d or 0.0)))
    return PhaseEffect(group=group, n=matrix.shape[0], anova=anova, posthoc=posthoc)


def moderator_analysis(results: list[CouplingResult]) -> ModeratorSection:
    """Compare coupling r between High and Low emitters among responders."""
    responders = [r for r in results if r.responder and r.emitter_class is not None]
    high = [r for r in responders if r.emitter_class == "High"]
    low = [r for r in responders if r.emitter_class == "Low"]
    if len(high) < 2 or len(low) < 2:
        raise InsufficientResponders(
            f"need >= 2 responders per emitter class, got {len(high)}/{len(low)}"
        )

    def pair_rs(group, pair):
        return [r.pairs[pair].r for r in group if r.pairs.get(pair) is not None]

    def safe_t(a, b):
        try:
            return independent_t(a, b) if len(a) >= 2 and len(b) >= 2 else None
        except DegenerateInput:
            return None

    hr_test = safe_t(pair_rs(high, "hr"), pair_rs(low, "hr"))
    resp_test = safe_t(pair_rs(high, "resp"), pair_rs(low, "resp"))

    emitter_means = {}
    for name, group in (("High", high), ("Low", low)):
        vals = [r.stress_tvoc_norm_mean for r in group if r.stress_tvoc_norm_mean is not None]
        arr = np.asarray(vals)
        emitter_means[name] = (
            float(arr.mean()),
            float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
            arr.size,
        )

    pos = sum(1 for r in responders if r.coupling_sign == 1)
    neg = sum(1 for r in responders if r.coupling_sign == -1)
    abs_rs = [r.best_abs_r() for r in responders if r.best_abs_r() is not None]
    try:
        cv = coef_variation(abs_rs) if len(abs_rs) >= 2 else None
    except Exception:
        cv = None
    return ModeratorSection(
        hr_test=hr_test,
        resp_test=resp_test,
        emitter_means=emitter_means,
        sign_split=(pos, neg),
        cv_abs_r_pct=cv,
    )


def _manipulation_check(records: list[SessionRecord]) -> dict[str, object]:
    """Baseline-vs-stress paired tests for HR and GSR conductance."""
    hr_base, hr_stress, gsr_base, gsr_stress = [], [], [], []
    for rec in records:
        streams = align(rec.frames, rec.markers)
        session_end = rec.marker_time("SESSION_END") or (rec.frames[-1].timestamp + 1)
        for series, sink_b, sink_s, conduct in (
            (streams.hr, hr_base, hr_stress, False),
            (streams.gsr, gsr_base, gsr_stress, True),
        ):
            base = _phase_mask(series, rec.markers, Phase.BASELINE, session_end)
            stress = _phase_mask(series, rec.markers, Phase.STROOP, session_end) | _phase_mask(
                series, rec.markers, Phase.ARITHMETIC, session_end
            )
            b, s = series.values[base], series.values[stress]
            b, s = b[~np.isnan(b)], s[~np.isnan(s)]
            if b.size and s.size:
                if conduct:
                    b, s = gsr_conductance(b), gsr_conductance(s)
                sink_b.append(float(b.mean()))
                sink_s.append(float(s.mean()))
    out: dict[str, object] = {
        "hr_n": len(hr_base),
        "gsr_n": len(gsr_base),
        "hr_means": (float(np.mean(hr_base)), float(np.mean(hr_stress))) if hr_base else None,
        "hr_sds": (
            (float(np.std(hr_base, ddof=1)), float(np.std(hr_stress, ddof=1)))
            if len(hr_base) > 1
            else None
        ),
        "gsr_means": (float(np.mean(gsr_base)), float(np.mean(gsr_stress))) if gsr_base else None,
    }
    try:
        out["hr_test"] = paired_t(hr_stress, hr_base) if len(hr_base) >= 2 else None
    except DegenerateInput:
        out["hr_test"] = None
    try:
        out["gsr_test"] = paired_t(gsr_stress, gsr_base) if len(gsr_base) >= 2 else None
    except DegenerateInput:
        out["gsr_test"] = None
    return out


def analyze_cohort(
    records: list[SessionRecord], *, n_perm: int = 1000, seed: int = 0
) -> CouplingReport:
    """Full Study-2a analysis over a cohort of sessions."""
    per_participant = {}
    deltas = {}
    for i, rec in enumerate(records):
        pairs, delta, stress_norm, momentary = analyze_participant(
            rec, n_perm=n_perm, seed=seed + i
        )
        per_participant[rec.meta.id] = (pairs, delta, stress_norm, momentary)
        if delta is not None:
            deltas[rec.meta.id] = delta
    reactor_classes = classify_reactors(deltas) if len(deltas) >= 2 else {}

    results = []
    for rec in records:
        pairs, delta, stress_norm, momentary = per_participant[rec.meta.id]
        sig = {n: pc for n, pc in pairs.items() if pc is not None and pc.p < ALPHA}
        responder = bool(sig)
        sign = None
        if sig:
            best_pair = min(sig.values(), key=lambda pc: (pc.p, -abs(pc.r)))
            sign = 1 if best_pair.r > 0 else -1
        emitter = None
        if stress_norm is not None:
            emitter = "High" if stress_norm > EMITTER_THRESHOLD else "Low"
        results.append(
            CouplingResult(
                participant=rec.meta.id,
                pairs=pairs,
                responder=responder,
                coupling_sign=sign,
                reactor_class=reactor_classes.get(rec.meta.id),
                emitter_class=emitter,
                stress_tvoc_norm_mean=stress_norm,
                hr_delta=delta,
                momentary_r=None if momentary is None else float(momentary.statistic),
                momentary_p=None if momentary is None else float(momentary.p),
            )
        )

    rates = {}
    for name in PAIR_NAMES:
        tested = [r for r in results if r.pairs.get(name) is not None]
        sig = [r for r in tested if r.pairs[name].p < ALPHA]
        rates[name] = (len(sig), len(tested))
    tested_any = [r for r in results if any(pc is not None for pc in r.pairs.values())]
    overall = (sum(1 for r in tested_any if r.responder), len(tested_any))

    try:
        moderator = moderator_analysis(results)
    except InsufficientResponders:
        moderator = None

    phase_effects = []
    by_id = {rec.meta.id: rec for rec in records}
    for group in ("High", "Low"):
        members = [by_id[r.participant] for r in results if r.reactor_class == group]
        try:
            phase_effects.append(phase_effect(members, group))
        except DegenerateInput:
            pass

    return CouplingReport(
        results=results,
        responder_rates=rates,
        overall_responders=overall,
        moderator=moderator,
        phase_effects=phase_effects,
        manipulation=_manipulation_check(records),
    )
