"""Inference primitives for the coupling and reporting layers.

Parametric p-values come from the local distribution tails; each one is
pinned against an exhaustive-permutation oracle in the test suite. The
lagged-correlation p uses circular shifts rather than i.i.d. shuffles so the
null respects autocorrelation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .special import chi2_sf, f_sf, t_two_sided_p


class DegenerateInput(ValueError):
    pass


class InsufficientOverlap(ValueError):
    pass


class ZeroMean(ValueError):
    pass


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # statistical result, not a pytest collection target

    statistic: float
    df: Union[float, tuple[float, float], None]
    p: float
    effect_size: Optional[float] = None
    method: str = ""


def _as1d(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError("expected a 1-D sequence")
    return a


def paired_t(x, y) -> TestResult:
    """Two-sided paired t test; effect size d = mean(diff)/sd(diff)."""
    x, y = _as1d(x), _as1d(y)
    if x.size != y.size or x.size < 2:
        raise DegenerateInput("need two paired samples of equal length >= 2")
    d = x - y
    sd = d.std(ddof=1)
    if sd == 0:
        raise DegenerateInput("differences have zero variance")
    n = d.size
    t = d.mean() / (sd / np.sqrt(n))
    return TestResult(
        statistic=float(t),
        df=float(n - 1),
        p=t_two_sided_p(float(t), n - 1),
        effect_size=float(d.mean() / sd),
        method="paired_t",
    )


def independent_t(a, b) -> TestResult:
    """Pooled-variance two-sample t; effect size is Cohen's d."""
    a, b = _as1d(a), _as1d(b)
    if a.size < 2 or b.size < 2:
        raise DegenerateInput("need >= 2 values per group")
    na, nb = a.size, b.size
    sp2 = ((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1)) / (na + nb - 2)
    if sp2 == 0:
        raise DegenerateInput("pooled variance is zero")
    sp = np.sqrt(sp2)
    t = (a.mean() - b.mean()) / (sp * np.sqrt(1.0 / na + 1.0 / nb))
    df = na + nb - 2
    return TestResult(
        statistic=float(t),
        df=float(df),
        p=t_two_sided_p(float(t), df),
        effect_size=float((a.mean() - b.mean()) / sp),
        method="independent_t",
    )


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> TestResult:
    """Kruskal-Wallis H with mid-rank tie correction; chi-square p."""
    arrays = [_as1d(g) for g in groups]
    if len(arrays) < 2 or any(a.size < 1 for a in arrays):
        raise DegenerateInput("need >= 2 groups with >= 1 value each")
    pooled = np.concatenate(arrays)
    n = pooled.size
    if np.all(pooled == pooled[0]):
        raise DegenerateInput("all values identical")
    ranks = _midranks(pooled)
    h = 0.0
    offset = 0
    for a in arrays:
        r = ranks[offset : offset + a.size]
        h += a.size * (r.mean() - (n + 1) / 2.0) ** 2
        offset += a.size
    h *= 12.0 / (n * (n + 1))
    # tie correction
    _, counts = np.unique(pooled, return_counts=True)
    correction = 1.0 - float(np.sum(counts**3 - counts)) / (n**3 - n)
    if correction == 0:
        raise DegenerateInput("all values identical")
    h /= correction
    df = len(arrays) - 1
    return TestResult(
        statistic=float(h), df=float(df), p=chi2_sf(float(h), df), method="kruskal_wallis"
    )


def rm_anova(data) -> TestResult:
    """One-way within-subjects ANOVA on a subjects x conditions matrix."""
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise DegenerateInput("need a complete subjects x conditions matrix, both >= 2")
    if np.isnan(x).any():
        raise DegenerateInput("matrix must be complete (no missing cells)")
    n, p = x.shape
    grand = x.mean()
    ss_subject = p * np.sum((x.mean(axis=1) - grand) ** 2)
    ss_cond = n * np.sum((x.mean(axis=0) - grand) ** 2)
    ss_total = np.sum((x - grand) ** 2)
    ss_err = ss_total - ss_subject - ss_cond
    df_cond = p - 1
    df_err = (p - 1) * (n - 1)
    scale = max(ss_total, 1.0)
    if ss_cond / scale < 1e-15:
        # no condition effect at all; a zero error term is then vacuous
        return TestResult(0.0, (float(df_cond), float(df_err)), 1.0, method="rm_anova")
    if ss_err / scale < 1e-15:
        raise DegenerateInput("zero error variance")
    f = (ss_cond / df_cond) / (ss_err / df_err)
    return TestResult(
        statistic=float(f),
        df=(float(df_cond), float(df_err)),
        p=f_sf(float(f), df_cond, df_err),
        method="rm_anova",
    )


def bonferroni(pvals, m: int) -> list[float]:
    """p * m, capped at 1. ``m`` is the family size (>= len(pvals))."""
    pvals = list(pvals)
    if m < len(pvals):
        raise ValueError("family size m smaller than the number of p-values")
    return [min(1.0, float(p) * m) for p in pvals]


def pearson_r(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson correlation over pairwise non-missing entries."""
    mask = ~(np.isnan(x) | np.isnan(y))
    xs, ys = x[mask], y[mask]
    if xs.size < 3:
        raise InsufficientOverlap(f"only {xs.size} overlapping samples")
    xd = xs - xs.mean()
    yd = ys - ys.mean()
    denom = np.sqrt(np.sum(xd**2) * np.sum(yd**2))
    if denom == 0:
        raise DegenerateInput("zero variance in correlation input")
    return float(np.sum(xd * yd) / denom)


def lagged_corr_p(
    x,
    y,
    lag_s: float,
    *,
    dt_s: float = 5.0,
    n_perm: int = 1000,
    seed: int = 0,
    min_shift_s: float = 120.0,
    min_overlap: int = 10,
) -> TestResult:
    """Pearson r of x(t) against y(t + lag), with a circular-shift null.

    Permutation draws rotate y by uniform offsets of at least ``min_shift_s``
    so the surrogate preserves autocorrelation; p is two-sided on |r|.
    """
    x, y = _as1d(x), _as1d(y)
    if x.size != y.size:
        raise ValueError("series must share a grid")
    k = lag_s / dt_s
    if abs(k - round(k)) > 1e-9:
        raise ValueError(f"lag {lag_s}s is not a multiple of the {dt_s}s grid")
    k = int(round(k))
    if k < 0 or k >= x.size:
        raise InsufficientOverlap("lag exceeds series length")

    def r_at_lag(ys: np.ndarray) -> float:
        xs = x[: x.size - k] if k else x
        yt = ys[k:] if k else ys
        mask = ~(np.isnan(xs) | np.isnan(yt))
        if int(mask.sum()) < min_overlap:
            raise InsufficientOverlap(f"only {int(mask.sum())} overlapping samples")
        a, b = xs[mask], yt[mask]
        ad = a - a.mean()
        bd = b - b.mean()
        denom = np.sqrt(np.sum(ad**2) * np.sum(bd**2))
        if denom == 0:
            raise DegenerateInput("zero variance at this lag")
        return float(np.sum(ad * bd) / denom)

    r_obs = r_at_lag(y)
    min_shift = int(np.ceil(min_shift_s / dt_s))
    if y.size <= 2 * min_shift:
        raise InsufficientOverlap("series too short for circular-shift null")
    # distinct rotation offsets; enumerate the whole admissible range when
    # it is no larger than the permutation budget (exact test)
    candidates = np.arange(min_shift, y.size - min_shift)
    if candidates.size <= n_perm:
        shifts = candidates
    else:
        rng = np.random.default_rng(seed)
        shifts = rng.choice(candidates, size=n_perm, replace=False)
    exceed = 0
    for s in shifts:
        try:
            r_p = r_at_lag(np.roll(y, int(s)))
        except (InsufficientOverlap, DegenerateInput):
            continue
        if abs(r_p) >= abs(r_obs) - 1e-12:
            exceed += 1
    p = (1.0 + exceed) / (shifts.size + 1.0)
    mask = ~(np.isnan(x[: x.size - k] if k else x) | np.isnan(y[k:] if k else y))
    return TestResult(
        statistic=r_obs,
        df=float(int(mask.sum()) - 2),
        p=p,
        method="lagged_pearson_perm",
    )


def coef_variation(values) -> float:
    """Sample coefficient of variation as a percentage."""
    v = _as1d(values)
    if v.size < 2:
        raise DegenerateInput("need >= 2 values")
    m = v.mean()
    if m == 0:
        raise ZeroMean("mean is zero")
    return float(100.0 * v.std(ddof=1) / abs(m))
