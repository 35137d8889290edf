"""Baseline normalization, the GSR conductance transform and imputation.

Two sign conventions coexist deliberately: the coupling analysis treats
decreases from baseline as positive (gas resistance drops when VOC exposure
rises), while feature extraction treats elevations as positive. Both are
plain rescalings of the same quantity and always sum to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core.types import Phase
from .ingest.align import AlignedStreams

GSR_SCALE_K = 1.0e6  # arbitrary conductance scale; cancels in every correlation


class ZeroBaseline(ValueError):
    pass


class NonPositiveResistance(ValueError):
    pass


class AllMissingColumn(ValueError):
    pass


def norm_decrease(baseline_mean, x):
    """(baseline - x) / baseline: positive when the signal dropped below baseline."""
    b = np.asarray(baseline_mean, dtype=np.float64)
    if np.any(b == 0):
        raise ZeroBaseline("baseline mean is zero")
    out = (b - np.asarray(x, dtype=np.float64)) / b
    return float(out) if out.ndim == 0 else out


def norm_increase(baseline_mean, x):
    """(x - baseline) / baseline: positive when the signal rose above baseline."""
    b = np.asarray(baseline_mean, dtype=np.float64)
    if np.any(b == 0):
        raise ZeroBaseline("baseline mean is zero")
    out = (np.asarray(x, dtype=np.float64) - b) / b
    return float(out) if out.ndim == 0 else out


def gsr_conductance(r, k: float = GSR_SCALE_K):
    """Skin conductance equivalent C = k/R; arousal pushes it upward."""
    rr = np.asarray(r, dtype=np.float64)
    if np.any(rr[~np.isnan(rr)] <= 0):
        raise NonPositiveResistance("resistance must be > 0")
    out = k / rr
    return float(out) if out.ndim == 0 else out


def impute_column_mean(matrix: np.ndarray) -> np.ndarray:
    """Replace NaN cells by their column's observed mean (copy; input untouched)."""
    x = np.array(matrix, dtype=np.float64, copy=True)
    if x.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    observed = ~np.isnan(x)
    if not observed.all(axis=0).all() or np.isnan(x).any():
        for j in range(x.shape[1]):
            col = x[:, j]
            mask = np.isnan(col)
            if not mask.any():
                continue
            if mask.all():
                raise AllMissingColumn(f"column {j} has no observed values")
            col[mask] = col[~mask].mean()
    return x


@dataclass(frozen=True)
class BaselineStats:
    """Per-channel mean over the marker-delimited baseline phase."""

    means: dict[str, float]
    counts: dict[str, int]

    def mean(self, channel: str) -> float:
        v = self.means.get(channel)
        if v is None:
            raise ZeroBaseline(f"no baseline samples for channel {channel!r}")
        return v


def phase_interval_ms(markers, phase: Phase, session_end_ms: int) -> tuple[int, int] | None:
    """[start, end) of a phase from the marker log; None if never entered."""
    start = None
    for ts, name in markers:
        if name == f"PHASE_{int(phase)}_START":
            start = int(ts)
    if start is None:
        return None
    end = session_end_ms
    for ts, name in markers:
        if name.startswith("PHASE_") and name.endswith("_START"):
            k = int(name.split("_")[1])
            if k > int(phase) and int(ts) < end:
                end = int(ts)
        if name == "SESSION_END":
            end = min(end, int(ts))
    return start, max(start, end)


def baseline_stats(streams: AlignedStreams, markers, session_end_ms: int) -> BaselineStats:
    """Mean raw reading per channel across the baseline phase window."""
    interval = phase_interval_ms(markers, Phase.BASELINE, session_end_ms)
    if interval is None:
        raise ZeroBaseline("no baseline phase marker")
    start, end = interval
    means: dict[str, float] = {}
    counts: dict[str, int] = {}
    for channel in ("hr", "gsr", "tvoc", "gas320", "resp"):
        vals = streams.channel(channel).slice_ms(start, end)
        vals = vals[~np.isnan(vals)]
        counts[channel] = int(vals.size)
        if vals.size:
            means[channel] = float(vals.mean())
    return BaselineStats(means=means, counts=counts)
