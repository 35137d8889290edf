"""Marker-anchored resampling of raw frames onto per-modality grids.

Every grid is anchored at the baseline start marker (grid index 0 == t0), so
all modalities share the session time origin. Resampling picks the nearest
non-missing sample within half a grid interval; nothing is interpolated, so
raw sensor values pass through untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.types import SensorFrame
from .respiration import InsufficientData, derive_respiration

ANCHOR_EVENTS = ("BASELINE_START", "PHASE_2_START")

HR_DT_MS = 1000
SLOW_DT_MS = 5000  # GSR / VOC / derived respiration


class MissingAnchor(ValueError):
    pass


@dataclass(frozen=True)
class Series:
    """Uniformly sampled channel: value[i] sits at t0_ms + i*dt_ms."""

    t0_ms: int
    dt_ms: int
    values: np.ndarray  # float64, NaN = missing

    def times_ms(self) -> np.ndarray:
        return self.t0_ms + np.arange(self.values.size, dtype=np.int64) * self.dt_ms

    def slice_ms(self, start_ms: int, end_ms: int) -> np.ndarray:
        """Values with t in [start_ms, end_ms)."""
        t = self.times_ms()
        return self.values[(t >= start_ms) & (t < end_ms)]


@dataclass(frozen=True)
class AlignedStreams:
    baseline_start_ms: int
    hr: Series
    gsr: Series
    tvoc: Series
    gas320: Series
    resp: Series

    def channel(self, name: str) -> Series:
        return getattr(self, name)


def _nearest_resample(
    t_ms: np.ndarray, values: np.ndarray, t0: int, dt: int, n: int
) -> np.ndarray:
    out = np.full(n, np.nan)
    if t_ms.size == 0:
        return out
    grid = t0 + np.arange(n, dtype=np.int64) * dt
    idx = np.searchsorted(t_ms, grid)
    half = dt / 2.0
    for i, g in enumerate(grid):
        best = None
        best_d = half
        for j in (idx[i] - 1, idx[i]):
            if 0 <= j < t_ms.size:
                d = abs(float(t_ms[j]) - float(g))
                # ties go to the earlier sample: strict < keeps the first hit
                if d < best_d or (d == best_d and best is None):
                    best = j
                    best_d = d
        if best is not None:
            out[i] = values[best]
    return out


def _field_samples(frames: list[SensorFrame], name: str) -> tuple[np.ndarray, np.ndarray]:
    t, v = [], []
    for f in frames:
        x = getattr(f, name)
        if x is not None:
            t.append(f.timestamp)
            v.append(float(x))
    return np.asarray(t, dtype=np.int64), np.asarray(v, dtype=np.float64)


def beat_times_from_frames(frames: list[SensorFrame]) -> tuple[np.ndarray, np.ndarray]:
    """Reconstruct (beat time ms, RR ms) from per-frame interval lists.

    Consecutive intervals chain into a continuous beat clock (t_k = t_{k-1} +
    RR_k), which keeps relative beat timing exact instead of quantizing it to
    frame timestamps. The clock re-anchors on the frame timestamp whenever it
    drifts more than 2 s from it (data gap / dropped frames).
    """
    times: list[float] = []
    rrs: list[float] = []
    t_run: float | None = None
    for f in frames:
        if not f.rr_intervals:
            continue
        span = float(sum(f.rr_intervals))
        if t_run is None or abs(t_run + span - f.timestamp) > 2000.0:
            t_run = f.timestamp - span
        for rr in f.rr_intervals:
            t_run += float(rr)
            times.append(t_run)
            rrs.append(float(rr))
    return np.asarray(times, dtype=np.float64), np.asarray(rrs, dtype=np.float64)


def find_anchor(markers) -> int:
    for ts, name in markers:
        if name in ANCHOR_EVENTS:
            return int(ts)
    raise MissingAnchor(f"no baseline anchor marker ({' / '.join(ANCHOR_EVENTS)})")


def align(frames, markers) -> AlignedStreams:
    """Resample a session's frames onto the shared analysis grids."""
    frames = sorted(frames, key=lambda f: f.timestamp)
    if not frames:
        raise ValueError("no frames to align")
    t0 = find_anchor(markers)
    t_end = frames[-1].timestamp

    def n_points(dt: int) -> int:
        return max(0, int((t_end - t0) // dt) + 1)

    n_hr = n_points(HR_DT_MS)
    n_slow = n_points(SLOW_DT_MS)

    series = {}
    for name, field, dt, n in (
        ("hr", "hr", HR_DT_MS, n_hr),
        ("gsr", "gsr_raw", SLOW_DT_MS, n_slow),
        ("tvoc", "tvoc", SLOW_DT_MS, n_slow),
        ("gas320", "gas320", SLOW_DT_MS, n_slow),
    ):
        t_ms, vals = _field_samples(frames, field)
        series[name] = Series(t0, dt, _nearest_resample(t_ms, vals, t0, dt, n))

    beat_t, beat_rr = beat_times_from_frames(frames)
    try:
        resp_values = derive_respiration(beat_t, beat_rr, t0, n_slow, SLOW_DT_MS)
    except InsufficientData:
        resp_values = np.full(n_slow, np.nan)
    series["resp"] = Series(t0, SLOW_DT_MS, resp_values)

    return AlignedStreams(baseline_start_ms=t0, **series)
