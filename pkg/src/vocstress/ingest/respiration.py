"""Respiration rate from beat-to-beat interval oscillation.

There is no dedicated respiration sensor; breathing modulates the RR series
(respiratory sinus arrhythmia), so the dominant oscillation of RR in the
0.10-0.50 Hz band over a trailing 60 s window gives breaths/min.
"""

from __future__ import annotations

import numpy as np


class InsufficientData(ValueError):
    pass


# Band and resolution of the spectral scan. 0.002 Hz steps quantize the
# reported rate to 0.12 breaths/min, well inside the +-0.5 contract.
BAND_HZ = (0.10, 0.50)
FREQ_STEP_HZ = 0.002
RESAMPLE_HZ = 4.0
MIN_INTERVALS = 30
MIN_MODULATION_MS = 1.0


_FREQS = np.arange(BAND_HZ[0], BAND_HZ[1] + FREQ_STEP_HZ / 2, FREQ_STEP_HZ)


def _dft_basis(n: int) -> np.ndarray:
    # relative-time basis; the absolute-time phase factor drops out in |.|
    rel_t = np.arange(n) / RESAMPLE_HZ
    return np.exp(-2j * np.pi * np.outer(_FREQS, rel_t))


_BASIS_CACHE: dict[int, np.ndarray] = {}


def dominant_band_frequency(t_s: np.ndarray, rr_ms: np.ndarray) -> float | None:
    """Peak frequency (Hz) of an irregularly sampled RR stretch, or None.

    Returns None when the window carries no measurable modulation (sub-ms
    spread cannot encode breathing).
    """
    if float(np.std(rr_ms)) < MIN_MODULATION_MS:
        return None
    n = int((t_s[-1] - t_s[0]) * RESAMPLE_HZ)
    if n < 8:
        return None
    grid = t_s[0] + np.arange(n) / RESAMPLE_HZ
    x = np.interp(grid, t_s, rr_ms)
    x = x - x.mean()
    basis = _BASIS_CACHE.get(n)
    if basis is None:
        basis = _dft_basis(n)
        if len(_BASIS_CACHE) < 64:
            _BASIS_CACHE[n] = basis
    amp = np.abs(basis @ x)
    return float(_FREQS[int(np.argmax(amp))])


def derive_respiration(
    beat_times_ms: np.ndarray,
    rr_ms: np.ndarray,
    grid_t0_ms: int,
    n_points: int,
    dt_ms: int = 5000,
    window_s: float = 60.0,
) -> np.ndarray:
    """Breaths/min on a uniform grid (NaN where underdetermined).

    ``beat_times_ms``/``rr_ms`` is the timestamped interval series; the output
    grid is ``grid_t0_ms + i*dt_ms`` for i in [0, n_points). Each grid point
    uses the trailing ``window_s`` of intervals and needs at least 30 of them.
    Raises InsufficientData when the whole series spans less than the window.
    """
    beat_times_ms = np.asarray(beat_times_ms, dtype=np.float64)
    rr_ms = np.asarray(rr_ms, dtype=np.float64)
    if beat_times_ms.size == 0 or (beat_times_ms[-1] - beat_times_ms[0]) < window_s * 1000:
        raise InsufficientData(
            f"need at least {window_s:.0f} s of RR intervals"
        )
    out = np.full(n_points, np.nan)
    t_s = beat_times_ms / 1000.0
    for i in range(n_points):
        t_grid = (grid_t0_ms + i * dt_ms) / 1000.0
        lo = np.searchsorted(t_s, t_grid - window_s, side="right")
        hi = np.searchsorted(t_s, t_grid, side="right")
        if hi - lo < MIN_INTERVALS:
            continue
        if t_s[hi - 1] - t_s[lo] < window_s * 0.5:
            continue
        f = dominant_band_frequency(t_s[lo:hi], rr_ms[lo:hi])
        if f is not None:
            out[i] = 60.0 * f
    return out
