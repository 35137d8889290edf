"""30-second windowing and the 22-feature vector per window.

Windows tile each phase from its own start marker, never crossing a phase
boundary, so every window has a clean label. GSR enters as conductance
(k/R); TVOC and Gas320 stay in raw sensor units except the
baseline-normalized TVOC mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core.types import Phase, SessionRecord, StressLabel, label_for_phase
from .ingest.align import AlignedStreams, align
from .preprocess import (
    GSR_SCALE_K,
    BaselineStats,
    baseline_stats,
    impute_column_mean,
    norm_increase,
    phase_interval_ms,
)

WINDOW_S = 30

FEATURE_NAMES: tuple[str, ...] = (
    "hr_mean", "hr_std", "hr_min", "hr_max", "hr_range",
    "gsr_mean", "gsr_std", "gsr_min", "gsr_max", "gsr_range",
    "tvoc_mean", "tvoc_std", "tvoc_min", "tvoc_max", "tvoc_range",
    "tvoc_slope", "tvoc_norm_mean",
    "gas320_mean", "gas320_std", "gas320_min", "gas320_max", "gas320_range",
)

MODALITY_BLOCKS: dict[str, tuple[int, ...]] = {
    "hr": tuple(range(0, 5)),
    "gsr": tuple(range(5, 10)),
    "tvoc": tuple(range(10, 17)),
    "gas320": tuple(range(17, 22)),
}

LABELED_PHASES = (
    Phase.BASELINE,
    Phase.STROOP,
    Phase.ARITHMETIC,
    Phase.RECOVERY1,
    Phase.RECOVERY2,
    Phase.RECOVERY3,
)


class EmptyWindow(ValueError):
    pass


@dataclass(frozen=True)
class RawWindow:
    participant: str
    phase: Phase
    start_ms: int
    end_ms: int
    # channel -> (times_ms, values); values carry NaN for missing samples
    channels: dict[str, tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class FeatureWindow:
    participant: str
    start_s: float
    end_s: float
    phase: Phase
    label: StressLabel
    features: np.ndarray  # 22 floats, NaN allowed pre-imputation


@dataclass(frozen=True)
class Dataset:
    windows: list[FeatureWindow]
    X_raw: np.ndarray  # n x 22 with NaN
    X: np.ndarray  # n x 22 after column-mean imputation
    y: np.ndarray  # 1 = Stress, 0 = NonStress
    groups: np.ndarray  # participant id per row
    feature_names: tuple[str, ...] = FEATURE_NAMES

    @property
    def class_counts(self) -> dict[str, int]:
        return {
            "Stress": int(self.y.sum()),
            "NonStress": int((1 - self.y).sum()),
        }


def segment(streams: AlignedStreams, markers, participant: str, session_end_ms: int) -> list[RawWindow]:
    """Tile phases 2-7 with 30 s windows; sub-window remainders are dropped."""
    out: list[RawWindow] = []
    for phase in LABELED_PHASES:
        interval = phase_interval_ms(markers, phase, session_end_ms)
        if interval is None:
            continue
        start, end = interval
        w = WINDOW_S * 1000
        for w_start in range(start, end - w + 1, w):
            w_end = w_start + w
            channels = {}
            for name in ("hr", "gsr", "tvoc", "gas320"):
                s = streams.channel(name)
                t = s.times_ms()
                mask = (t >= w_start) & (t < w_end)
                channels[name] = (t[mask], s.values[mask])
            out.append(
                RawWindow(
                    participant=participant,
                    phase=phase,
                    start_ms=w_start,
                    end_ms=w_end,
                    channels=channels,
                )
            )
    return out


def _stats_block(values: np.ndarray) -> list[float]:
    v = values[~np.isnan(values)]
    if v.size == 0:
        return [np.nan] * 5
    std = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return [float(v.mean()), std, float(v.min()), float(v.max()), float(v.max() - v.min())]


def extract(window: RawWindow, baseline: BaselineStats) -> FeatureWindow:
    """22 features for one window; a fully missing channel yields NaN features."""
    n_observed = sum(
        int((~np.isnan(vals)).sum()) for _, vals in window.channels.values()
    )
    if n_observed == 0:
        raise EmptyWindow(
            f"window at {window.start_ms} ms has no samples in any channel"
        )
    feats: list[float] = []
    feats += _stats_block(window.channels["hr"][1])

    gsr_t, gsr_raw = window.channels["gsr"]
    with np.errstate(divide="ignore", invalid="ignore"):
        gsr_c = np.where(gsr_raw > 0, GSR_SCALE_K / gsr_raw, np.nan)
    feats += _stats_block(gsr_c)

    tvoc_t, tvoc_v = window.channels["tvoc"]
    feats += _stats_block(tvoc_v)
    mask = ~np.isnan(tvoc_v)
    if mask.sum() >= 2:
        t_s = tvoc_t[mask].astype(np.float64) / 1000.0
        v = tvoc_v[mask]
        t_c = t_s - t_s.mean()
        denom = float(np.sum(t_c**2))
        feats.append(float(np.sum(t_c * (v - v.mean())) / denom) if denom > 0 else np.nan)
    else:
        feats.append(np.nan)
    if mask.any() and "tvoc" in baseline.means:
        feats.append(norm_increase(baseline.mean("tvoc"), float(tvoc_v[mask].mean())))
    else:
        feats.append(np.nan)

    feats += _stats_block(window.channels["gas320"][1])

    return FeatureWindow(
        participant=window.participant,
        start_s=window.start_ms / 1000.0,
        end_s=window.end_ms / 1000.0,
        phase=window.phase,
        label=label_for_phase(window.phase),
        features=np.asarray(feats, dtype=np.float64),
    )


def windows_for_session(record: SessionRecord) -> list[FeatureWindow]:
    streams = align(record.frames, record.markers)
    session_end = record.marker_time("SESSION_END") or (record.frames[-1].timestamp + 1)
    base = baseline_stats(streams, record.markers, session_end)
    out = []
    for raw in segment(streams, record.markers, record.meta.id, session_end):
        try:
            out.append(extract(raw, base))
        except EmptyWindow:
            # keep provenance; all features missing, filled by imputation
            out.append(
                FeatureWindow(
                    participant=raw.participant,
                    start_s=raw.start_ms / 1000.0,
                    end_s=raw.end_ms / 1000.0,
                    phase=raw.phase,
                    label=label_for_phase(raw.phase),
                    features=np.full(len(FEATURE_NAMES), np.nan),
                )
            )
    return out


def build_dataset(sessions) -> Dataset:
    """Windowed feature dataset across sessions, ordered by (participant, start)."""
    if not sessions:
        raise ValueError("need at least one session")
    windows: list[FeatureWindow] = []
    for record in sessions:
        windows.extend(windows_for_session(record))
    windows.sort(key=lambda w: (w.participant, w.start_s))
    X_raw = np.vstack([w.features for w in windows]) if windows else np.empty((0, 22))
    y = np.asarray([1 if w.label is StressLabel.STRESS else 0 for w in windows])
    groups = np.asarray([w.participant for w in windows])
    X = impute_column_mean(X_raw)
    return Dataset(windows=windows, X_raw=X_raw, X=X, y=y, groups=groups)


def save_dataset_csv(dataset: Dataset, path) -> None:
    """One row per window; raw (pre-imputation) features, missing as NA."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("participant,start_s,phase,label," + ",".join(FEATURE_NAMES) + "\n")
        for w, row in zip(dataset.windows, dataset.X_raw):
            cells = [w.participant, repr(float(w.start_s)), str(int(w.phase)), w.label.value]
            cells += ["NA" if np.isnan(v) else repr(float(v)) for v in row]
            fh.write(",".join(cells) + "\n")


def load_dataset_csv(path) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        expected = ["participant", "start_s", "phase", "label", *FEATURE_NAMES]
        if header != expected:
            raise ValueError("dataset header does not match the canonical layout")
        windows = []
        rows = []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            participant, start_s, phase_s, label_s = parts[:4]
            values = [np.nan if p == "NA" else float(p) for p in parts[4:]]
            phase = Phase(int(phase_s))
            windows.append(
                FeatureWindow(
                    participant=participant,
                    start_s=float(start_s),
                    end_s=float(start_s) + WINDOW_S,
                    phase=phase,
                    label=StressLabel(label_s),
                    features=np.asarray(values),
                )
            )
            rows.append(values)
    X_raw = np.asarray(rows, dtype=np.float64)
    y = np.asarray([1 if w.label is StressLabel.STRESS else 0 for w in windows])
    groups = np.asarray([w.participant for w in windows])
    return Dataset(windows=windows, X_raw=X_raw, X=impute_column_mean(X_raw), y=y, groups=groups)
