"""Session invariant checks. The validator reports; it never raises."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .types import (
    CHANNEL_FIELDS,
    FRAME_FIELDS,
    Phase,
    RATING_CHECKPOINTS,
    SessionRecord,
)

_FIELD_KIND = dict(FRAME_FIELDS)


@dataclass(frozen=True)
class Violation:
    rule: str
    field: Optional[str] = None
    index: Optional[int] = None
    detail: str = ""

    def __str__(self) -> str:
        where = "" if self.index is None else f" frames[{self.index}]"
        what = "" if self.field is None else f" {self.field}"
        return f"{self.rule}:{where}{what} {self.detail}".rstrip()


def _check_frame_ranges(record: SessionRecord, out: list[Violation]) -> None:
    for i, f in enumerate(record.frames):
        for rr in f.rr_intervals:
            if not 200 <= rr <= 3000:
                out.append(
                    Violation("rr-range", "rr_intervals", i, f"{rr} outside [200, 3000] ms")
                )
        if f.tvoc is not None and f.tvoc < 0:
            out.append(Violation("tvoc-nonneg", "tvoc", i, f"{f.tvoc} < 0"))
        for g in ("gas250", "gas320", "gas400"):
            v = getattr(f, g)
            if v is not None and v <= 0:
                out.append(Violation("gas-positive", g, i, f"{v} <= 0"))
        for h in ("humidity_bme", "humidity_ens"):
            v = getattr(f, h)
            if v is not None and not 0 <= v <= 100:
                out.append(Violation("humidity-range", h, i, f"{v} outside [0, 100]"))
        if f.aqi is not None and not 1 <= f.aqi <= 5:
            out.append(Violation("aqi-range", "aqi", i, f"{f.aqi} outside [1, 5]"))


def _check_markers(record: SessionRecord, out: list[Violation]) -> None:
    last_ts = None
    for ts, name in record.markers:
        if last_ts is not None and ts < last_ts:
            out.append(Violation("marker-order", None, None, f"{name} at {ts} after {last_ts}"))
        last_ts = ts

    phase_times: dict[int, int] = {}
    for ts, name in record.markers:
        if name.startswith("PHASE_") and name.endswith("_START"):
            try:
                k = int(name.split("_")[1])
            except ValueError:
                out.append(Violation("marker-name", None, None, f"bad phase marker {name!r}"))
                continue
            if k in phase_times:
                out.append(Violation("phase-marker-dup", None, None, f"{name} appears twice"))
            else:
                phase_times[k] = ts
    ordered = sorted(phase_times)
    for a, b in zip(ordered, ordered[1:]):
        if phase_times[a] >= phase_times[b]:
            out.append(
                Violation(
                    "phase-protocol-order",
                    None,
                    None,
                    f"PHASE_{b}_START at {phase_times[b]} not after PHASE_{a}_START",
                )
            )

    rating_times = {}
    for ts, name in record.markers:
        if name.startswith("RATING_T") and "=" in name:
            rating_times[name.split("=")[0][len("RATING_") :]] = ts
    seen = [rating_times[c] for c in RATING_CHECKPOINTS if c in rating_times]
    if len(seen) == len(RATING_CHECKPOINTS) and seen != sorted(seen):
        out.append(Violation("rating-order", None, None, "T1/T2/T3 markers out of order"))


def _check_ratings(record: SessionRecord, out: list[Violation]) -> None:
    for cp, v in record.meta.stress_ratings.items():
        if cp not in RATING_CHECKPOINTS:
            out.append(Violation("rating-checkpoint", None, None, f"unknown checkpoint {cp!r}"))
        if not 1 <= v <= 6:
            out.append(Violation("rating-range", None, None, f"rating {cp}={v} out of 1..6"))


def _check_channels(record: SessionRecord, out: list[Violation]) -> None:
    for channel, available in record.channel_availability.items():
        if available or channel not in CHANNEL_FIELDS:
            continue
        for i, f in enumerate(record.frames):
            for name in CHANNEL_FIELDS[channel]:
                v = getattr(f, name)
                missing = v == () if _FIELD_KIND[name] == "rr" else v is None
                if not missing:
                    out.append(
                        Violation(
                            "channel-unavailable",
                            name,
                            i,
                            f"channel {channel!r} marked unavailable but has data",
                        )
                    )
                    break
            else:
                continue
            break


def validate_session(record: SessionRecord) -> list[Violation]:
    """All invariant violations in a session; empty list means well-formed."""
    out: list[Violation] = []
    prev = None
    for i, f in enumerate(record.frames):
        if prev is not None and f.timestamp <= prev:
            out.append(
                Violation("frame-order", "timestamp", i, f"{f.timestamp} not above {prev}")
            )
        prev = f.timestamp
        if not isinstance(f.phase_id, Phase):
            out.append(Violation("phase-id", "phase_id", i, f"{f.phase_id!r} not a Phase"))
    _check_frame_ranges(record, out)
    _check_markers(record, out)
    _check_ratings(record, out)
    _check_channels(record, out)
    return out
