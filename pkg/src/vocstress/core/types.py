"""Shared domain types: phases, frames, participants, sessions.

Everything here is an immutable value type; construction is cheap and
instances can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Optional


class Phase(IntEnum):
    WARMUP = 1
    BASELINE = 2
    STROOP = 3
    ARITHMETIC = 4
    RECOVERY1 = 5
    RECOVERY2 = 6
    RECOVERY3 = 7


# Nominal phase durations in seconds. Warmup is operator-terminated and has
# no nominal bound. Actual durations always come from the marker log.
NOMINAL_DURATION_S: dict[Phase, Optional[int]] = {
    Phase.WARMUP: None,
    Phase.BASELINE: 180,
    Phase.STROOP: 200,
    Phase.ARITHMETIC: 240,
    Phase.RECOVERY1: 120,
    Phase.RECOVERY2: 120,
    Phase.RECOVERY3: 120,
}

STRESS_PHASES = frozenset({Phase.STROOP, Phase.ARITHMETIC})
NONSTRESS_PHASES = frozenset(
    {Phase.BASELINE, Phase.RECOVERY1, Phase.RECOVERY2, Phase.RECOVERY3}
)


class StressLabel(Enum):
    STRESS = "Stress"
    NON_STRESS = "NonStress"
    UNLABELED = "Unlabeled"


def label_for_phase(phase: Phase) -> StressLabel:
    """Binary stress label for a protocol phase; warmup stays unlabeled."""
    if phase in STRESS_PHASES:
        return StressLabel.STRESS
    if phase in NONSTRESS_PHASES:
        return StressLabel.NON_STRESS
    return StressLabel.UNLABELED


# Canonical frame layout: field name -> codec kind. Order is frozen; the wire
# protocol, the archive FRAMES section and all golden files depend on it.
# "int" and "real" fields are nullable (missing -> "NA"); "rr" is a
# semicolon-joined list of interval ms where the empty list spells "NA";
# "phase" is a required Phase id.
FRAME_FIELDS: tuple[tuple[str, str], ...] = (
    ("hr", "int"),
    ("rr_intervals", "rr"),
    ("gsr_raw", "int"),
    ("gas250", "real"),
    ("gas320", "real"),
    ("gas400", "real"),
    ("aqi", "int"),
    ("tvoc", "int"),
    ("eco2", "int"),
    ("temp_bme", "real"),
    ("temp_ens", "real"),
    ("humidity_bme", "int"),
    ("humidity_ens", "int"),
    ("pressure", "real"),
    ("gas320_norm", "real"),
    ("tvoc_norm", "real"),
    ("gsr_norm", "real"),
    ("phase_id", "phase"),
)

FRAME_COLUMNS: tuple[str, ...] = ("timestamp",) + tuple(n for n, _ in FRAME_FIELDS)

# Acquisition channels and the frame fields each one feeds. A channel marked
# unavailable must contribute only missing values for its fields.
CHANNEL_FIELDS: dict[str, tuple[str, ...]] = {
    "hr": ("hr", "rr_intervals"),
    "gsr": ("gsr_raw", "gsr_norm"),
    "tvoc": ("aqi", "tvoc", "eco2", "temp_ens", "humidity_ens", "tvoc_norm"),
    "gas320": (
        "gas250",
        "gas320",
        "gas400",
        "temp_bme",
        "humidity_bme",
        "pressure",
        "gas320_norm",
    ),
}
CHANNELS: tuple[str, ...] = tuple(CHANNEL_FIELDS)


@dataclass(frozen=True, slots=True)
class SensorFrame:
    """One timestamped measurement cycle from the acquisition bridge.

    ``timestamp`` is milliseconds since session start. Missing readings are
    ``None`` (never zero: zero is a legal GSR/TVOC value). ``rr_intervals``
    holds the beat-to-beat intervals that completed since the previous frame;
    the empty tuple doubles as its missing marker.
    """

    timestamp: int
    hr: Optional[int] = None
    rr_intervals: tuple[int, ...] = ()
    gsr_raw: Optional[int] = None
    gas250: Optional[float] = None
    gas320: Optional[float] = None
    gas400: Optional[float] = None
    aqi: Optional[int] = None
    tvoc: Optional[int] = None
    eco2: Optional[int] = None
    temp_bme: Optional[float] = None
    temp_ens: Optional[float] = None
    humidity_bme: Optional[int] = None
    humidity_ens: Optional[int] = None
    pressure: Optional[float] = None
    gas320_norm: Optional[float] = None
    tvoc_norm: Optional[float] = None
    gsr_norm: Optional[float] = None
    phase_id: Phase = Phase.WARMUP


RATING_CHECKPOINTS = ("T1", "T2", "T3")

# Confound questionnaire keys captured before baseline.
CONFOUND_KEYS = (
    "sleep_quality",
    "sleep_duration",
    "alcohol_24h",
    "caffeine",
    "tobacco",
    "medication",
    "health_flags",
    "food_3h",
    "exertion",
    "fragrance_use",
)


@dataclass(frozen=True, slots=True)
class ParticipantMeta:
    """Participant identity, confound questionnaire and momentary stress ratings."""

    id: str
    age: Optional[int] = None
    gender: str = "na"
    confounds: dict[str, str] = field(default_factory=dict)
    stress_ratings: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class EnvironmentSummary:
    temp_mean: Optional[float] = None
    temp_sd: Optional[float] = None
    humidity_mean: Optional[float] = None
    humidity_sd: Optional[float] = None
    pressure_mean: Optional[float] = None
    pressure_sd: Optional[float] = None


@dataclass(frozen=True, slots=True)
class SessionRecord:
    """A participant's aligned multimodal session: frames, markers, metadata."""

    meta: ParticipantMeta
    frames: tuple[SensorFrame, ...]
    markers: tuple[tuple[int, str], ...]
    environment: EnvironmentSummary = field(default_factory=EnvironmentSummary)
    channel_availability: dict[str, bool] = field(
        default_factory=lambda: {c: True for c in CHANNELS}
    )

    def marker_time(self, event: str) -> Optional[int]:
        for ts, name in self.markers:
            if name == event:
                return ts
        return None

    def phase_start(self, phase: Phase) -> Optional[int]:
        return self.marker_time(f"PHASE_{int(phase)}_START")


def _encode_real(x: float) -> str:
    # repr() is the shortest decimal that round-trips a float64.
    if x != x or x in (float("inf"), float("-inf")):
        raise ValueError(f"non-finite real {x!r} cannot be serialized")
    return repr(float(x))


def encode_value(kind: str, value) -> str:
    """Render one frame field in the canonical text form (missing -> 'NA')."""
    if kind == "rr":
        return ";".join(str(int(v)) for v in value) if value else "NA"
    if value is None:
        return "NA"
    if kind == "int":
        return str(int(value))
    if kind == "real":
        return _encode_real(value)
    if kind == "phase":
        return str(int(value))
    raise ValueError(f"unknown field kind {kind!r}")


def decode_value(kind: str, text: str):
    """Inverse of :func:`encode_value`. Raises ValueError on malformed text."""
    if kind == "rr":
        if text == "NA":
            return ()
        return tuple(int(p) for p in text.split(";"))
    if text == "NA":
        if kind == "phase":
            raise ValueError("phase id is required")
        return None
    if kind == "int":
        return int(text)
    if kind == "real":
        v = float(text)
        if v != v or v in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite real {text!r}")
        return v
    if kind == "phase":
        return Phase(int(text))
    raise ValueError(f"unknown field kind {kind!r}")


def frame_to_values(frame: SensorFrame) -> list[str]:
    """Canonical column texts for a frame, timestamp first.

    Inlined per-field encoding: this sits on the wire/archive hot path.
    """
    f = frame
    return [
        str(f.timestamp),
        "NA" if f.hr is None else str(f.hr),
        ";".join(map(str, f.rr_intervals)) if f.rr_intervals else "NA",
        "NA" if f.gsr_raw is None else str(f.gsr_raw),
        "NA" if f.gas250 is None else _encode_real(f.gas250),
        "NA" if f.gas320 is None else _encode_real(f.gas320),
        "NA" if f.gas400 is None else _encode_real(f.gas400),
        "NA" if f.aqi is None else str(f.aqi),
        "NA" if f.tvoc is None else str(f.tvoc),
        "NA" if f.eco2 is None else str(f.eco2),
        "NA" if f.temp_bme is None else _encode_real(f.temp_bme),
        "NA" if f.temp_ens is None else _encode_real(f.temp_ens),
        "NA" if f.humidity_bme is None else str(f.humidity_bme),
        "NA" if f.humidity_ens is None else str(f.humidity_ens),
        "NA" if f.pressure is None else _encode_real(f.pressure),
        "NA" if f.gas320_norm is None else _encode_real(f.gas320_norm),
        "NA" if f.tvoc_norm is None else _encode_real(f.tvoc_norm),
        "NA" if f.gsr_norm is None else _encode_real(f.gsr_norm),
        str(int(f.phase_id)),
    ]


def frame_from_values(values: list[str]) -> SensorFrame:
    """Build a frame from canonical column texts (timestamp first)."""
    if len(values) != len(FRAME_COLUMNS):
        raise ValueError(
            f"expected {len(FRAME_COLUMNS)} columns, got {len(values)}"
        )
    ts = int(values[0])
    kwargs = {}
    for (name, kind), text in zip(FRAME_FIELDS, values[1:]):
        kwargs[name] = decode_value(kind, text)
    return SensorFrame(timestamp=ts, **kwargs)
