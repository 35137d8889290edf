"""Live session runner: phase state machine, marker log, rating gates.

One active session at a time. All mutations funnel through a single lock;
readers get consistent snapshots. Rating checkpoints gate the transitions
out of Baseline (T1), Stroop (T2) and Arithmetic (T3). Completing Phase 7
writes the archive.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..core.archive import write_archive
from ..core.types import (
    CHANNELS,
    EnvironmentSummary,
    NOMINAL_DURATION_S,
    ParticipantMeta,
    Phase,
    SensorFrame,
    SessionRecord,
)


class SessionError(Exception):
    status = 400


class SessionActive(SessionError):
    status = 409


class SessionComplete(SessionError):
    status = 409


class UnknownSession(SessionError):
    status = 404


class RatingGate(SessionError):
    status = 409

    def __init__(self, checkpoint: str):
        self.checkpoint = checkpoint
        super().__init__(f"rating {checkpoint} required before advancing")


class WrongCheckpoint(SessionError):
    status = 400


class OutOfRange(SessionError):
    status = 400


# Checkpoint that must be recorded before leaving each phase.
GATE_BEFORE_LEAVING = {Phase.BASELINE: "T1", Phase.STROOP: "T2", Phase.ARITHMETIC: "T3"}

COMMAND_BASELINE = "BASELINE"
COMMAND_EXPERIMENT = "EXPERIMENT"
COMMAND_STOP = "STOP"


class ManualClock:
    """Millisecond clock advanced explicitly; lets tests script real sessions."""

    def __init__(self):
        self._ms = 0

    def now_ms(self) -> int:
        return self._ms

    def advance(self, ms: int) -> None:
        self._ms += int(ms)


class MonotonicClock:
    def __init__(self):
        self._origin = time.monotonic()

    def now_ms(self) -> int:
        return int((time.monotonic() - self._origin) * 1000)


@dataclass
class SessionState:
    session_id: str
    phase: Phase
    phase_entered_ms: int
    now_ms: int
    pending_rating: Optional[str]
    sensor_mode: str  # idle | baseline | experiment
    done: bool
    markers: list[tuple[int, str]]
    ratings: dict[str, int]

    def snapshot(self) -> dict:
        nominal = NOMINAL_DURATION_S[self.phase]
        return {
            "session_id": self.session_id,
            "phase": int(self.phase),
            "phase_name": self.phase.name.title(),
            "phase_entered_ms": self.phase_entered_ms,
            "now_ms": self.now_ms,
            "phase_elapsed_ms": self.now_ms - self.phase_entered_ms,
            "nominal_duration_s": nominal,
            "pending_rating": self.pending_rating,
            "sensor_mode": self.sensor_mode,
            "done": self.done,
            "markers": [[ts, name] for ts, name in self.markers],
            "ratings": dict(self.ratings),
        }


def _pending_for(phase: Phase, ratings: dict[str, int]) -> Optional[str]:
    cp = GATE_BEFORE_LEAVING.get(phase)
    if cp is not None and cp not in ratings:
        return cp
    return None


class SessionService:
    """Owns the single active session; thread-safe."""

    def __init__(
        self,
        clock=None,
        bridge=None,
        archive_dir: str = ".",
        on_command: Optional[Callable[[str], None]] = None,
    ):
        self._clock = clock or MonotonicClock()
        self._bridge = bridge
        self._archive_dir = archive_dir
        self._on_command = on_command
        self._lock = threading.RLock()
        self._session_id: Optional[str] = None
        self._meta: Optional[ParticipantMeta] = None
        self._phase = Phase.WARMUP
        self._phase_entered = 0
        self._done = False
        self._markers: list[tuple[int, str]] = []
        self._ratings: dict[str, int] = {}
        self._frames: list[SensorFrame] = []
        self._sensor_mode = "idle"
        self.archive_path: Optional[str] = None

    # -- internals -------------------------------------------------------

    def _mark(self, event: str) -> None:
        ts = self._clock.now_ms()
        if self._markers and ts < self._markers[-1][0]:
            ts = self._markers[-1][0]
        self._markers.append((ts, event))

    def _command(self, name: str) -> None:
        if self._bridge is not None:
            self._bridge.send_command(name)
        if self._on_command is not None:
            self._on_command(name)

    def _require_session(self, session_id: str) -> None:
        if self._session_id is None or session_id != self._session_id:
            raise UnknownSession(f"no active session {session_id!r}")

    # -- operations ------------------------------------------------------

    def start_session(self, meta: ParticipantMeta) -> str:
        with self._lock:
            if self._session_id is not None and not self._done:
                raise SessionActive("a session is already running")
            if meta.stress_ratings:
                raise SessionError("stress ratings are captured live, not preset")
            self._session_id = uuid.uuid4().hex[:12]
            self._meta = meta
            self._phase = Phase.WARMUP
            self._phase_entered = self._clock.now_ms()
            self._done = False
            self._markers = []
            self._ratings = {}
            self._frames = []
            self._sensor_mode = "idle"
            self.archive_path = None
            self._mark("SESSION_START")
            return self._session_id

    def ingest_frame(self, frame: SensorFrame) -> None:
        """Store a frame; the service clock bounds the bridge timestamp.

        Bridge clocks are untrusted: stamps are clamped into the open window
        since the last stored frame and never exceed the service clock. A
        frame with no room in that window is dropped.
        """
        with self._lock:
            if self._session_id is None or self._done:
                return
            now = self._clock.now_ms()
            last = self._frames[-1].timestamp if self._frames else -1
            ts = min(max(frame.timestamp, last + 1), now)
            if ts <= last:
                return
            from dataclasses import replace

            self._frames.append(replace(frame, timestamp=ts, phase_id=self._phase))

    def pump_bridge(self) -> int:
        """Drain available bridge lines into the session; returns frame count."""
        if self._bridge is None:
            return 0
        n = 0
        for frame in self._bridge.poll(self._clock.now_ms()):
            self.ingest_frame(frame)
            n += 1
        return n

    def record_rating(self, session_id: str, checkpoint: str, value: int) -> dict:
        with self._lock:
            self._require_session(session_id)
            if self._done:
                raise SessionComplete("session finished")
            pending = _pending_for(self._phase, self._ratings)
            if checkpoint not in ("T1", "T2", "T3"):
                raise WrongCheckpoint(f"unknown checkpoint {checkpoint!r}")
            if pending != checkpoint:
                raise WrongCheckpoint(
                    f"checkpoint {checkpoint} not pending"
                    + (f" (waiting for {pending})" if pending else "")
                )
            if not isinstance(value, int) or not 1 <= value <= 6:
                raise OutOfRange(f"rating {value!r} outside 1..6")
            self._ratings[checkpoint] = value
            self._mark(f"RATING_{checkpoint}={value}")
            return self.get_state(session_id).snapshot()

    def advance_phase(self, session_id: str) -> dict:
        with self._lock:
            self._require_session(session_id)
            if self._done:
                raise SessionComplete("session finished")
            pending = _pending_for(self._phase, self._ratings)
            if pending is not None:
                raise RatingGate(pending)
            if self._phase == Phase.RECOVERY3:
                self._finish()
            else:
                new_phase = Phase(int(self._phase) + 1)
                self._phase = new_phase
                self._phase_entered = self._clock.now_ms()
                self._mark(f"PHASE_{int(new_phase)}_START")
                if new_phase == Phase.BASELINE:
                    self._sensor_mode = "baseline"
                    self._command(COMMAND_BASELINE)
                elif new_phase == Phase.STROOP:
                    self._sensor_mode = "experiment"
                    self._command(COMMAND_EXPERIMENT)
            return self.get_state(session_id).snapshot()

    def _finish(self) -> None:
        self._mark("SESSION_END")
        self._sensor_mode = "idle"
        self._command(COMMAND_STOP)
        self._done = True
        record = self.build_record()
        import os

        path = os.path.join(self._archive_dir, f"session_{self._meta.id}.txt")
        write_archive(record, path)
        self.archive_path = path

    def build_record(self) -> SessionRecord:
        from dataclasses import replace as dc_replace

        meta = dc_replace(self._meta, stress_ratings=dict(self._ratings))
        frames = tuple(self._frames)
        temp = [f.temp_bme for f in frames if f.temp_bme is not None]
        hum = [f.humidity_bme for f in frames if f.humidity_bme is not None]
        pres = [f.pressure for f in frames if f.pressure is not None]

        def _mean_sd(vals):
            if not vals:
                return None, None
            import numpy as np

            arr = np.asarray(vals, dtype=float)
            return (
                round(float(arr.mean()), 3),
                round(float(arr.std(ddof=1)), 3) if arr.size > 1 else 0.0,
            )

        t_m, t_s = _mean_sd(temp)
        h_m, h_s = _mean_sd(hum)
        p_m, p_s = _mean_sd(pres)
        availability = {}
        from ..core.types import CHANNEL_FIELDS

        for ch in CHANNELS:
            availability[ch] = any(
                (getattr(f, name) is not None if name != "rr_intervals" else bool(f.rr_intervals))
                for f in frames
                for name in CHANNEL_FIELDS[ch]
            )
        return SessionRecord(
            meta=meta,
            frames=frames,
            markers=tuple(self._markers),
            environment=EnvironmentSummary(
                temp_mean=t_m, temp_sd=t_s, humidity_mean=h_m, humidity_sd=h_s,
                pressure_mean=p_m, pressure_sd=p_s,
            ),
            channel_availability=availability,
        )

    def get_state(self, session_id: str) -> SessionState:
        with self._lock:
            self._require_session(session_id)
            return SessionState(
                session_id=self._session_id,
                phase=self._phase,
                phase_entered_ms=self._phase_entered,
                now_ms=self._clock.now_ms(),
                pending_rating=None if self._done else _pending_for(self._phase, self._ratings),
                sensor_mode=self._sensor_mode,
                done=self._done,
                markers=list(self._markers),
                ratings=dict(self._ratings),
            )

    def recent_signals(self, since_ms: int, max_per_channel: int = 10) -> dict:
        """Decimated (t, value) pairs per channel since a timestamp."""
        with self._lock:
            frames = [f for f in self._frames if f.timestamp > since_ms]
            now = self._clock.now_ms()
            tail = [f for f in self._frames if f.timestamp > now - 90_000]
        out: dict[str, list[list[float]]] = {
            "hr": [], "gsr": [], "tvoc": [], "gas320": [], "resp": []
        }
        for f in frames:
            for name, field_name in (
                ("hr", "hr"),
                ("gsr", "gsr_raw"),
                ("tvoc", "tvoc"),
                ("gas320", "gas320"),
            ):
                v = getattr(f, field_name)
                if v is not None and len(out[name]) < max_per_channel:
                    out[name].append([f.timestamp, float(v)])
        resp = self._respiration_estimate(tail, now)
        if resp is not None and frames:
            out["resp"].append([now, resp])
        return out

    @staticmethod
    def _respiration_estimate(frames, now_ms: int):
        """Breaths/min over the trailing minute of RR data, if determinable."""
        from ..ingest.align import beat_times_from_frames
        from ..ingest.respiration import MIN_INTERVALS, dominant_band_frequency

        t, rr = beat_times_from_frames(frames)
        if t.size < MIN_INTERVALS or t[-1] - t[0] < 45_000:
            return None
        f = dominant_band_frequency(t / 1000.0, rr)
        return None if f is None else round(60.0 * f, 2)


def replay_markers(markers: list[tuple[int, str]]) -> SessionState:
    """Event-sourcing check: rebuild the final state purely from the log."""
    phase = Phase.WARMUP
    entered = 0
    ratings: dict[str, int] = {}
    done = False
    sensor_mode = "idle"
    last_ts = 0
    for ts, name in markers:
        last_ts = ts
        if name == "SESSION_START":
            phase, entered, ratings, done, sensor_mode = Phase.WARMUP, ts, {}, False, "idle"
        elif name.startswith("PHASE_") and name.endswith("_START"):
            phase = Phase(int(name.split("_")[1]))
            entered = ts
            if phase == Phase.BASELINE:
                sensor_mode = "baseline"
            elif phase == Phase.STROOP:
                sensor_mode = "experiment"
        elif name.startswith("RATING_T") and "=" in name:
            cp, val = name[len("RATING_") :].split("=")
            ratings[cp] = int(val)
        elif name == "SESSION_END":
            done = True
            sensor_mode = "idle"
    return SessionState(
        session_id="replay",
        phase=phase,
        phase_entered_ms=entered,
        now_ms=last_ts,
        pending_rating=None if done else _pending_for(phase, ratings),
        sensor_mode=sensor_mode,
        done=done,
        markers=list(markers),
        ratings=ratings,
    )
