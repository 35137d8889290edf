"""Single-participant session synthesis with planted ground truth.

The generative model is the simplest one that exhibits every effect the
pipeline must recover: heart rate follows the phase structure through a
logistic ramp, TVOC follows the (normalized) heart-rate excursion with a
planted sign and lag, and AR(1) noise rides on every channel. Sessions are a
pure function of the spec, bit-identical for the same seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from ..core.types import (
    CHANNELS,
    EnvironmentSummary,
    ParticipantMeta,
    Phase,
    SensorFrame,
    SessionRecord,
)
from ..preprocess import GSR_SCALE_K, norm_decrease

RAMP_TAU_S = 20.0  # logistic transition time constant at phase boundaries

# Simulated warm-up is shortened; the real protocol runs ~15 minutes of
# sensor warm-up that carries no analyzable signal.
DEFAULT_DURATIONS_S: dict[Phase, int] = {
    Phase.WARMUP: 60,
    Phase.BASELINE: 180,
    Phase.STROOP: 200,
    Phase.ARITHMETIC: 240,
    Phase.RECOVERY1: 120,
    Phase.RECOVERY2: 120,
    Phase.RECOVERY3: 120,
}

EMITTER_TARGETS = {"High": 0.73, "Low": 0.06}
# Stress-mean elevation planted when coupling is negative; a negative
# excursion cannot produce a positive mean, so it sits just below zero while
# staying inside the Low-emitter target band (|-0.03 - 0.06| < 0.1).
NEGATIVE_COUPLING_MEAN = -0.03


class Reactivity(str, Enum):
    HIGH = "High"
    LOW = "Low"


class Emitter(str, Enum):
    HIGH = "High"
    LOW = "Low"


@dataclass(frozen=True)
class NoiseLevels:
    hr_bpm: float = 0.8
    gsr_rel: float = 0.02
    tvoc_rel: Optional[float] = None  # None -> derived from snr_db
    gas_rel: float = 0.01
    rr_jitter_ms: float = 2.0


@dataclass(frozen=True)
class ParticipantSpec:
    participant_id: str
    seed: int
    reactivity: Reactivity = Reactivity.HIGH
    hr_delta: float = 15.0
    emitter: Emitter = Emitter.HIGH
    coupling_sign: int = 1
    coupling_lag_s: float = 40.0
    baseline_tvoc: float = 155.0
    breathing_rate: float = 14.0
    baseline_hr: float = 73.0
    baseline_gsr: float = 475.0
    gsr_gain: float = 1.32
    rsa_depth: float = 0.04
    resp_delta: float = 0.0  # breaths/min shift under stress (can be negative)
    ramp_tau_s: float = RAMP_TAU_S  # ~0 = instantaneous phase steps
    snr_db: float = 10.0
    noise: NoiseLevels = field(default_factory=NoiseLevels)
    age: int = 29
    gender: str = "na"
    durations_s: dict[Phase, int] = field(default_factory=lambda: dict(DEFAULT_DURATIONS_S))
    env_temp: float = 22.7
    env_humidity: float = 40.2
    env_pressure: float = 1001.4
    baseline_gas320: float = 36.0

    def validate(self) -> None:
        if self.coupling_sign not in (-1, 0, 1):
            raise ValueError("coupling_sign must be -1, 0 or +1")
        if self.coupling_sign != 0 and not 30.0 <= self.coupling_lag_s <= 80.0:
            raise ValueError("coupling lag must lie in [30, 80] s")
        if self.baseline_tvoc <= 0 or self.baseline_hr <= 0 or self.baseline_gsr <= 0:
            raise ValueError("baselines must be positive")
        if self.breathing_rate < 6.0 or self.breathing_rate > 30.0:
            raise ValueError("breathing rate outside the 0.10-0.50 Hz band")
        for ph, dur in self.durations_s.items():
            if dur <= 0 or dur % 5 != 0:
                raise ValueError(f"duration for {ph.name} must be a positive multiple of 5 s")


def _phase_starts(durations: dict[Phase, int]) -> dict[Phase, int]:
    starts = {}
    t = 0
    for ph in Phase:
        starts[ph] = t
        t += durations[ph]
    starts["end"] = t  # type: ignore[index]
    return starts


def _ramp(u: np.ndarray, tau: float) -> np.ndarray:
    # causal logistic: ~0 at the boundary, 0.5 at tau, ~1 past 2*tau
    if tau < 1e-6:
        return (u >= 0).astype(np.float64)
    out = 1.0 / (1.0 + np.exp(-(u - tau) / (tau / 5.0)))
    out[u < 0] = 0.0
    return out


def excursion(
    t_s: np.ndarray, durations: dict[Phase, int], tau: float = RAMP_TAU_S
) -> np.ndarray:
    """Normalized stress excursion in [0, 1]: up at Stroop, down at Recovery1."""
    starts = _phase_starts(durations)
    up = float(starts[Phase.STROOP])
    down = float(starts[Phase.RECOVERY1])
    return _ramp(t_s - up, tau) - _ramp(t_s - down, tau)


def _ar1(rng: np.random.Generator, n: int, sd: float, phi: float = 0.6) -> np.ndarray:
    if sd <= 0:
        return np.zeros(n)
    innov = rng.normal(0.0, sd * math.sqrt(1.0 - phi * phi), size=n)
    out = np.empty(n)
    acc = rng.normal(0.0, sd)
    for i in range(n):
        acc = phi * acc + innov[i]
        out[i] = acc
    return out


def _tvoc_amplitude(
    spec: ParticipantSpec,
    mean_excursion_stress: float,
    noise_mean_stress: float,
    noise_mean_baseline: float,
) -> float:
    """Signed relative TVOC amplitude hitting the emitter's stress-mean target.

    Solves (1 + A*e_bar + n_bar_s) / (1 + n_bar_b) - 1 = target so the
    realized elevation (normalized by the noisy baseline mean) lands on the
    target regardless of the noise draw.
    """
    if spec.coupling_sign == 0:
        return 0.0
    target = (
        EMITTER_TARGETS[spec.emitter.value]
        if spec.coupling_sign > 0
        else NEGATIVE_COUPLING_MEAN
    )
    return ((1.0 + target) * (1.0 + noise_mean_baseline) - 1.0 - noise_mean_stress) / (
        mean_excursion_stress
    )


def _ratings(spec: ParticipantSpec, rng: np.random.Generator) -> dict[str, int]:
    t1 = int(rng.integers(1, 3))
    if spec.reactivity is Reactivity.HIGH:
        t2 = min(5, t1 + int(rng.integers(1, 3)))
        t3 = min(6, t2 + int(rng.integers(1, 3)))
    else:
        t2 = min(6, t1 + int(rng.integers(0, 2)))
        t3 = max(1, min(6, t2 + int(rng.integers(-1, 2))))
    return {"T1": t1, "T2": t2, "T3": t3}


def simulate_participant(spec: ParticipantSpec) -> SessionRecord:
    """Synthesize one full 7-phase session from a participant spec."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    durations = dict(DEFAULT_DURATIONS_S)
    durations.update(spec.durations_s)
    starts = _phase_starts(durations)
    total_s = starts["end"]  # type: ignore[index]

    t_s = np.arange(total_s, dtype=np.float64)  # 1 Hz master grid
    exc = excursion(t_s, durations, spec.ramp_tau_s)
    stress_lo = starts[Phase.STROOP]
    stress_hi = starts[Phase.RECOVERY1]

    # --- heart rate (1 Hz) ---
    hr_clean = spec.baseline_hr + spec.hr_delta * exc
    hr_noise = _ar1(rng, total_s, spec.noise.hr_bpm)
    hr = np.maximum(30, np.rint(hr_clean + hr_noise)).astype(int)

    # --- RR beat train with respiratory sinus arrhythmia ---
    resp_rate = spec.breathing_rate + spec.resp_delta * exc
    beats_t: list[float] = []
    beats_rr: list[float] = []
    t_beat = float(rng.uniform(0.2, 1.0))
    breath_phase = float(rng.uniform(0.0, 2.0 * math.pi))
    while t_beat < total_s:
        idx = min(int(t_beat), total_s - 1)
        base_rr = 60000.0 / hr_clean[idx]
        f_b = resp_rate[idx] / 60.0
        breath_phase += 2.0 * math.pi * f_b * base_rr / 1000.0
        rr = base_rr * (1.0 + spec.rsa_depth * math.sin(breath_phase))
        rr += float(rng.normal(0.0, spec.noise.rr_jitter_ms))
        rr = min(3000.0, max(200.0, rr))
        t_beat += rr / 1000.0
        if t_beat < total_s:
            beats_t.append(t_beat)
            beats_rr.append(rr)

    # --- GSR: resistance drops as conductance rises with arousal ---
    cond = (GSR_SCALE_K / spec.baseline_gsr) * (1.0 + spec.gsr_gain * exc)
    gsr_clean = GSR_SCALE_K / cond
    gsr_noise = _ar1(rng, total_s, spec.noise.gsr_rel)
    gsr = np.maximum(1, np.rint(gsr_clean * (1.0 + gsr_noise))).astype(int)

    # --- TVOC follows the delayed excursion with planted sign/lag ---
    exc_lag = excursion(t_s - spec.coupling_lag_s, durations, spec.ramp_tau_s)
    slow = (np.arange(total_s) % 5) == 0  # the seconds VOC actually reports
    stress_slow = slow & (t_s >= stress_lo) & (t_s < stress_hi)
    base_slow = slow & (t_s >= starts[Phase.BASELINE]) & (t_s < stress_lo)
    mean_exc = float(exc_lag[stress_slow].mean())
    unit_noise = _ar1(rng, total_s, 1.0)
    if spec.noise.tvoc_rel is not None:
        tvoc_sd = spec.noise.tvoc_rel
    elif spec.coupling_sign != 0:
        amp0 = abs(_tvoc_amplitude(spec, mean_exc, 0.0, 0.0))
        tvoc_sd = amp0 * float(np.std(exc_lag)) / math.sqrt(10.0 ** (spec.snr_db / 10.0))
    else:
        tvoc_sd = 0.01
    amp = _tvoc_amplitude(
        spec,
        mean_exc,
        tvoc_sd * float(unit_noise[stress_slow].mean()),
        tvoc_sd * float(unit_noise[base_slow].mean()),
    )
    tvoc_rel = amp * exc_lag
    tvoc_noise = tvoc_sd * unit_noise
    tvoc = np.maximum(0, np.rint(spec.baseline_tvoc * (1.0 + tvoc_rel + tvoc_noise))).astype(int)

    # --- BME688: gas resistance falls when VOC exposure rises ---
    gas_noise = _ar1(rng, total_s, spec.noise.gas_rel)
    gas320 = spec.baseline_gas320 * (1.0 - 0.4 * tvoc_rel + gas_noise)
    gas320 = np.maximum(0.1, np.round(gas320, 1))
    gas250 = np.maximum(0.1, np.round(gas320 * 1.15, 1))
    gas400 = np.maximum(0.1, np.round(gas320 * 0.78, 1))

    # --- environment random walks (slow, small) ---
    temp = spec.env_temp + np.cumsum(rng.normal(0.0, 0.01, total_s))
    hum = spec.env_humidity + np.cumsum(rng.normal(0.0, 0.02, total_s))
    pres = spec.env_pressure + np.cumsum(rng.normal(0.0, 0.005, total_s))

    eco2 = np.rint(420 + 55 * exc_lag + rng.normal(0, 4, total_s)).astype(int)
    aqi = np.clip(1 + np.rint(np.abs(tvoc / max(spec.baseline_tvoc, 1.0) - 1.0) * 3).astype(int), 1, 5)

    # --- markers ---
    ms = lambda s: int(s * 1000)
    markers: list[tuple[int, str]] = [(0, "SESSION_START")]
    for ph in list(Phase)[1:]:
        markers.append((ms(starts[ph]), f"PHASE_{int(ph)}_START"))
    ratings = _ratings(spec, rng)
    markers.append((ms(starts[Phase.STROOP]) - 2000, f"RATING_T1={ratings['T1']}"))
    markers.append((ms(starts[Phase.ARITHMETIC]) - 2000, f"RATING_T2={ratings['T2']}"))
    markers.append((ms(starts[Phase.RECOVERY1]) - 2000, f"RATING_T3={ratings['T3']}"))
    markers.append((ms(total_s), "SESSION_END"))
    markers.sort(key=lambda m: m[0])

    # --- baseline means for the firmware-style normalized fields ---
    base_lo, base_hi = starts[Phase.BASELINE], starts[Phase.STROOP]
    base_slice = slice(base_lo, base_hi)
    tvoc_base = float(tvoc[base_slice].mean())
    gas_base = float(gas320[base_slice].mean())
    gsr_base = float(gsr[base_slice].mean())

    def phase_at(sec: int) -> Phase:
        current = Phase.WARMUP
        for ph in Phase:
            if sec >= starts[ph]:
                current = ph
        return current

    frames: list[SensorFrame] = []
    beat_idx = 0
    for sec in range(total_s):
        ph = phase_at(sec)
        slow = sec % 5 == 0
        rr_list: list[int] = []
        while beat_idx < len(beats_t) and beats_t[beat_idx] <= sec + 1e-9:
            rr_list.append(int(round(beats_rr[beat_idx])))
            beat_idx += 1
        in_experiment = sec >= base_hi
        kwargs = dict(
            timestamp=ms(sec),
            hr=int(hr[sec]),
            rr_intervals=tuple(min(3000, max(200, r)) for r in rr_list),
            phase_id=ph,
        )
        if slow:
            kwargs.update(
                gsr_raw=int(gsr[sec]),
                gas250=float(gas250[sec]),
                gas320=float(gas320[sec]),
                gas400=float(gas400[sec]),
                aqi=int(aqi[sec]),
                tvoc=int(tvoc[sec]),
                eco2=int(eco2[sec]),
                temp_bme=round(float(temp[sec]), 2),
                temp_ens=round(float(temp[sec]) + 0.4, 2),
                humidity_bme=int(np.clip(round(hum[sec]), 0, 100)),
                humidity_ens=int(np.clip(round(hum[sec]) - 1, 0, 100)),
                pressure=round(float(pres[sec]), 2),
                gas320_norm=round(norm_decrease(gas_base, float(gas320[sec])), 6)
                if in_experiment
                else 0.0,
                tvoc_norm=round(norm_decrease(tvoc_base, float(tvoc[sec])), 6)
                if in_experiment
                else 0.0,
                gsr_norm=round(norm_decrease(gsr_base, float(gsr[sec])), 6)
                if in_experiment
                else 0.0,
            )
        frames.append(SensorFrame(**kwargs))

    temp_vals = temp[::5]
    hum_vals = hum[::5]
    pres_vals = pres[::5]
    environment = EnvironmentSummary(
        temp_mean=round(float(temp_vals.mean()), 3),
        temp_sd=round(float(temp_vals.std(ddof=1)), 3),
        humidity_mean=round(float(hum_vals.mean()), 3),
        humidity_sd=round(float(hum_vals.std(ddof=1)), 3),
        pressure_mean=round(float(pres_vals.mean()), 3),
        pressure_sd=round(float(pres_vals.std(ddof=1)), 3),
    )
    meta = ParticipantMeta(
        id=spec.participant_id,
        age=spec.age,
        gender=spec.gender,
        confounds={"alcohol_24h": "no", "caffeine": "no", "fragrance_use": "no"},
        stress_ratings=ratings,
    )
    return SessionRecord(
        meta=meta,
        frames=tuple(frames),
        markers=tuple(markers),
        environment=environment,
        channel_availability={c: True for c in CHANNELS},
    )


def drop_channels(record: SessionRecord, unavailable: set[str]) -> SessionRecord:
    """Strip the given channels' fields from every frame and flag them off."""
    from ..core.types import CHANNEL_FIELDS

    if not unavailable:
        return record
    fields_off: set[str] = set()
    for ch in unavailable:
        fields_off.update(CHANNEL_FIELDS[ch])
    new_frames = []
    for f in record.frames:
        kwargs = {}
        for name in fields_off:
            kwargs[name] = () if name == "rr_intervals" else None
        new_frames.append(replace(f, **kwargs))
    availability = dict(record.channel_availability)
    for ch in unavailable:
        availability[ch] = False
    return replace(record, frames=tuple(new_frames), channel_availability=availability)
