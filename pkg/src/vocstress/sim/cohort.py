"""Cohort assembly: group mixes, channel dropout, environment spread."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .participant import (
    Emitter,
    NoiseLevels,
    ParticipantSpec,
    Reactivity,
    drop_channels,
    simulate_participant,
)

# Group ranges for the baseline-to-stress heart-rate change (bpm).
HIGH_REACTOR_RANGE = (10.6, 26.4)
LOW_REACTOR_RANGE = (2.2, 9.4)

# Channel availability mirrors the observed dropout: GSR 19/25, HR 24/25.
DEFAULT_DROPOUT = {"hr": 24 / 25, "gsr": 19 / 25, "tvoc": 1.0, "gas320": 1.0}


@dataclass(frozen=True)
class EnvModel:
    temp_mean: float = 22.7
    temp_sd: float = 1.9
    humidity_mean: float = 40.2
    humidity_sd: float = 8.6
    pressure_mean: float = 1001.4
    pressure_sd: float = 7.9


@dataclass(frozen=True)
class CohortSpec:
    n: int = 24
    high_reactor_frac: float = 0.5
    sign_pos_frac: float = 0.5
    sign_neg_frac: float = 0.5  # remainder after pos+neg is null coupling
    dropout: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_DROPOUT))
    env: EnvModel = field(default_factory=EnvModel)
    baseline_tvoc_range: tuple[float, float] = (8.0, 689.0)
    breathing_range: tuple[float, float] = (11.0, 18.0)
    snr_db: float = 10.0
    hr_noise_bpm: float = 0.8
    gsr_noise_rel: float = 0.02
    tvoc_noise_rel: Optional[float] = None
    resp_delta: float = 0.0
    min_baseline_tvoc: float = 0.0  # raise to keep integer ppb quantization negligible
    baseline_hr_sd: float = 9.6  # between-participant spread of resting HR
    ramp_tau_s: float = 20.0
    baseline_gsr_range: tuple[float, float] = (250.0, 750.0)
    gsr_gain_range: tuple[float, float] = (0.6, 2.2)

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("cohort size must be >= 1")
        for name in ("high_reactor_frac", "sign_pos_frac", "sign_neg_frac"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} outside [0, 1]")
        if self.sign_pos_frac + self.sign_neg_frac > 1.0 + 1e-9:
            raise ValueError("sign fractions exceed 1")
        for ch, p in self.dropout.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"dropout probability for {ch} outside [0, 1]")


@dataclass(frozen=True)
class CohortResult:
    specs: list[ParticipantSpec]
    sessions: list  # SessionRecord, same order as specs


def _mix_counts(n: int, fracs: list[float]) -> list[int]:
    """Largest-remainder apportionment of n into len(fracs) groups."""
    raw = [f * n for f in fracs]
    counts = [int(np.floor(r)) for r in raw]
    rem = n - sum(counts)
    order = sorted(range(len(fracs)), key=lambda i: raw[i] - counts[i], reverse=True)
    for i in order[:rem]:
        counts[i] += 1
    return counts


def build_specs(spec: CohortSpec, seed: int) -> list[ParticipantSpec]:
    """Participant specs for a cohort; deterministic in (spec, seed)."""
    spec.validate()
    rng = np.random.default_rng(seed)
    width = max(2, len(str(spec.n)))

    n_high = _mix_counts(spec.n, [spec.high_reactor_frac, 1 - spec.high_reactor_frac])[0]
    reactivity = [Reactivity.HIGH] * n_high + [Reactivity.LOW] * (spec.n - n_high)
    sign_counts = _mix_counts(
        spec.n,
        [spec.sign_pos_frac, spec.sign_neg_frac, 1 - spec.sign_pos_frac - spec.sign_neg_frac],
    )
    signs = [1] * sign_counts[0] + [-1] * sign_counts[1] + [0] * sign_counts[2]
    rng.shuffle(reactivity)
    rng.shuffle(signs)

    child_seeds = np.random.SeedSequence(seed).spawn(spec.n)
    specs = []
    for i in range(spec.n):
        react = reactivity[i]
        lo, hi = HIGH_REACTOR_RANGE if react is Reactivity.HIGH else LOW_REACTOR_RANGE
        sign = signs[i]
        emitter = Emitter.HIGH if sign > 0 else Emitter.LOW
        tv_lo = max(spec.baseline_tvoc_range[0], spec.min_baseline_tvoc)
        tv_hi = max(spec.baseline_tvoc_range[1], tv_lo + 1.0)
        specs.append(
            ParticipantSpec(
                participant_id=f"P{i + 1:0{width}d}",
                seed=int(child_seeds[i].generate_state(1)[0]),
                reactivity=react,
                hr_delta=float(rng.uniform(lo, hi)),
                emitter=emitter,
                coupling_sign=sign,
                coupling_lag_s=float(rng.integers(30, 81)),
                baseline_tvoc=float(np.round(rng.uniform(tv_lo, tv_hi))),
                breathing_rate=float(rng.uniform(*spec.breathing_range)),
                baseline_hr=float(np.clip(rng.normal(73.0, spec.baseline_hr_sd), 50.0, 110.0)),
                baseline_gsr=float(rng.uniform(*spec.baseline_gsr_range)),
                gsr_gain=float(rng.uniform(*spec.gsr_gain_range)),
                resp_delta=spec.resp_delta,
                ramp_tau_s=spec.ramp_tau_s,
                snr_db=spec.snr_db,
                noise=NoiseLevels(
                    hr_bpm=spec.hr_noise_bpm,
                    gsr_rel=spec.gsr_noise_rel,
                    tvoc_rel=spec.tvoc_noise_rel,
                ),
                age=int(rng.integers(23, 62)),
                gender="male" if rng.random() < 18 / 25 else "female",
                env_temp=float(np.clip(rng.normal(spec.env.temp_mean, spec.env.temp_sd), 15.9, 26.2)),
                env_humidity=float(
                    np.clip(rng.normal(spec.env.humidity_mean, spec.env.humidity_sd), 23.4, 61.8)
                ),
                env_pressure=float(rng.normal(spec.env.pressure_mean, spec.env.pressure_sd)),
            )
        )
    return specs


def simulate_cohort(spec: CohortSpec, seed: int) -> CohortResult:
    """Simulate every participant and apply the channel dropout model."""
    specs = build_specs(spec, seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(spec.n + 1)[-1])
    sessions = []
    for pspec in specs:
        record = simulate_participant(pspec)
        off = {ch for ch, p in spec.dropout.items() if rng.random() >= p}
        sessions.append(drop_channels(record, off))
    return CohortResult(specs=specs, sessions=sessions)
