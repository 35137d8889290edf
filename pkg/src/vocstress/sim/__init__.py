from .participant import (
    ParticipantSpec,
    NoiseLevels,
    Reactivity,
    Emitter,
    simulate_participant,
    excursion,
)
from .cohort import CohortSpec, EnvModel, CohortResult, simulate_cohort

__all__ = [
    "ParticipantSpec",
    "NoiseLevels",
    "Reactivity",
    "Emitter",
    "simulate_participant",
    "excursion",
    "CohortSpec",
    "EnvModel",
    "CohortResult",
    "simulate_cohort",
]
