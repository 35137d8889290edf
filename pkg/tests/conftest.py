import numpy as np
import pytest

from vocstress.sim import ParticipantSpec, simulate_participant


@pytest.fixture(scope="session")
def session_p1():
    """One clean positive-coupling session reused across read-only tests."""
    spec = ParticipantSpec(
        participant_id="P01",
        seed=7,
        coupling_sign=1,
        coupling_lag_s=40.0,
        baseline_tvoc=350.0,
    )
    return spec, simulate_participant(spec)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
