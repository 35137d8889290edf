from .state import (
    SessionError,
    SessionActive,
    SessionComplete,
    RatingGate,
    WrongCheckpoint,
    OutOfRange,
    SessionState,
    SessionService,
    ManualClock,
    replay_markers,
)
from .bridge import SimulatedBridge, ReplayBridge
from .app import create_app

__all__ = [
    "SessionError",
    "SessionActive",
    "SessionComplete",
    "RatingGate",
    "WrongCheckpoint",
    "OutOfRange",
    "SessionState",
    "SessionService",
    "ManualClock",
    "replay_markers",
    "SimulatedBridge",
    "ReplayBridge",
    "create_app",
]
