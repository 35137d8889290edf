from .types import (
    Phase,
    StressLabel,
    SensorFrame,
    ParticipantMeta,
    EnvironmentSummary,
    SessionRecord,
    NOMINAL_DURATION_S,
    FRAME_FIELDS,
    FRAME_COLUMNS,
    CHANNELS,
    CHANNEL_FIELDS,
    label_for_phase,
    encode_value,
    decode_value,
)
from .validate import Violation, validate_session
from .archive import write_archive, read_archive, dumps_archive, loads_archive

__all__ = [
    "Phase",
    "StressLabel",
    "SensorFrame",
    "ParticipantMeta",
    "EnvironmentSummary",
    "SessionRecord",
    "NOMINAL_DURATION_S",
    "FRAME_FIELDS",
    "FRAME_COLUMNS",
    "CHANNELS",
    "CHANNEL_FIELDS",
    "label_for_phase",
    "encode_value",
    "decode_value",
    "Violation",
    "validate_session",
    "write_archive",
    "read_archive",
    "dumps_archive",
    "loads_archive",
]
