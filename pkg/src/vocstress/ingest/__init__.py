from .wire import Marker, Ack, MalformedLine, parse_line, serialize_line
from .respiration import InsufficientData, derive_respiration
from .align import Series, AlignedStreams, MissingAnchor, align, beat_times_from_frames

__all__ = [
    "Marker",
    "Ack",
    "MalformedLine",
    "parse_line",
    "serialize_line",
    "InsufficientData",
    "derive_respiration",
    "Series",
    "AlignedStreams",
    "MissingAnchor",
    "align",
    "beat_times_from_frames",
]
