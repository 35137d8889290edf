"""Line protocol spoken by the acquisition bridge.

Lines are ASCII, comma-separated, LF-terminated. The first field tags the
line type:

    F,<timestamp_ms>,<18 frame fields>   sensor frame (canonical layout)
    M,<timestamp_ms>,<event>             event marker
    C,<command>                          command acknowledgement

Missing frame values are ``NA``. ``serialize_line(parse_line(l)) == l``
byte-for-byte for every canonically formatted line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..core.types import (
    FRAME_COLUMNS,
    FRAME_FIELDS,
    Phase,
    SensorFrame,
    decode_value,
    encode_value,
    frame_to_values,
)

_NON_PRINTABLE = re.compile(r"[^ -~]")


@dataclass(frozen=True, slots=True)
class Marker:
    timestamp: int
    event: str


@dataclass(frozen=True, slots=True)
class Ack:
    command: str


class MalformedLine(ValueError):
    """Corrupted serial input; carries the byte offset of the defect."""

    def __init__(self, offset: int, reason: str):
        self.offset = offset
        self.reason = reason
        super().__init__(f"byte {offset}: {reason}")


_FRAME_PARTS = 1 + len(FRAME_COLUMNS)  # tag + timestamp + 18 fields


def _field_offsets(line: str) -> list[int]:
    offsets = [0]
    for i, ch in enumerate(line):
        if ch == ",":
            offsets.append(i + 1)
    return offsets


def _is_event_text(text: str) -> bool:
    return text != "" and all(33 <= ord(c) <= 126 and c != "," for c in text)


def _locate_frame_error(body: str, parts: list[str]) -> "MalformedLine":
    """Slow path: pinpoint the first bad field's byte offset."""
    offsets = _field_offsets(body)
    try:
        int(parts[1])
    except ValueError:
        return MalformedLine(offsets[1], f"bad timestamp {parts[1]!r}")
    for idx, (name, kind) in enumerate(FRAME_FIELDS):
        text = parts[2 + idx]
        try:
            decode_value(kind, text)
        except ValueError:
            return MalformedLine(offsets[2 + idx], f"bad {name} field {text!r}")
    return MalformedLine(0, "malformed frame")


def _int_or_none(s: str) -> int | None:
    return None if s == "NA" else int(s)


def _real_or_none(s: str) -> float | None:
    if s == "NA":
        return None
    v = float(s)
    if v - v != 0.0:  # NaN or infinity
        raise ValueError(s)
    return v


def parse_line(line: str | bytes) -> SensorFrame | Marker | Ack:
    """Parse one bridge line; raises MalformedLine with a located offset."""
    if isinstance(line, bytes):
        try:
            line = line.decode("ascii")
        except UnicodeDecodeError as exc:
            raise MalformedLine(exc.start, "non-ASCII byte") from None
    if not line.endswith("\n"):
        raise MalformedLine(len(line), "missing LF terminator")
    body = line[:-1]
    m = _NON_PRINTABLE.search(body)
    if m is not None:
        raise MalformedLine(m.start(), f"non-printable byte 0x{ord(m.group()):02x}")

    parts = body.split(",")
    tag = parts[0]

    if tag == "F":
        if len(parts) != _FRAME_PARTS:
            offsets = _field_offsets(body)
            bad = min(len(parts), _FRAME_PARTS)
            where = offsets[bad - 1] if len(parts) > _FRAME_PARTS else len(body)
            raise MalformedLine(
                where, f"frame needs {_FRAME_PARTS} fields, got {len(parts)}"
            )
        try:
            rr_text = parts[3]
            phase = int(parts[19])
            if not 1 <= phase <= 7:
                raise ValueError(parts[19])
            return SensorFrame(
                timestamp=int(parts[1]),
                hr=_int_or_none(parts[2]),
                rr_intervals=()
                if rr_text == "NA"
                else tuple(int(p) for p in rr_text.split(";")),
                gsr_raw=_int_or_none(parts[4]),
                gas250=_real_or_none(parts[5]),
                gas320=_real_or_none(parts[6]),
                gas400=_real_or_none(parts[7]),
                aqi=_int_or_none(parts[8]),
                tvoc=_int_or_none(parts[9]),
                eco2=_int_or_none(parts[10]),
                temp_bme=_real_or_none(parts[11]),
                temp_ens=_real_or_none(parts[12]),
                humidity_bme=_int_or_none(parts[13]),
                humidity_ens=_int_or_none(parts[14]),
                pressure=_real_or_none(parts[15]),
                gas320_norm=_real_or_none(parts[16]),
                tvoc_norm=_real_or_none(parts[17]),
                gsr_norm=_real_or_none(parts[18]),
                phase_id=Phase(phase),
            )
        except ValueError:
            raise _locate_frame_error(body, parts) from None

    if tag == "M":
        if len(parts) != 3:
            offsets = _field_offsets(body)
            where = offsets[2] if len(parts) > 3 else len(body)
            raise MalformedLine(where, f"marker needs 3 fields, got {len(parts)}")
        try:
            ts = int(parts[1])
        except ValueError:
            raise MalformedLine(2, f"bad timestamp {parts[1]!r}") from None
        if not _is_event_text(parts[2]):
            raise MalformedLine(3 + len(parts[1]), f"bad event name {parts[2]!r}")
        return Marker(ts, parts[2])

    if tag == "C":
        if len(parts) != 2:
            offsets = _field_offsets(body)
            where = offsets[1] if len(parts) > 2 else len(body)
            raise MalformedLine(where, f"command ack needs 2 fields, got {len(parts)}")
        if not _is_event_text(parts[1]):
            raise MalformedLine(2, f"bad command name {parts[1]!r}")
        return Ack(parts[1])

    raise MalformedLine(0, f"unknown line tag {tag!r}")


def serialize_line(item: SensorFrame | Marker | Ack) -> str:
    """Canonical text form of a frame, marker or ack (LF-terminated)."""
    if isinstance(item, SensorFrame):
        return "F," + ",".join(frame_to_values(item)) + "\n"
    if isinstance(item, Marker):
        return f"M,{item.timestamp},{item.event}\n"
    if isinstance(item, Ack):
        return f"C,{item.command}\n"
    raise TypeError(f"cannot serialize {type(item).__name__}")


def command_line(command: str) -> str:
    """Bridge command line (service -> microcontroller)."""
    return f"C,{command}\n"


def frame_value_string(kind: str, value) -> str:
    return encode_value(kind, value)
