"""Session archive container: one UTF-8 text file per participant.

Layout (LF line endings):

    VOCSTRESS-SESSION v1
    [META]
    key=value lines (participant, ratings, confounds, channels, environment)
    [MARKERS]
    timestamp_ms,event per line
    [FRAMES]
    header naming the frame columns, then one comma-separated row per frame

Missing values are spelled ``NA``; reals use the shortest round-trip decimal
form, so read(write(session)) is the identity on every field.
"""

from __future__ import annotations

import os
from .types import (
    CHANNELS,
    EnvironmentSummary,
    FRAME_COLUMNS,
    ParticipantMeta,
    RATING_CHECKPOINTS,
    SessionRecord,
    frame_from_values,
    frame_to_values,
)

MAGIC = "VOCSTRESS-SESSION v1"

_ENV_FIELDS = (
    "temp_mean",
    "temp_sd",
    "humidity_mean",
    "humidity_sd",
    "pressure_mean",
    "pressure_sd",
)


def _meta_lines(record: SessionRecord) -> list[str]:
    m = record.meta
    lines = [f"id={m.id}", f"age={'NA' if m.age is None else m.age}", f"gender={m.gender}"]
    for cp in RATING_CHECKPOINTS:
        if cp in m.stress_ratings:
            lines.append(f"rating.{cp}={m.stress_ratings[cp]}")
    for key in sorted(m.confounds):
        lines.append(f"confound.{key}={m.confounds[key]}")
    for ch in CHANNELS:
        lines.append(f"channel.{ch}={1 if record.channel_availability.get(ch, True) else 0}")
    for name in _ENV_FIELDS:
        v = getattr(record.environment, name)
        lines.append(f"env.{name}={'NA' if v is None else repr(float(v))}")
    return lines


def dumps_archive(record: SessionRecord) -> str:
    out = [MAGIC, "[META]"]
    out.extend(_meta_lines(record))
    out.append("[MARKERS]")
    for ts, name in record.markers:
        if "," in name or "\n" in name:
            raise ValueError(f"marker event {name!r} contains a reserved character")
        out.append(f"{ts},{name}")
    out.append("[FRAMES]")
    out.append(",".join(FRAME_COLUMNS))
    for frame in record.frames:
        out.append(",".join(frame_to_values(frame)))
    return "\n".join(out) + "\n"


def loads_archive(text: str) -> SessionRecord:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != MAGIC:
        raise ValueError("not a session archive (bad magic line)")

    sections: dict[str, list[str]] = {"META": [], "MARKERS": [], "FRAMES": []}
    current = None
    for line in lines[1:]:
        if line in ("[META]", "[MARKERS]", "[FRAMES]"):
            current = line[1:-1]
            continue
        if current is None:
            raise ValueError(f"content before first section: {line!r}")
        sections[current].append(line)

    meta_kv: dict[str, str] = {}
    for line in sections["META"]:
        if "=" not in line:
            raise ValueError(f"bad META line {line!r}")
        key, value = line.split("=", 1)
        meta_kv[key] = value

    ratings = {
        cp: int(meta_kv[f"rating.{cp}"])
        for cp in RATING_CHECKPOINTS
        if f"rating.{cp}" in meta_kv
    }
    confounds = {
        k[len("confound.") :]: v for k, v in meta_kv.items() if k.startswith("confound.")
    }
    meta = ParticipantMeta(
        id=meta_kv.get("id", ""),
        age=None if meta_kv.get("age", "NA") == "NA" else int(meta_kv["age"]),
        gender=meta_kv.get("gender", "na"),
        confounds=confounds,
        stress_ratings=ratings,
    )
    availability = {
        ch: meta_kv.get(f"channel.{ch}", "1") == "1" for ch in CHANNELS
    }
    env_kwargs = {}
    for name in _ENV_FIELDS:
        raw = meta_kv.get(f"env.{name}", "NA")
        env_kwargs[name] = None if raw == "NA" else float(raw)
    environment = EnvironmentSummary(**env_kwargs)

    markers = []
    for line in sections["MARKERS"]:
        ts_text, _, event = line.partition(",")
        markers.append((int(ts_text), event))

    frame_lines = sections["FRAMES"]
    if not frame_lines or frame_lines[0] != ",".join(FRAME_COLUMNS):
        raise ValueError("FRAMES header missing or not canonical")
    frames = tuple(frame_from_values(line.split(",")) for line in frame_lines[1:])

    return SessionRecord(
        meta=meta,
        frames=frames,
        markers=tuple(markers),
        environment=environment,
        channel_availability=availability,
    )


def write_archive(record: SessionRecord, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_archive(record))


def read_archive(path: str | os.PathLike) -> SessionRecord:
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        return loads_archive(fh.read())
