"""Sensor bridges: the service's window onto the acquisition hardware.

A bridge accepts mode commands and yields SensorFrames on poll. The
simulated bridge synthesizes frames live (1 Hz heart data, 0.2 Hz VOC/GSR)
so full sessions run without hardware; the replay bridge feeds wire-protocol
lines from a file.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator

import numpy as np

from ..core.types import Phase, SensorFrame
from ..ingest.wire import Ack, Marker, MalformedLine, parse_line


class SimulatedBridge:
    """Generates plausible frames on demand, one per elapsed second."""

    def __init__(self, seed: int = 0):
        self._rng = np.random.default_rng(seed)
        self._last_emitted_s = -1
        self._mode = "idle"
        self.commands: list[str] = []
        self._stress = 0.0

    def send_command(self, name: str) -> None:
        self.commands.append(name)
        self._mode = {"BASELINE": "baseline", "EXPERIMENT": "experiment", "STOP": "idle"}.get(
            name, self._mode
        )

    def poll(self, now_ms: int) -> Iterator[SensorFrame]:
        now_s = now_ms // 1000
        while self._last_emitted_s < now_s:
            self._last_emitted_s += 1
            sec = self._last_emitted_s
            target = 1.0 if self._mode == "experiment" else 0.0
            self._stress += 0.08 * (target - self._stress)
            hr = int(round(72 + 14 * self._stress + self._rng.normal(0, 0.8)))
            rr = int(round(60000 / max(hr, 30)))
            frame_kwargs = dict(
                timestamp=sec * 1000,
                hr=hr,
                rr_intervals=(min(3000, max(200, rr)),),
                phase_id=Phase.WARMUP,
            )
            if sec % 5 == 0:
                tvoc = int(max(0, round(150 * (1 + 0.5 * self._stress) + self._rng.normal(0, 3))))
                gas = round(36.0 * (1 - 0.2 * self._stress) + self._rng.normal(0, 0.2), 1)
                frame_kwargs.update(
                    gsr_raw=int(max(1, round(475 / (1 + 1.3 * self._stress) + self._rng.normal(0, 4)))),
                    gas250=round(gas * 1.15, 1),
                    gas320=gas,
                    gas400=round(gas * 0.78, 1),
                    aqi=2,
                    tvoc=tvoc,
                    eco2=int(420 + round(50 * self._stress)),
                    temp_bme=22.7,
                    temp_ens=23.1,
                    humidity_bme=40,
                    humidity_ens=39,
                    pressure=1001.4,
                    gas320_norm=0.0,
                    tvoc_norm=0.0,
                    gsr_norm=0.0,
                )
            yield SensorFrame(**frame_kwargs)


class ReplayBridge:
    """Feeds frames parsed from stored wire-protocol lines."""

    def __init__(self, lines: Iterable[str]):
        self._frames: list[SensorFrame] = []
        self.markers: list[Marker] = []
        self.bad_lines: list[MalformedLine] = []
        for line in lines:
            if not line.endswith("\n"):
                line += "\n"
            try:
                item = parse_line(line)
            except MalformedLine as exc:
                self.bad_lines.append(exc)
                continue
            if isinstance(item, SensorFrame):
                self._frames.append(item)
            elif isinstance(item, Marker):
                self.markers.append(item)
            elif isinstance(item, Ack):
                pass
        self._cursor = 0
        self.commands: list[str] = []

    def send_command(self, name: str) -> None:
        self.commands.append(name)

    def poll(self, now_ms: int) -> Iterator[SensorFrame]:
        while self._cursor < len(self._frames) and self._frames[self._cursor].timestamp <= now_ms:
            yield self._frames[self._cursor]
            self._cursor += 1


def read_wire_file(path) -> ReplayBridge:
    with open(path, "r", encoding="ascii") as fh:
        return ReplayBridge(fh.readlines())
