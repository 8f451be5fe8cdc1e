"""Trace recording: sampled states, the event log, and their file formats.

CSV columns are fixed: t, x, y, z, qw, qx, qy, qz, vx, vy, vz, wx, wy, wz,
s_fold, mode, dose, bubble, cargo - header mandatory, 9 significant digits.
Events serialize as JSON lines: {"t": ..., "event": ..., "detail": {...}}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

CSV_COLUMNS = (
    "t", "x", "y", "z", "qw", "qx", "qy", "qz",
    "vx", "vy", "vz", "wx", "wy", "wz", "s_fold", "mode", "dose", "bubble", "cargo",
)


@dataclass
class Sample:
    t: float
    position: np.ndarray
    quat: np.ndarray
    vel: np.ndarray
    omega: np.ndarray
    s_fold: float
    mode: str
    dose: float
    bubble: float
    cargo: bool


@dataclass
class Event:
    t: float
    event: str
    detail: dict = field(default_factory=dict)


@dataclass
class Trace:
    samples: list[Sample] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)

    def add_sample(self, state, mode: str) -> None:
        self.samples.append(
            Sample(
                t=state.t,
                position=state.position.copy(),
                quat=state.quat.copy(),
                vel=state.vel.copy(),
                omega=state.omega.copy(),
                s_fold=state.fold.s,
                mode=mode,
                dose=state.fold.dose_delivered,
                bubble=state.bubble_volume,
                cargo=state.cargo_attached,
            )
        )

    def add_event(self, t: float, event: str, **detail) -> None:
        self.events.append(Event(t=t, event=event, detail=detail))

    @property
    def duration(self) -> float:
        return self.samples[-1].t - self.samples[0].t if self.samples else 0.0

    def event_names(self) -> list[str]:
        return [e.event for e in self.events]

    def has_event_subsequence(self, wanted) -> bool:
        """True when ``wanted`` occurs in order (not necessarily adjacent)."""
        it = iter(self.event_names())
        return all(any(got == w for got in it) for w in wanted)

    def modes_seen(self) -> list[str]:
        out = []
        for s in self.samples:
            if not out or out[-1] != s.mode:
                out.append(s.mode)
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for s in self.samples:
                row = [
                    _g9(s.t),
                    _g9(s.position[0]), _g9(s.position[1]), _g9(s.position[2]),
                    _g9(s.quat[0]), _g9(s.quat[1]), _g9(s.quat[2]), _g9(s.quat[3]),
                    _g9(s.vel[0]), _g9(s.vel[1]), _g9(s.vel[2]),
                    _g9(s.omega[0]), _g9(s.omega[1]), _g9(s.omega[2]),
                    _g9(s.s_fold), s.mode, _g9(s.dose), _g9(s.bubble),
                    "1" if s.cargo else "0",
                ]
                fh.write(",".join(row) + "\n")

    def events_to_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for e in self.events:
                fh.write(json.dumps({"t": round(e.t, 9), "event": e.event, "detail": e.detail},
                                    sort_keys=True) + "\n")

    def summary(self) -> dict:
        return {
            "samples": len(self.samples),
            "duration_s": self.duration,
            "events": [{"t": e.t, "event": e.event} for e in self.events],
            "final_position_mm": [float(v) * 1e3 for v in self.samples[-1].position] if self.samples else None,
        }


def _g9(x: float) -> str:
    return f"{x:.9g}"


def read_trace_csv(path) -> Trace:
    """Parse a trace CSV back into a Trace (samples only)."""
    trace = Trace()
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected trace columns: {header}")
        for line in fh:
            f = line.strip().split(",")
            trace.samples.append(
                Sample(
                    t=float(f[0]),
                    position=np.array([float(f[1]), float(f[2]), float(f[3])]),
                    quat=np.array([float(f[4]), float(f[5]), float(f[6]), float(f[7])]),
                    vel=np.array([float(f[8]), float(f[9]), float(f[10])]),
                    omega=np.array([float(f[11]), float(f[12]), float(f[13])]),
                    s_fold=float(f[14]),
                    mode=f[15],
                    dose=float(f[16]),
                    bubble=float(f[17]),
                    cargo=f[18] == "1",
                )
            )
    return trace
