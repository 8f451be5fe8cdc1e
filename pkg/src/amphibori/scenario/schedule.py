"""Field schedules: ordered segments with optional event-triggered endings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ScenarioParseError
from ..magnetics import FieldCommand

# safety cap for segments that wait on an event
DEFAULT_UNTIL_TIMEOUT = 60.0


@dataclass(frozen=True)
class Until:
    """Event trigger ending a segment early."""

    kind: str  # position | mode | captured
    point: tuple | None = None
    tol: float = 2e-3
    mode: str | None = None

    def satisfied(self, state, current_mode: str) -> bool:
        if self.kind == "position":
            d = np.linalg.norm(state.position - np.array(self.point))
            return bool(d <= self.tol)
        if self.kind == "mode":
            return current_mode == self.mode
        if self.kind == "captured":
            return state.cargo_attached
        raise ScenarioParseError(f"unknown until kind {self.kind!r}")


@dataclass
class Segment:
    """One schedule entry: a field program plus a stop condition.

    ``duration`` may be None only when an ``until`` trigger is present; such
    segments still stop at the safety timeout.
    """

    kind: str  # rotate | pulse | off | pump
    duration: float | None = None
    axis: tuple | None = None
    strength: float = 0.0
    frequency: float = 0.0
    cycles: int = 0
    until: Until | None = None

    def __post_init__(self):
        if self.kind not in ("rotate", "pulse", "off", "pump"):
            raise ScenarioParseError(f"unknown schedule entry {self.kind!r}")
        if self.duration is not None and self.duration <= 0:
            raise ScenarioParseError("segment duration must be positive", key_path=f"schedule.{self.kind}.for")
        if self.kind in ("rotate", "pulse") and self.strength < 0:
            raise ScenarioParseError("field strength must be >= 0", key_path=f"schedule.{self.kind}.strength")
        if self.kind == "rotate" and self.frequency < 0:
            raise ScenarioParseError("frequency must be >= 0", key_path="schedule.rotate.freq")
        if self.kind == "pump" and self.cycles < 0:
            raise ScenarioParseError("pump cycles must be >= 0", key_path="schedule.pump.cycles")
        if self.kind in ("rotate", "off") and self.duration is None and self.until is None:
            raise ScenarioParseError(
                f"'{self.kind}' needs a 'for=' duration or an 'until' trigger",
                key_path=f"schedule.{self.kind}",
            )
        if self.kind == "pulse" and self.duration is None:
            raise ScenarioParseError("pulse needs 'for=' duration", key_path="schedule.pulse.for")

    def command(self) -> FieldCommand:
        if self.kind == "rotate":
            return FieldCommand.rotating(np.array(self.axis, float), self.strength, self.frequency)
        if self.kind == "pulse":
            return FieldCommand.pulse(np.array(self.axis, float), self.strength, self.duration)
        return FieldCommand.off()

    def time_limit(self) -> float:
        if self.duration is not None:
            return self.duration
        return DEFAULT_UNTIL_TIMEOUT


@dataclass
class Schedule:
    segments: list[Segment] = field(default_factory=list)

    def __post_init__(self):
        if any(s is None for s in self.segments):
            raise ScenarioParseError("schedule contains an empty segment")

    def total_scheduled_time(self) -> float:
        """Sum of fixed durations (event-ended segments count their cap)."""
        return sum(s.time_limit() for s in self.segments)

    def rotate(self, axis, strength, frequency, duration=None, until=None) -> "Schedule":
        self.segments.append(Segment("rotate", duration=duration, axis=tuple(axis),
                                     strength=strength, frequency=frequency, until=until))
        return self

    def pulse(self, direction, strength, duration) -> "Schedule":
        self.segments.append(Segment("pulse", duration=duration, axis=tuple(direction),
                                     strength=strength))
        return self

    def off(self, duration=None, until=None) -> "Schedule":
        self.segments.append(Segment("off", duration=duration, until=until))
        return self

    def pump(self, cycles, strength) -> "Schedule":
        self.segments.append(Segment("pump", cycles=cycles, strength=strength))
        return self
