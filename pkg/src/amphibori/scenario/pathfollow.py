"""Closed-loop waypoint swimming: re-aim the rotating-field axis toward the
next waypoint at a fixed control interval.

The robot swims hole-first along the field rotation axis, so steering is
just pointing that axis. The emitted command sequence is recorded as a
Schedule of short rotate segments; replaying it open-loop reproduces the
same trace (the controller is deterministic).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..engine.rigid import Engine
from ..magnetics import FieldCommand
from ..trace import Trace
from .schedule import Schedule, Segment


@dataclass
class ControllerParams:
    interval: float = 0.05  # s between re-aims
    strength: float = 10e-3
    frequency: float = 24.0
    waypoint_tol: float = 8e-3  # advance when this close
    blend: float = 1.0  # 1 = aim straight at the waypoint each interval
    timeout_per_leg: float = 20.0


@dataclass
class PathReport:
    reached: int
    total: int
    max_cross_track: float
    completed: bool
    diagnostic: str = ""


def cross_track_error(point: np.ndarray, waypoints: list[np.ndarray]) -> float:
    """Distance from a point to the waypoint polyline."""
    best = math.inf
    for a, b in zip(waypoints, waypoints[1:]):
        ab = b - a
        denom = float(ab @ ab)
        if denom < 1e-30:
            d = float(np.linalg.norm(point - a))
        else:
            t = min(max(float((point - a) @ ab) / denom, 0.0), 1.0)
            d = float(np.linalg.norm(point - (a + t * ab)))
        best = min(best, d)
    return best


def path_follow(
    engine: Engine,
    waypoints: list,
    params: ControllerParams | None = None,
    trace: Trace | None = None,
) -> tuple[Schedule, Trace, PathReport]:
    """Steer the engine's robot through the waypoints; returns the emitted
    schedule, the trace, and a report with the max cross-track error."""
    if len(waypoints) < 2:
        raise ValueError("path following needs at least 2 waypoints")
    p = params or ControllerParams()
    wps = [np.array(w, dtype=float) for w in waypoints]
    trace = trace if trace is not None else Trace()
    schedule = Schedule()

    dt = engine.sim.dt
    steps_per_interval = max(1, int(round(p.interval / dt)))
    sample_every = max(1, int(round(1.0 / (engine.sim.sample_rate * dt))))

    axis_prev: np.ndarray | None = None
    max_xt = 0.0
    target_idx = 0
    t_leg = 0.0
    completed = True
    diagnostic = ""

    while target_idx < len(wps):
        target = wps[target_idx]
        to_target = target - engine.state.position
        dist = float(np.linalg.norm(to_target))
        if dist <= p.waypoint_tol:
            target_idx += 1
            t_leg = 0.0
            continue
        if t_leg > p.timeout_per_leg:
            completed = False
            diagnostic = (f"waypoint {target_idx} unreachable: "
                          f"{dist * 1e3:.1f} mm away after {t_leg:.1f} s")
            break
        aim = to_target / dist
        if axis_prev is None or p.blend >= 1.0:
            axis = aim
        else:
            axis = axis_prev + p.blend * (aim - axis_prev)
            axis = axis / np.linalg.norm(axis)
        axis_prev = axis
        cmd = FieldCommand.rotating(axis, p.strength, p.frequency)
        schedule.segments.append(Segment("rotate", duration=p.interval, axis=tuple(axis),
                                         strength=p.strength, frequency=p.frequency))
        for k in range(steps_per_interval):
            st = engine.step(cmd, k * dt)
            if (k + 1) % sample_every == 0:
                trace.add_sample(st, "spinning_swim")
                # the approach leg to the first waypoint is not path tracking
                if target_idx > 0:
                    max_xt = max(max_xt, cross_track_error(st.position, wps))
        t_leg += p.interval

    report = PathReport(reached=target_idx, total=len(wps),
                        max_cross_track=max_xt, completed=completed,
                        diagnostic=diagnostic)
    return schedule, trace, report


def lemniscate_waypoints(center, half_width: float, n: int = 24, z: float | None = None):
    """A 2D figure-eight: r^2 = a^2 cos(2 theta) sampled into waypoints."""
    cx, cy, cz = center
    pts = []
    for k in range(n + 1):
        t = 2.0 * math.pi * k / n
        denom = 1.0 + math.sin(t) ** 2
        x = half_width * math.cos(t) / denom
        y = half_width * math.sin(t) * math.cos(t) / denom
        pts.append(np.array([cx + x, cy + y, z if z is not None else cz]))
    return pts


def spiral_waypoints(center, radius: float, pitch: float, turns: float = 2.0, n: int = 32):
    """A 3D helix rising along +z."""
    cx, cy, cz = center
    pts = []
    for k in range(n + 1):
        t = 2.0 * math.pi * turns * k / n
        pts.append(np.array([
            cx + radius * math.cos(t),
            cy + radius * math.sin(t),
            cz + pitch * t / (2.0 * math.pi),
        ]))
    return pts
