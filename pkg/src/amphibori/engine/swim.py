"""Free-swimming measurement helper: spin the robot about its longitudinal
axis in unbounded fluid and report the steady speed."""

from __future__ import annotations

import math

import numpy as np

from ..geometry import default_robot_pattern
from ..hydro import FluidSpec
from ..magnetics import FieldCommand
from . import terrain
from .kernels import quat_from_axis_angle
from .rigid import BodyProperties, Engine, make_body


def swim_engine(body: BodyProperties, fluid: FluidSpec | None = None) -> Engine:
    eng = Engine(body, terrain.pack([]), fluids=[fluid or FluidSpec(level=10.0)])
    eng.state.position = np.array([0.0, 0.0, -0.5])
    eng.state.quat = quat_from_axis_angle(np.array([0.0, 1.0, 0.0]), math.pi / 2)
    return eng


def measure_swim_speed(
    body: BodyProperties,
    frequency: float,
    strength: float = 10e-3,
    settle: float = 2.5,
    average: float = 0.5,
) -> float:
    """Mean speed [m/s] over the averaging window after the transient."""
    eng = swim_engine(body)
    cmd = FieldCommand.rotating(np.array([1.0, 0.0, 0.0]), strength, frequency)
    dt = eng.sim.dt
    n_settle = int(settle / dt)
    n_avg = int(average / dt)
    for i in range(n_settle):
        eng.step(cmd, i * dt)
    total = 0.0
    for i in range(n_avg):
        st = eng.step(cmd, (n_settle + i) * dt)
        total += float(np.linalg.norm(st.vel))
    return total / n_avg


def default_body(variant: str, density: float = 1000.0) -> BodyProperties:
    return make_body(default_robot_pattern(hole_and_cuts=(variant == "hole_cuts")),
                     density=density)
