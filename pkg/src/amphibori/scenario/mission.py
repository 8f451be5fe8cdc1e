"""The amphibious cargo-transport mission.

Course layout (single preset): an elevated start platform carrying a low
wall and a tall barrier, a water basin, a cargo sphere on the basin floor,
and a staircase back up to the platform in a second lane. The robot rolls
over the platform terrain, jumps the barrier into the water, submerges,
sucks up the cargo, carries it to the drop zone, releases it hole-down,
swims back up to the air-water interface, and climbs the stairs home.

The run asserts eight ordered events: terrain_traversal, jump, submerge,
capture, transport, release, interface_swim, stair_return.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..engine import terrain
from ..engine.classify import ModeTracker
from ..engine.rigid import Cargo, ContactParams, Engine, make_body
from ..errors import MissionFailed
from ..geometry import default_robot_pattern
from ..hydro import FluidSpec
from ..magnetics import FieldCommand
from ..trace import Trace

MISSION_EVENTS = (
    "terrain_traversal",
    "jump",
    "submerge",
    "capture",
    "transport",
    "release",
    "interface_swim",
    "stair_return",
)

PLATFORM_TOP = 30e-3
PLATFORM_EDGE = 55e-3
WATER_LEVEL = 25e-3
WATER_FROM = 56e-3
OUT_LANE_Y = -15e-3
HOME_LANE_Y = 25e-3
LOW_WALL_X = 18e-3
BARRIER_X = 48e-3
CARGO_POS = (95e-3, -15e-3, 4e-3)
DROP_ZONE = (115e-3, -8e-3, 10e-3)
STAIR_X0 = 57e-3


def mission_world():
    """Terrain rows, fluid, and cargo of the preset course."""
    rows = [
        terrain.ground(0.0),
        # start platform
        terrain.box((PLATFORM_EDGE / 2, 0.0, PLATFORM_TOP / 2 - 1e-3),
                    (PLATFORM_EDGE / 2, 0.06, PLATFORM_TOP / 2 + 1e-3)),
        # low wall across the platform (the on-platform terrain feature)
        terrain.box((LOW_WALL_X, 0.0, PLATFORM_TOP + 1e-3), (1e-3, 0.06, 3e-3)),
        # tall barrier, outbound lane only (y < 8 mm)
        terrain.box((BARRIER_X, -0.026, PLATFORM_TOP + 2.5e-3), (1e-3, 0.034, 5.5e-3)),
    ]
    # return staircase, home lane only (y > 8 mm), descending into the basin
    for k in range(5):
        h = 25e-3 - k * 5e-3
        x = STAIR_X0 + k * 7e-3
        rows.append(terrain.box((x + 1.75e-3, 0.034, (h - 2e-3) / 2),
                                (1.75e-3, 0.026, (h + 2e-3) / 2)))
    fluid = FluidSpec(level=WATER_LEVEL, x_from=WATER_FROM)
    cargo = Cargo(position=np.array(CARGO_POS), diameter=2e-3)
    return rows, fluid, cargo


@dataclass
class MissionReport:
    trace: Trace
    events: list[str]
    completed: bool

    def summary(self) -> dict:
        return {"events": self.events, "completed": self.completed,
                "duration_s": self.trace.duration}


class _Driver:
    """Closed-loop mission driver: steps the engine, samples the trace, and
    collects the generic event stream (modes, capture, submerge, ...)."""

    def __init__(self, engine: Engine):
        self.engine = engine
        self.trace = Trace()
        self.tracker = ModeTracker()
        self.mode = "rest"
        self._was_submerged = False
        self._was_attached = False
        self.dt = engine.sim.dt
        self.sample_every = max(1, int(round(1.0 / (engine.sim.sample_rate * self.dt))))
        self._step_count = 0

    def _sample(self):
        st = self.engine.state
        mode = self.tracker.push(st.omega, st.axis_world(), st.contact,
                                 st.submerged_fraction > 0.5)
        if mode != self.mode:
            self.trace.add_event(st.t, "mode", mode=mode, previous=self.mode)
            self.mode = mode
        if st.submerged_fraction >= 0.95 and not self._was_submerged:
            self._was_submerged = True
            self.trace.add_event(st.t, "submerge")
        elif st.submerged_fraction <= 0.5 and self._was_submerged:
            self._was_submerged = False
            self.trace.add_event(st.t, "surface")
        if st.cargo_attached and not self._was_attached:
            self.trace.add_event(st.t, "capture")
        if self._was_attached and not st.cargo_attached:
            self.trace.add_event(st.t, "release")
        self._was_attached = st.cargo_attached
        self.trace.add_sample(st, self.mode)

    def run(self, command: FieldCommand, duration: float, stop=None) -> bool:
        """Step under one command; True when the stop condition fired."""
        steps = int(round(duration / self.dt))
        for k in range(steps):
            self.engine.step(command, k * self.dt)
            self._step_count += 1
            if self._step_count % self.sample_every == 0:
                self._sample()
                if stop is not None and stop(self.engine.state):
                    return True
        return False

    def aim_until(self, target_fn, duration: float, stop, strength=10e-3,
                  frequency=24.0, interval=0.05) -> bool:
        """Re-aim a rotating field at target_fn() every control interval."""
        elapsed = 0.0
        while elapsed < duration:
            d = np.asarray(target_fn(), float) - self.engine.state.position
            n = np.linalg.norm(d)
            if n < 1e-9:
                d = np.array([1.0, 0.0, 0.0])
                n = 1.0
            cmd = FieldCommand.rotating(d / n, strength, frequency)
            if self.run(cmd, interval, stop):
                return True
            elapsed += interval
        return False


def run_mission(seed: int = 0, max_leg_time: float = 40.0) -> MissionReport:
    """Execute the full preset mission; raises MissionFailed on the first
    missing event. The seed only tags the run (the dynamics are
    deterministic); two runs with any seeds produce identical traces.
    """
    del seed  # determinism holds regardless; kept for the CLI contract
    rows, fluid, cargo = mission_world()
    body = make_body(default_robot_pattern(), density=1005.0)
    engine = Engine(body, terrain.pack(rows), fluids=[fluid], cargo=[cargo],
                    contact=ContactParams())
    engine.settle_on_ground(x=5e-3, y=OUT_LANE_Y, yaw=math.radians(15))
    for _ in range(5000):
        engine.step(FieldCommand.off(), 0.0)
    engine.state.t = 0.0

    drv = _Driver(engine)
    events: list[str] = []

    def mark(name: str):
        events.append(name)
        drv.trace.add_event(engine.state.t, name)

    def fail(name: str):
        raise MissionFailed(name, events)

    roll_fwd = FieldCommand.rotating(np.array([0.0, 1.0, 0.0]), 10e-3, 4.0)

    # 1. self-adaptive traversal over the platform terrain, stopping with
    # enough run-off before the barrier for the vault
    ok = drv.run(roll_fwd, max_leg_time,
                 stop=lambda st: st.position[0] > LOW_WALL_X + 10e-3 and st.contact)
    if not ok:
        fail("terrain_traversal")
    mark("terrain_traversal")

    # 2. jump the barrier into the basin. The vault outcome depends on which
    # hull vertex carries the launch, so do what an operator does: position,
    # align the magnetization with a static hold, fire, and re-try until the
    # robot clears into the water.
    jumped = False
    apex = 0.0
    for _attempt in range(8):
        # walk into the launch window
        x = float(engine.state.position[0])
        if x < 28e-3:
            drv.run(roll_fwd, 10.0, stop=lambda st: st.position[0] > 29e-3)
        elif x > 38e-3:
            back = FieldCommand.rotating(np.array([0.0, -1.0, 0.0]), 10e-3, 4.0)
            drv.run(back, 10.0, stop=lambda st: st.position[0] < 35e-3)
        drv.run(FieldCommand.pulse(np.array([1.0, 0.0, 0.0]), 10e-3, 1e9), 0.35)
        m = engine.magnetization_world()
        m = m / np.linalg.norm(m)
        vertical = np.array([0.0, 0.0, 1.0])
        side = vertical - float(vertical @ m) * m
        side = side / np.linalg.norm(side)
        theta = math.radians(120.0)
        pulse = FieldCommand.pulse(math.cos(theta) * m - math.sin(theta) * side,
                                   40e-3, 2.2e-3)
        z_before = float(engine.state.position[2])

        def track_apex(st):
            nonlocal apex
            apex = max(apex, float(st.position[2]) - z_before)
            return st.position[0] > WATER_FROM and st.submerged_fraction > 0.5

        if drv.run(pulse, 2.0, stop=track_apex):
            jumped = True
            break
        drv.run(FieldCommand.off(), 0.3)
        if float(engine.state.position[0]) > WATER_FROM:
            jumped = True  # cleared on the bounce
            break
    if not jumped or apex < 5e-3:
        fail("jump")
    mark("jump")

    # 3. settle into the water
    drv.run(FieldCommand.off(), 1.0)
    if not any(e.event == "submerge" for e in drv.trace.events):
        fail("submerge")
    mark("submerge")

    # 4. swim to the cargo and capture it by suction
    approach = np.array(CARGO_POS) + np.array([-2e-3, 0.0, 1e-3])
    ok = drv.aim_until(lambda: approach, max_leg_time,
                       stop=lambda st: st.cargo_attached)
    if not ok:
        fail("capture")
    mark("capture")

    # 5. transport to the drop zone
    drop = np.array(DROP_ZONE)
    ok = drv.aim_until(lambda: drop, max_leg_time,
                       stop=lambda st: np.linalg.norm(st.position - drop) < 5e-3
                       and st.cargo_attached)
    if not ok:
        fail("transport")
    mark("transport")

    # 6. release: pitch hole-down continuously, then slow the spin below the
    # release threshold with the attitude still field-locked
    for aim in ((0.7, 0.0, -0.7), (0.25, 0.0, -0.97), (0.0, 0.0, -1.0)):
        drv.run(FieldCommand.rotating(np.array(aim), 10e-3, 24.0), 0.5)
    slow = FieldCommand.rotating(np.array([0.0, 0.0, -1.0]), 10e-3, 2.0)
    ok = drv.run(slow, 5.0, stop=lambda st: not st.cargo_attached)
    if not ok:
        fail("release")
    mark("release")

    # 7. interface swim: 45-degree ascent to the surface, porpoise to trap
    # the bubble, then cruise home at the interface
    up_target = np.array([72e-3, HOME_LANE_Y, WATER_LEVEL + 2e-3])
    drv.aim_until(lambda: up_target, max_leg_time,
                  stop=lambda st: st.position[2] > WATER_LEVEL - 6e-3
                  and st.position[0] < 95e-3)
    surf_target = np.array([60e-3, HOME_LANE_Y, WATER_LEVEL - 1e-3])
    drv.aim_until(lambda: surf_target, max_leg_time,
                  stop=lambda st: st.position[0] < 70e-3
                  and st.position[2] > WATER_LEVEL - 8e-3)
    st = engine.state
    near_surface = st.position[2] > WATER_LEVEL - 8e-3
    if not near_surface:
        fail("interface_swim")
    mark("interface_swim")

    # 8. climb the stairs back onto the platform (home lane)
    roll_home = FieldCommand.rotating(np.array([0.0, -1.0, 0.0]), 10e-3, 4.0)
    ok = drv.run(roll_home, 2 * max_leg_time,
                 stop=lambda st: st.position[0] < PLATFORM_EDGE - 3e-3
                 and st.position[2] > PLATFORM_TOP - 2e-3 and st.contact)
    if not ok:
        fail("stair_return")
    mark("stair_return")

    drv.trace.add_event(engine.state.t, "end")
    return MissionReport(trace=drv.trace, events=events, completed=True)
