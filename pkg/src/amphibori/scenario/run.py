"""Scenario execution: steps the engine through a schedule, classifies modes,
and records the trace with its event log.

Events: mode switches, segment starts, obstacle clearances (crossing the far
edge in x with ground contact regained), submerge/surface transitions, cargo
capture/release, and pump doses.
"""

from __future__ import annotations

import math

import numpy as np

from ..engine.classify import ModeTracker
from ..engine.rigid import ContactParams, Engine, SimParams, make_body
from ..errors import SimulationAbort
from ..folding import FoldState
from ..geometry import build_pattern
from ..hydro import default_coefficients
from ..magnetics import FieldCommand
from ..trace import Trace
from .dsl import Scenario
from .schedule import Schedule, Segment

SUBMERGED_ON = 0.95
SUBMERGED_OFF = 0.5


def build_engine(scenario: Scenario) -> Engine:
    rc = scenario.robot
    pattern = build_pattern(
        rc.n, rc.diameter, rc.height, hole_and_cuts=(rc.variant == "hole_cuts")
    )
    body = make_body(pattern, plates=rc.plates, density=rc.density,
                     magnetization=rc.magnetization)
    contact = ContactParams()
    if scenario.sim.mu is not None:
        contact.mu = scenario.sim.mu
    if scenario.sim.kn is not None:
        contact.k_n = scenario.sim.kn
    if scenario.sim.cn is not None:
        contact.c_n = scenario.sim.cn
    sim = SimParams()
    if scenario.sim.dt is not None:
        sim = SimParams(dt=scenario.sim.dt)
    if scenario.sim.sample_rate is not None:
        sim.sample_rate = scenario.sim.sample_rate

    engine = Engine(
        body,
        scenario.world.terrain_prims(),
        fluids=list(scenario.world.fluids),
        cargo=list(scenario.world.cargo),
        contact=contact,
        sim=sim,
        coeffs=default_coefficients(pattern.diameter),
    )
    engine.state.fold = FoldState(s=0.0, reservoir=rc.reservoir)
    engine.settle_on_ground(x=rc.x, y=rc.y, yaw=rc.yaw)
    return engine


class ScenarioRunner:
    """Owns one engine + trace; steps segments and detects events."""

    def __init__(self, scenario: Scenario, engine: Engine | None = None):
        self.scenario = scenario
        self.engine = engine or build_engine(scenario)
        self.trace = Trace()
        self.tracker = ModeTracker()
        self.mode = "rest"
        self._was_submerged = False
        self._was_attached = False
        self._cleared = set()
        self._doses_seen = 0
        self._settled = False

    def settle(self, duration: float = 0.5) -> None:
        steps = int(round(duration / self.engine.sim.dt))
        for _ in range(steps):
            self.engine.step(FieldCommand.off(), 0.0)
        self._settled = True

    def _sample(self) -> None:
        st = self.engine.state
        mode = self.tracker.push(
            st.omega, st.axis_world(), st.contact, st.submerged_fraction > SUBMERGED_OFF
        )
        if mode != self.mode:
            self.trace.add_event(st.t, "mode", mode=mode, previous=self.mode)
            self.mode = mode
        # obstacle clearances
        x = float(st.position[0])
        for i, ob in enumerate(self.scenario.world.obstacles):
            if i not in self._cleared and x > ob.x_far and st.contact:
                self._cleared.add(i)
                self.trace.add_event(st.t, "obstacle_cleared", kind=ob.kind,
                                     x_mm=round(ob.params.get("x", 0.0) * 1e3, 3))
        # submerge / surface
        submerged = st.submerged_fraction >= SUBMERGED_ON
        if submerged and not self._was_submerged:
            self.trace.add_event(st.t, "submerge")
        surfaced = st.submerged_fraction <= SUBMERGED_OFF
        if self._was_submerged and surfaced:
            self.trace.add_event(st.t, "surface")
        if submerged:
            self._was_submerged = True
        elif surfaced:
            self._was_submerged = False
        # cargo
        if st.cargo_attached and not self._was_attached:
            self.trace.add_event(st.t, "capture")
        if self._was_attached and not st.cargo_attached:
            self.trace.add_event(st.t, "release")
        self._was_attached = st.cargo_attached
        # doses drained from the engine
        while self._doses_seen < len(self.engine.doses):
            t_dose, vol = self.engine.doses[self._doses_seen]
            self.trace.add_event(t_dose, "dose", volume_ul=vol * 1e9)
            self._doses_seen += 1
        self.trace.add_sample(st, self.mode)

    def run_segment(self, seg: Segment) -> None:
        eng = self.engine
        dt = eng.sim.dt
        self.trace.add_event(eng.state.t, "segment", kind=seg.kind)
        if seg.kind == "pump":
            self._run_pump(seg)
            return
        command = seg.command()
        limit_steps = int(round(seg.time_limit() / dt))
        sample_every = max(1, int(round(1.0 / (eng.sim.sample_rate * dt))))
        for k in range(limit_steps):
            eng.step(command, k * dt)
            if (k + 1) % sample_every == 0:
                self._sample()
                if seg.until is not None and seg.until.satisfied(eng.state, self.mode):
                    self.trace.add_event(eng.state.t, "until", kind=seg.until.kind)
                    return

    def _run_pump(self, seg: Segment) -> None:
        """Fold/unfold cycles: hold the field along M_net until folded, then
        release until recovered; one dose per completed cycle."""
        eng = self.engine
        if eng.body.fold_model is None:
            raise SimulationAbort("pump segment needs a dual-plate robot", term="pump")
        dt = eng.sim.dt
        sample_every = max(1, int(round(1.0 / (eng.sim.sample_rate * dt))))
        for _ in range(seg.cycles):
            m_net = eng.magnetization_world()
            direction = m_net / np.linalg.norm(m_net)
            hold = FieldCommand.pulse(direction, seg.strength, duration=1e9)
            k = 0
            while eng.state.fold.s < 0.9 and k < int(3.0 / dt):
                eng.step(hold, 0.0)
                k += 1
                if k % sample_every == 0:
                    self._sample()
            k = 0
            while eng.state.fold.s > 0.05 and k < int(5.0 / dt):
                eng.step(FieldCommand.off(), 0.0)
                k += 1
                if k % sample_every == 0:
                    self._sample()
            self._sample()

    def run(self) -> Trace:
        if not self._settled:
            self.settle()
        self.engine.state.t = 0.0
        self._sample()
        try:
            for seg in self.scenario.schedule.segments:
                self.run_segment(seg)
        except SimulationAbort as exc:
            exc.partial_trace = self.trace
            raise
        self.trace.add_event(self.engine.state.t, "end")
        return self.trace


def run_scenario(scenario: Scenario) -> Trace:
    """Parse-to-trace convenience wrapper; one runner per call (single writer)."""
    return ScenarioRunner(scenario).run()
