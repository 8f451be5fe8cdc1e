"""Acceptance gate: every release criterion as one timed test.

Each test prints a "[acceptance] <criterion>: PASS (runtime)" line and
enforces its stated tolerance and runtime budget.
"""

import hashlib
import math
import string
import time
from contextlib import contextmanager

import numpy as np
import pytest

from amphibori.engine import terrain
from amphibori.engine.classify import ModeTracker
from amphibori.engine.jump import calibrate_jump, jump
from amphibori.engine.kernels import quat_from_axis_angle
from amphibori.engine.rigid import ContactParams, Engine, make_body
from amphibori.engine.swim import default_body, measure_swim_speed
from amphibori.errors import ScenarioParseError
from amphibori.folding import FoldEnergyModel, FoldState, _advance, cycle_dose, fold_energy, pump_cycle
from amphibori.geometry import build_pattern, default_robot_pattern, enclosed_volume, fold_configuration
from amphibori.hydro import default_coefficients, terminal_speed
from amphibori.magnetics import (
    FieldCommand,
    MagneticPlate,
    fold_torque_pair,
    make_dual_assembly,
    hexagonal_plate_volume,
    torque,
)
from amphibori.scenario.dsl import parse_scenario, serialize_scenario
from amphibori.scenario.mission import MISSION_EVENTS, run_mission
from amphibori.scenario.pathfollow import lemniscate_waypoints, path_follow, spiral_waypoints
from amphibori.scenario.run import run_scenario
from amphibori.hydro import FluidSpec

from test_geometry import mc_volume
from test_scenario_parser import FULL, MALFORMED

EYE = np.eye(3)
BODY_LENGTH = 6.8e-3


@contextmanager
def criterion(name: str, budget_s: float):
    t0 = time.perf_counter()
    yield
    elapsed = time.perf_counter() - t0
    assert elapsed < budget_s, f"{name}: {elapsed:.1f}s exceeded the {budget_s:.0f}s budget"
    print(f"\n[acceptance] {name}: PASS ({elapsed:.1f}s)")


def test_criterion_torque_law():
    with criterion("torque law property suite", 1.0):
        rng = np.random.default_rng(11)
        v = 3.16e-8
        for _ in range(300):
            m = rng.normal(size=3)
            m[2] = 0.0
            if np.linalg.norm(m) < 1e-3:
                continue
            m *= 64e3 / np.linalg.norm(m)
            b = rng.normal(scale=0.02, size=3)
            plate = MagneticPlate(v, m)
            t = torque(plate, b, EYE)
            scale = max(np.linalg.norm(t), 1e-30)
            # perpendicularity
            assert abs(float(t @ m)) <= 1e-12 * scale * np.linalg.norm(m)
            assert abs(float(t @ b)) <= 1e-12 * scale * np.linalg.norm(b)
            # linear scaling: bit-exact for power-of-two factors, 1e-12
            # relative for general factors (x3 rounds the products)
            assert np.array_equal(torque(plate, 2.0 * b, EYE), 2.0 * t)
            assert np.allclose(torque(plate, 3.0 * b, EYE), 3.0 * t, rtol=1e-12, atol=0.0)
            assert np.allclose(torque(MagneticPlate(2 * v, m), b, EYE), 2.0 * t, rtol=1e-12)
            # parallel field: exactly zero for a power-of-two parallel
            # scaling; 1e-12 of the torque scale for a general one
            assert np.all(torque(plate, 2.0 * m, EYE) == 0.0)
            residual = np.linalg.norm(torque(plate, 1.7 * m, EYE))
            reference = v * np.linalg.norm(m) * np.linalg.norm(1.7 * m)
            assert residual <= 1e-12 * reference


def test_criterion_kresling_kinematics():
    with criterion("Kresling kinematics", 30.0):
        p = default_robot_pattern()
        l0 = fold_configuration(p, 0.0).mountain_bar_lengths()[0]
        volumes = []
        for s in np.linspace(0.0, 1.0, 100):
            cfg = fold_configuration(p, float(s))
            assert np.max(np.abs(cfg.mountain_bar_lengths() - l0) / l0) < 1e-12
            volumes.append(enclosed_volume(cfg))
        assert all(b < a for a, b in zip(volumes, volumes[1:]))
        for s in (0.0, 0.5, 0.99):
            cfg = fold_configuration(p, s)
            v_div = enclosed_volume(cfg)
            v_mc = mc_volume(cfg, n_samples=1_000_000, seed=17)
            assert abs(v_div - v_mc) / v_div < 0.01


def test_criterion_monostability():
    with criterion("monostability and autonomous recovery", 10.0):
        model = FoldEnergyModel(pattern=default_robot_pattern())
        grid = np.linspace(0.0, 1.0, 201)
        energies = [fold_energy(model, float(s)) for s in grid]
        assert all(b > a for a, b in zip(energies, energies[1:]))
        for s0 in (0.05, 0.3, 0.6, 0.9, 1.0):
            st = FoldState(s=s0)
            for _ in range(40000):
                st = _advance(st, model, 0.0, 1e-4)
            assert st.s < 0.01


def test_criterion_dual_plate_equality():
    with criterion("dual-plate torque equality", 5.0):
        asm = make_dual_assembly(hexagonal_plate_volume(3.9e-3))
        for strength in (0.01, 0.2):
            b = strength * asm.m_net / np.linalg.norm(asm.m_net)
            t1, t2 = fold_torque_pair(asm, b, EYE)
            n1, n2 = np.linalg.norm(t1), np.linalg.norm(t2)
            assert abs(n1 - n2) <= 1e-12 * max(n1, n2)
            assert t1[2] * t2[2] < 0


def test_criterion_self_adaptive_wall():
    with criterion("self-adaptive wall crossing", 120.0):
        trace = run_scenario(parse_scenario("""
robot {
  yaw=15deg
}
world {
  ground flat
  obstacle wall height=9mm x=40mm
}
schedule {
  rotate axis=(0,1,0) strength=10mT freq=4Hz for=12s
}
"""))
        assert trace.samples[-1].position[0] > 0.045
        modes = [e.detail["mode"] for e in trace.events if e.event == "mode"]
        it = iter(modes)
        assert all(any(x == w for x in it) for w in ("rolling", "flipping", "rolling")), modes


def test_criterion_terrain_suite():
    with criterion("terrain suite", 600.0):
        body = make_body(default_robot_pattern())
        cmd = FieldCommand.rotating(np.array([0.0, 1.0, 0.0]), 0.01, 4.0)
        courses = {
            "stairs": ([terrain.ground(0.0)] + terrain.stairs(0.03, 4e-3, 4e-3, 3), 0.064),
            "incline": ([terrain.ground(0.0)] + terrain.incline(0.03, math.radians(30), 0.015), 0.07),
            "columns": ([terrain.ground(0.0)] + terrain.column_array(0.03, 4e-3, 8e-3), 0.064),
            "cylinder": ([terrain.ground(0.0), terrain.cylinder(0.03, 4e-3)], 0.044),
        }
        for name, (rows, x_end) in courses.items():
            eng = Engine(body, terrain.pack(rows))
            eng.settle_on_ground(x=0.0, yaw=math.radians(15))
            for _ in range(5000):
                eng.step(FieldCommand.off(), 0.0)
            done = False
            for i in range(250000):
                st = eng.step(cmd, i * 1e-4)
                if st.position[0] > x_end and st.contact:
                    done = True
                    break
            assert done, f"{name} not traversed (x={st.position[0] * 1e3:.1f} mm)"


def test_criterion_jump_calibration():
    with criterion("jump calibration", 300.0):
        body = make_body(default_robot_pattern())
        cal = calibrate_jump(body, 23.5e-3, 56.2e-3)
        assert cal.converged
        assert abs(cal.height - 23.5e-3) / 23.5e-3 < 0.15
        assert abs(cal.distance - 56.2e-3) / 56.2e-3 < 0.15
        # inverse crime on the identifiable launch-energy dial
        known = 3.0e-3
        obs = jump(body, 40e-3, math.radians(120), pulse_duration=known,
                   contact=ContactParams(k_n=150.0, mu=1.0))
        rec = calibrate_jump(body, obs.apex_height, obs.distance,
                             free=("duration",), initial=(2.2e-3, 150.0, 1.0))
        assert abs(rec.pulse_duration - known) / known < 0.05


def test_criterion_swim_calibration():
    with criterion("swim calibration", 300.0):
        coeffs = default_coefficients(7.8e-3)
        # model exactness at the calibration points
        assert abs(terminal_speed(coeffs["hole_cuts"], 30.0, 7.8e-3) - 81.2e-3) / 81.2e-3 < 1e-9
        assert abs(terminal_speed(coeffs["plain"], 30.0, 7.8e-3) - 66.0e-3) / 66.0e-3 < 1e-9
        # stepper reproduces both within 2 percent
        assert measure_swim_speed(default_body("hole_cuts"), 30.0) == pytest.approx(81.2e-3, rel=0.02)
        assert measure_swim_speed(default_body("plain"), 30.0) == pytest.approx(66.0e-3, rel=0.02)
        # monotone in frequency across 2..30 Hz
        freqs = [2.0, 8.0, 15.0, 22.0, 30.0]
        speeds = [measure_swim_speed(default_body("hole_cuts"), f) for f in freqs]
        assert all(b > a for a, b in zip(speeds, speeds[1:])), speeds
        # spin reversal reverses the swim direction
        body = default_body("hole_cuts")
        from amphibori.engine.swim import swim_engine

        eng = swim_engine(body)
        cmd = FieldCommand.rotating(np.array([-1.0, 0.0, 0.0]), 0.01, 30.0)
        for i in range(30000):
            st = eng.step(cmd, i * 1e-4)
        assert st.vel[0] < -0.05


def test_criterion_pump_dose():
    with criterion("pump dose linearity and conservation", 10.0):
        model = FoldEnergyModel(pattern=default_robot_pattern())
        per = cycle_dose(model)
        initial = 10 * per
        one = pump_cycle(FoldState(s=0.0, reservoir=initial), model, 1)
        for n in (2, 3, 5, 9):
            state = pump_cycle(FoldState(s=0.0, reservoir=initial), model, n)
            assert state.dose_delivered == pytest.approx(n * one.dose_delivered, rel=1e-12)
            total = state.reservoir + state.dose_delivered
            assert abs(total - initial) <= 1e-15 * initial


def test_criterion_mission():
    with criterion("amphibious cargo mission", 900.0):
        first = run_mission(seed=1)
        assert first.events == list(MISSION_EVENTS)
        second = run_mission(seed=2)
        assert second.events == first.events
        a = hashlib.sha256()
        b = hashlib.sha256()
        for s in first.trace.samples:
            a.update(repr((s.t, tuple(s.position), s.mode)).encode())
        for s in second.trace.samples:
            b.update(repr((s.t, tuple(s.position), s.mode)).encode())
        assert a.hexdigest() == b.hexdigest()


def test_criterion_path_following():
    with criterion("path following", 300.0):
        body = make_body(default_robot_pattern())

        def engine():
            eng = Engine(body, terrain.pack([]), fluids=[FluidSpec(level=10.0)])
            eng.state.position = np.array([0.0, 0.0, -0.2])
            eng.state.quat = quat_from_axis_angle(np.array([0.0, 1.0, 0.0]), math.pi / 2)
            return eng

        eng = engine()
        _, _, rep = path_follow(eng, lemniscate_waypoints(eng.state.position, 0.03, z=-0.2))
        assert rep.completed and rep.max_cross_track < 2 * BODY_LENGTH
        eng = engine()
        _, _, rep = path_follow(eng, spiral_waypoints(eng.state.position, 0.02, 0.015, turns=2.0))
        assert rep.completed and rep.max_cross_track < 2 * BODY_LENGTH


def test_criterion_parser():
    with criterion("parser round-trip, located errors, fuzz", 120.0):
        s1 = serialize_scenario(parse_scenario(FULL))
        assert s1 == serialize_scenario(parse_scenario(s1))
        assert len(MALFORMED) >= 20
        for text, needle in MALFORMED:
            with pytest.raises(ScenarioParseError) as exc_info:
                parse_scenario(text)
            assert exc_info.value.line is not None or exc_info.value.key_path is not None
        rng = np.random.default_rng(5)
        alphabet = list(string.printable)
        for _ in range(100_000):
            n = int(rng.integers(0, 60))
            idx = rng.integers(0, len(alphabet), size=n)
            try:
                parse_scenario("".join(alphabet[i] for i in idx))
            except ScenarioParseError:
                pass


def test_criterion_determinism(tmp_path):
    with criterion("byte-identical seeded traces", 120.0):
        text = """
robot {
  yaw=15deg
}
world {
  ground flat
  obstacle wall height=9mm x=40mm
}
schedule {
  rotate axis=(0,1,0) strength=10mT freq=4Hz for=6s
}
"""
        digests = []
        for k in range(2):
            trace = run_scenario(parse_scenario(text))
            path = tmp_path / f"r{k}.csv"
            trace.to_csv(path)
            digests.append(hashlib.sha256(path.read_bytes()).hexdigest())
        assert digests[0] == digests[1]
