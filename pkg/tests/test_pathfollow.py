import math

import numpy as np
import pytest

from amphibori.engine.kernels import quat_from_axis_angle
from amphibori.engine.rigid import Engine, make_body
from amphibori.engine import terrain
from amphibori.geometry import default_robot_pattern
from amphibori.hydro import FluidSpec
from amphibori.scenario.pathfollow import (
    ControllerParams,
    cross_track_error,
    lemniscate_waypoints,
    path_follow,
    spiral_waypoints,
)

BODY_LENGTH = 6.8e-3


def swim_engine():
    body = make_body(default_robot_pattern())
    eng = Engine(body, terrain.pack([]), fluids=[FluidSpec(level=10.0)])
    eng.state.position = np.array([0.0, 0.0, -0.2])
    eng.state.quat = quat_from_axis_angle(np.array([0.0, 1.0, 0.0]), math.pi / 2)
    return eng


class TestPathFollow:
    def test_two_waypoints_straight_line(self):
        eng = swim_engine()
        start = eng.state.position.copy()
        schedule, trace, report = path_follow(eng, [start, start + np.array([0.06, 0, 0])])
        assert report.completed
        assert report.max_cross_track < 2e-3
        # all emitted segments share (nearly) one axis
        axes = {tuple(np.round(s.axis, 2)) for s in schedule.segments}
        assert len(axes) <= 3

    def test_lemniscate_within_two_body_lengths(self):
        eng = swim_engine()
        wps = lemniscate_waypoints(eng.state.position, 0.03, z=float(eng.state.position[2]))
        _, _, report = path_follow(eng, wps)
        assert report.completed
        assert report.max_cross_track < 2 * BODY_LENGTH

    def test_spiral_monotone_progress_along_axis(self):
        eng = swim_engine()
        wps = spiral_waypoints(eng.state.position, 0.02, 0.015, turns=2.0)
        _, trace, report = path_follow(eng, wps)
        assert report.completed
        assert report.max_cross_track < 2 * BODY_LENGTH
        zs = [s.position[2] for s in trace.samples]
        coarse = zs[:: max(1, len(zs) // 24)]
        assert all(b > a - 2e-3 for a, b in zip(coarse, coarse[1:]))
        assert zs[-1] > zs[0] + 0.02

    def test_unreachable_waypoint_reports_partial(self):
        eng = swim_engine()
        start = eng.state.position.copy()
        wps = [start, start + np.array([0.05, 0.0, 0.0]),
               start + np.array([0.05, 0.0, 50.0])]  # 50 m away
        params = ControllerParams(timeout_per_leg=1.0)
        schedule, _, report = path_follow(eng, wps, params)
        assert not report.completed
        assert report.reached == 2
        assert "unreachable" in report.diagnostic
        assert len(schedule.segments) > 0

    def test_needs_two_waypoints(self):
        eng = swim_engine()
        with pytest.raises(ValueError):
            path_follow(eng, [eng.state.position])


class TestCrossTrack:
    def test_point_on_segment_is_zero(self):
        wps = [np.zeros(3), np.array([1.0, 0, 0])]
        assert cross_track_error(np.array([0.5, 0, 0]), wps) == 0.0

    def test_perpendicular_distance(self):
        wps = [np.zeros(3), np.array([1.0, 0, 0])]
        assert cross_track_error(np.array([0.5, 0.3, 0]), wps) == pytest.approx(0.3)

    def test_beyond_endpoints_clamps(self):
        wps = [np.zeros(3), np.array([1.0, 0, 0])]
        assert cross_track_error(np.array([2.0, 0, 0]), wps) == pytest.approx(1.0)
