import math
import string

import numpy as np
import pytest

from amphibori.errors import ScenarioParseError
from amphibori.scenario.dsl import RobotConfig, parse_scenario, serialize_scenario

MINIMAL = """
robot {
}
world {
  ground flat
}
schedule {
  rotate axis=(0,1,0) strength=10mT freq=4Hz for=5s
}
"""

FULL = """
# full-feature scenario
robot {
  n=6
  diameter=7.8mm
  height=6.8mm
  variant=hole_cuts
  plates=dual
  reservoir=20ul
  density=1005
  yaw=15deg
  x=5mm
}
world {
  ground flat
  obstacle wall height=9mm x=40mm
  obstacle stairs gap=4mm rise=4mm count=3 x=70mm
  obstacle incline angle=30deg x=100mm run=15mm
  obstacle columns height=4mm spacing=8mm x=130mm
  obstacle cylinder diameter=4mm x=150mm
  water level=30mm from=60mm
  cargo sphere diameter=2mm x=90mm y=0mm z=4mm
}
schedule {
  rotate axis=(0,1,0) strength=10mT freq=4Hz for=5s
  rotate axis=(1,0,0) strength=10mT freq=24Hz
  until position=(80mm,0mm,5mm) tol=2mm
  rotate axis=(1,0,0) strength=10mT freq=24Hz
  until captured=true
  pulse dir=(0,0,1) strength=40mT for=30ms
  pump cycles=3 strength=200mT
  off for=1s
}
sim {
  mu=0.8
}
"""


class TestParse:
    def test_minimal_scenario_uses_defaults(self):
        sc = parse_scenario(MINIMAL)
        assert sc.robot.n == 6
        assert sc.robot.diameter == pytest.approx(7.8e-3)
        assert sc.world.ground
        assert len(sc.schedule.segments) == 1
        seg = sc.schedule.segments[0]
        assert seg.kind == "rotate"
        assert seg.strength == pytest.approx(10e-3)
        assert seg.frequency == pytest.approx(4.0)
        assert seg.duration == pytest.approx(5.0)

    def test_full_scenario(self):
        sc = parse_scenario(FULL)
        assert sc.robot.plates == "dual"
        assert sc.robot.yaw == pytest.approx(math.radians(15))
        assert len(sc.world.obstacles) == 5
        assert sc.world.obstacles[2].params["angle"] == pytest.approx(math.radians(30))
        assert len(sc.world.fluids) == 1
        assert sc.world.fluids[0].level == pytest.approx(30e-3)
        assert len(sc.world.cargo) == 1
        assert len(sc.schedule.segments) == 6
        assert sc.schedule.segments[1].until.kind == "position"
        assert sc.schedule.segments[2].until.kind == "captured"
        assert sc.sim.mu == pytest.approx(0.8)

    def test_comments_and_blank_lines_ignored(self):
        sc = parse_scenario("# lead\n\n" + MINIMAL + "\n# trail\n")
        assert sc.robot.n == 6

    def test_round_trip_structural_equality(self):
        for text in (MINIMAL, FULL):
            s1 = serialize_scenario(parse_scenario(text))
            s2 = serialize_scenario(parse_scenario(s1))
            assert s1 == s2


MALFORMED = [
    ("robot {\n  n=abc\n}\n", "robot.n"),
    ("robot {\n  bogus=1\n}\n", "bogus"),
    ("robot {\n  variant=square\n}\n", "variant"),
    ("robot {\n  n 6\n}\n", "key=value"),
    ("robot {\n", "unterminated"),
    ("junk line\n", "block header"),
    ("world {\n  ground bumpy\n}\n", "ground"),
    ("world {\n  obstacle wall height=-1mm x=10mm\n}\n", "height"),
    ("world {\n  obstacle spikes height=1mm\n}\n", "spikes"),
    ("world {\n  obstacle stairs gap=0mm rise=4mm x=10mm\n}\n", "gap"),
    ("world {\n  obstacle incline angle=95deg x=10mm\n}\n", "angle"),
    ("world {\n  water from=10mm\n}\n", "level"),
    ("world {\n  water level=900mm\n}\n", "level"),
    ("world {\n  cargo sphere diameter=2mm x=1mm y=1mm\n}\n", "z"),
    ("world {\n  cargo sphere diameter=5mm x=1mm y=1mm z=1mm\n}\n", "hole"),
    ("schedule {\n  rotate strength=10mT freq=4Hz for=1s\n}\n", "axis"),
    ("schedule {\n  rotate axis=(0,1) strength=10mT freq=4Hz for=1s\n}\n", "3 components"),
    ("schedule {\n  pulse dir=(0,0,1) strength=40mT\n}\n", "for"),
    ("schedule {\n  until position=(0,0,0)\n}\n", "follow"),
    ("schedule {\n  rotate axis=(0,1,0) strength=10mT freq=4Hz\n}\n", "until"),
    ("schedule {\n  warp speed=9\n}\n", "warp"),
    ("robot {\n  diameter=7.8qq\n}\n", "unknown unit"),
]


class TestErrors:
    @pytest.mark.parametrize("text,needle", MALFORMED)
    def test_malformed_fixtures_error_with_location(self, text, needle):
        with pytest.raises(ScenarioParseError) as exc_info:
            parse_scenario(text)
        err = exc_info.value
        assert needle.lower() in str(err).lower()
        assert err.line is not None or err.key_path is not None

    def test_error_carries_line_number(self):
        text = "robot {\n  n=6\n  bogus=1\n}\n"
        with pytest.raises(ScenarioParseError) as exc_info:
            parse_scenario(text)
        assert exc_info.value.line == 3


class TestFuzz:
    def test_fuzz_never_crashes(self):
        # 100k random inputs: every outcome is either a parse or a located
        # ScenarioParseError; nothing else may escape
        rng = np.random.default_rng(2024)
        alphabet = list(string.ascii_lowercase + string.digits + " ={}()#.,-\n\tmTHzsdegul")
        words = ["robot", "world", "schedule", "sim", "{", "}", "rotate", "axis",
                 "strength", "freq", "for", "obstacle", "wall", "water", "cargo",
                 "until", "pump", "off", "pulse", "=", "(0,1,0)", "10mT", "4Hz",
                 "5s", "ground", "flat", "height", "x", "#", "\n"]
        for k in range(100_000):
            if k % 2 == 0:
                n = int(rng.integers(0, 40))
                idx = rng.integers(0, len(words), size=n)
                text = " ".join(words[i] for i in idx)
            else:
                n = int(rng.integers(0, 120))
                idx = rng.integers(0, len(alphabet), size=n)
                text = "".join(alphabet[i] for i in idx)
            try:
                parse_scenario(text)
            except ScenarioParseError:
                pass
        # surviving the loop is the assertion

    def test_fuzz_mutations_of_valid_text(self):
        rng = np.random.default_rng(7)
        base = FULL
        for _ in range(2000):
            chars = list(base)
            for _ in range(int(rng.integers(1, 6))):
                pos = int(rng.integers(0, len(chars)))
                chars[pos] = chr(int(rng.integers(32, 127)))
            try:
                parse_scenario("".join(chars))
            except ScenarioParseError:
                pass
