"""Scenario text format: line-oriented blocks for robot, world, schedule and
solver overrides.

    # comment
    robot {
      n=6
      diameter=7.8mm
      height=6.8mm
      variant=hole_cuts        # hole_cuts | plain
      plates=single            # single | dual
      reservoir=20ul
      yaw=15deg                # initial heading, optional
    }
    world {
      ground flat
      obstacle wall height=9mm x=40mm
      obstacle stairs gap=4mm rise=4mm count=3 x=30mm
      obstacle incline angle=30deg x=30mm run=15mm
      obstacle columns height=4mm spacing=8mm x=30mm
      obstacle cylinder diameter=4mm x=30mm
      water level=30mm from=60mm
      cargo sphere diameter=2mm x=90mm y=0mm z=4mm
    }
    schedule {
      rotate axis=(0,1,0) strength=10mT freq=4Hz for=5s
      rotate axis=(1,0,0) strength=10mT freq=30Hz
      until position=(80mm,0mm,5mm) tol=2mm
      pulse dir=(0,0,1) strength=40mT for=30ms
      pump cycles=3 strength=200mT
      off for=1s
    }
    sim {                      # optional solver overrides
      mu=0.8
      kn=200
      cn=0.05
    }

Units (mm, mT, Hz, s, ms, deg, ul) convert to SI at the boundary; unknown
keys are errors, not warnings; every error carries its source location.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

from ..errors import ScenarioParseError
from ..units import fmt_si, parse_quantity, parse_vector
from .schedule import Schedule, Segment, Until
from .world import World

_BLOCKS = ("robot", "world", "schedule", "sim")


@dataclass
class RobotConfig:
    n: int = 6
    diameter: float = 7.8e-3
    height: float = 6.8e-3
    variant: str = "hole_cuts"
    plates: str = "single"
    reservoir: float = 20e-9
    density: float = 1000.0
    magnetization: float = 64e3
    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        if self.variant not in ("hole_cuts", "plain"):
            raise ScenarioParseError(f"robot.variant must be hole_cuts|plain, got {self.variant!r}",
                                     key_path="robot.variant")
        if self.plates not in ("single", "dual"):
            raise ScenarioParseError(f"robot.plates must be single|dual, got {self.plates!r}",
                                     key_path="robot.plates")


@dataclass
class SimOverrides:
    dt: float | None = None
    sample_rate: float | None = None
    mu: float | None = None
    kn: float | None = None
    cn: float | None = None


@dataclass
class Scenario:
    robot: RobotConfig = field(default_factory=RobotConfig)
    world: World = field(default_factory=World)
    schedule: Schedule = field(default_factory=Schedule)
    sim: SimOverrides = field(default_factory=SimOverrides)

    def validate(self) -> None:
        hole = 3e-3 if self.robot.variant == "hole_cuts" else None
        self.world.validate(hole_diameter=hole)


_ROBOT_KEYS = {
    "n": ("int", None),
    "diameter": ("qty", None),
    "height": ("qty", None),
    "variant": ("enum", ("hole_cuts", "plain")),
    "plates": ("enum", ("single", "dual")),
    "reservoir": ("qty", None),
    "density": ("qty", None),
    "magnetization": ("qty", None),
    "x": ("qty", None),
    "y": ("qty", None),
    "yaw": ("qty", None),
}

_SIM_KEYS = {
    "dt": ("qty", None),
    "sample_rate": ("qty", None),
    "mu": ("qty", None),
    "kn": ("qty", None),
    "cn": ("qty", None),
}


def _err(msg, line_no, key_path=None):
    raise ScenarioParseError(msg, line=line_no, key_path=key_path)


def _parse_kv(tokens, line_no, key_path):
    """key=value tokens -> dict of raw strings."""
    out = {}
    for tok in tokens:
        if "=" not in tok:
            _err(f"expected key=value, got {tok!r}", line_no, key_path)
        key, _, val = tok.partition("=")
        if not key or not val:
            _err(f"malformed key=value {tok!r}", line_no, key_path)
        if key in out:
            _err(f"duplicate key {key!r}", line_no, key_path)
        out[key] = val
    return out


def _qty(raw, line_no, key_path):
    try:
        return parse_quantity(raw)
    except ValueError as exc:
        _err(str(exc), line_no, key_path)


def _vec(raw, line_no, key_path):
    try:
        return parse_vector(raw)
    except ValueError as exc:
        _err(str(exc), line_no, key_path)


def _split_top(text):
    """Split a line into tokens, keeping (...) groups intact."""
    out = []
    depth = 0
    cur = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch.isspace() and depth == 0:
            if cur:
                out.append("".join(cur))
                cur = []
        else:
            cur.append(ch)
    if cur:
        out.append("".join(cur))
    return out


def parse_scenario(text: str) -> Scenario:
    if not isinstance(text, str):
        raise ScenarioParseError("scenario must be UTF-8 text")
    robot_kv = {}
    world = World(ground=False)
    raw_segments: list[tuple[int, dict]] = []
    sim = SimOverrides()
    block = None
    seen_blocks = set()

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = _split_top(line)

        if block is None:
            if len(tokens) == 2 and tokens[1] == "{" and tokens[0] in _BLOCKS:
                block = tokens[0]
                if block in seen_blocks:
                    _err(f"duplicate block {block!r}", line_no)
                seen_blocks.add(block)
                continue
            if len(tokens) == 1 and tokens[0] in _BLOCKS:
                _err(f"expected '{{' after block name {tokens[0]!r}", line_no)
            _err(f"expected a block header (one of {', '.join(_BLOCKS)}), got {line!r}", line_no)

        if tokens == ["}"]:
            block = None
            continue

        if block == "robot":
            kv = _parse_kv(tokens, line_no, "robot")
            for key, val in kv.items():
                if key not in _ROBOT_KEYS:
                    _err(f"unknown robot key {key!r}", line_no, f"robot.{key}")
                kind, allowed = _ROBOT_KEYS[key]
                if kind == "int":
                    try:
                        robot_kv[key] = int(val)
                    except ValueError:
                        _err(f"robot.{key} must be an integer", line_no, f"robot.{key}")
                elif kind == "enum":
                    if val not in allowed:
                        _err(f"robot.{key} must be one of {allowed}", line_no, f"robot.{key}")
                    robot_kv[key] = val
                else:
                    robot_kv[key] = _qty(val, line_no, f"robot.{key}")

        elif block == "sim":
            kv = _parse_kv(tokens, line_no, "sim")
            for key, val in kv.items():
                if key not in _SIM_KEYS:
                    _err(f"unknown sim key {key!r}", line_no, f"sim.{key}")
                setattr(sim, key, _qty(val, line_no, f"sim.{key}"))

        elif block == "world":
            head = tokens[0]
            if head == "ground":
                if tokens[1:] != ["flat"]:
                    _err("only 'ground flat' is supported", line_no, "world.ground")
                world.ground = True
            elif head == "obstacle":
                if len(tokens) < 2:
                    _err("obstacle needs a kind", line_no, "world.obstacle")
                kind = tokens[1]
                kv = _parse_kv(tokens[2:], line_no, f"world.obstacle.{kind}")
                params = {}
                for key, val in kv.items():
                    params[key] = (
                        int(val) if key == "count" else _qty(val, line_no, f"world.obstacle.{kind}.{key}")
                    )
                try:
                    world.add_obstacle(kind, **params)
                except ScenarioParseError as exc:
                    raise ScenarioParseError(str(exc.args[0]) if exc.args else "invalid obstacle",
                                             line=line_no, key_path=exc.key_path) from None
                except TypeError:
                    _err(f"invalid parameters for obstacle {kind!r}: {sorted(kv)}", line_no,
                         f"world.obstacle.{kind}")
            elif head == "water":
                kv = _parse_kv(tokens[1:], line_no, "world.water")
                unknown = set(kv) - {"level", "from", "to", "viscosity"}
                if unknown:
                    _err(f"unknown water keys {sorted(unknown)}", line_no, "world.water")
                if "level" not in kv:
                    _err("water needs level=", line_no, "world.water.level")
                world.add_water(
                    level=_qty(kv["level"], line_no, "world.water.level"),
                    x_from=_qty(kv["from"], line_no, "world.water.from") if "from" in kv else -math.inf,
                    x_to=_qty(kv["to"], line_no, "world.water.to") if "to" in kv else math.inf,
                    mu=_qty(kv["viscosity"], line_no, "world.water.viscosity") if "viscosity" in kv else 1e-3,
                )
            elif head == "cargo":
                if len(tokens) < 2 or tokens[1] != "sphere":
                    _err("only 'cargo sphere' is supported", line_no, "world.cargo")
                kv = _parse_kv(tokens[2:], line_no, "world.cargo")
                unknown = set(kv) - {"diameter", "x", "y", "z", "density"}
                if unknown:
                    _err(f"unknown cargo keys {sorted(unknown)}", line_no, "world.cargo")
                for need in ("diameter", "x", "y", "z"):
                    if need not in kv:
                        _err(f"cargo needs {need}=", line_no, f"world.cargo.{need}")
                d = _qty(kv["diameter"], line_no, "world.cargo.diameter")
                if d <= 0:
                    _err("cargo diameter must be positive", line_no, "world.cargo.diameter")
                world.add_cargo(
                    [_qty(kv[k], line_no, f"world.cargo.{k}") for k in ("x", "y", "z")],
                    diameter=d,
                    density=_qty(kv["density"], line_no, "world.cargo.density") if "density" in kv else 1200.0,
                )
            else:
                _err(f"unknown world entry {head!r}", line_no, "world")

        elif block == "schedule":
            head = tokens[0]
            kv = _parse_kv(tokens[1:], line_no, f"schedule.{head}")
            try:
                if head == "rotate":
                    unknown = set(kv) - {"axis", "strength", "freq", "for"}
                    if unknown:
                        _err(f"unknown rotate keys {sorted(unknown)}", line_no, "schedule.rotate")
                    for need in ("axis", "strength", "freq"):
                        if need not in kv:
                            _err(f"rotate needs {need}=", line_no, f"schedule.rotate.{need}")
                    raw_segments.append((line_no, dict(
                        kind="rotate",
                        axis=_vec(kv["axis"], line_no, "schedule.rotate.axis"),
                        strength=_qty(kv["strength"], line_no, "schedule.rotate.strength"),
                        frequency=_qty(kv["freq"], line_no, "schedule.rotate.freq"),
                        duration=_qty(kv["for"], line_no, "schedule.rotate.for") if "for" in kv else None,
                        until=None,
                    )))
                elif head == "pulse":
                    unknown = set(kv) - {"dir", "strength", "for"}
                    if unknown:
                        _err(f"unknown pulse keys {sorted(unknown)}", line_no, "schedule.pulse")
                    for need in ("dir", "strength", "for"):
                        if need not in kv:
                            _err(f"pulse needs {need}=", line_no, f"schedule.pulse.{need}")
                    raw_segments.append((line_no, dict(
                        kind="pulse",
                        axis=_vec(kv["dir"], line_no, "schedule.pulse.dir"),
                        strength=_qty(kv["strength"], line_no, "schedule.pulse.strength"),
                        duration=_qty(kv["for"], line_no, "schedule.pulse.for"),
                    )))
                elif head == "off":
                    unknown = set(kv) - {"for"}
                    if unknown:
                        _err(f"unknown off keys {sorted(unknown)}", line_no, "schedule.off")
                    raw_segments.append((line_no, dict(
                        kind="off",
                        duration=_qty(kv["for"], line_no, "schedule.off.for") if "for" in kv else None,
                        until=None,
                    )))
                elif head == "pump":
                    unknown = set(kv) - {"cycles", "strength"}
                    if unknown:
                        _err(f"unknown pump keys {sorted(unknown)}", line_no, "schedule.pump")
                    for need in ("cycles", "strength"):
                        if need not in kv:
                            _err(f"pump needs {need}=", line_no, f"schedule.pump.{need}")
                    try:
                        cycles = int(kv["cycles"])
                    except ValueError:
                        _err("pump cycles must be an integer", line_no, "schedule.pump.cycles")
                    raw_segments.append((line_no, dict(
                        kind="pump", cycles=cycles,
                        strength=_qty(kv["strength"], line_no, "schedule.pump.strength"),
                    )))
                elif head == "until":
                    if not raw_segments:
                        _err("'until' must follow a rotate/off entry", line_no, "schedule.until")
                    target = raw_segments[-1][1]
                    if target["kind"] not in ("rotate", "off"):
                        _err(f"'until' cannot modify a {target['kind']} entry", line_no, "schedule.until")
                    if target.get("until") is not None:
                        _err("segment already has an 'until' trigger", line_no, "schedule.until")
                    unknown = set(kv) - {"position", "tol", "mode", "captured"}
                    if unknown:
                        _err(f"unknown until keys {sorted(unknown)}", line_no, "schedule.until")
                    if "position" in kv:
                        until = Until(
                            "position",
                            point=_vec(kv["position"], line_no, "schedule.until.position"),
                            tol=_qty(kv["tol"], line_no, "schedule.until.tol") if "tol" in kv else 2e-3,
                        )
                    elif "mode" in kv:
                        until = Until("mode", mode=kv["mode"])
                    elif "captured" in kv:
                        until = Until("captured")
                    else:
                        _err("until needs position=, mode= or captured=true", line_no, "schedule.until")
                    target["until"] = until
                else:
                    _err(f"unknown schedule entry {head!r}", line_no, "schedule")
            except ScenarioParseError as exc:
                if exc.line is None:
                    raise ScenarioParseError(str(exc.args[0]), line=line_no, key_path=exc.key_path) from None
                raise
        else:  # pragma: no cover
            _err(f"parser is in an unknown block {block!r}", line_no)

    if block is not None:
        raise ScenarioParseError(f"unterminated block {block!r}", line=len(text.splitlines()))

    segments = []
    for seg_line, raw in raw_segments:
        try:
            segments.append(Segment(**raw))
        except ScenarioParseError as exc:
            raise ScenarioParseError(str(exc.args[0]), line=seg_line, key_path=exc.key_path) from None

    robot = RobotConfig(**robot_kv)
    scenario = Scenario(robot=robot, world=world, schedule=Schedule(segments), sim=sim)
    scenario.validate()
    return scenario


def serialize_scenario(sc: Scenario) -> str:
    """Canonical text form; parse(serialize(parse(x))) is structurally x."""
    out = ["robot {"]
    defaults = RobotConfig()
    for f in fields(RobotConfig):
        val = getattr(sc.robot, f.name)
        if val == getattr(defaults, f.name):
            continue
        if f.name == "n":
            out.append(f"  n={val}")
        elif f.name in ("variant", "plates"):
            out.append(f"  {f.name}={val}")
        elif f.name in ("diameter", "height", "x", "y"):
            out.append(f"  {f.name}={fmt_si(val, 'mm')}")
        elif f.name == "reservoir":
            out.append(f"  reservoir={fmt_si(val, 'ul')}")
        elif f.name == "yaw":
            out.append(f"  yaw={fmt_si(val, 'deg')}")
        else:
            out.append(f"  {f.name}={val:.9g}")
    out.append("}")

    out.append("world {")
    if sc.world.ground:
        out.append("  ground flat")
    for ob in sc.world.obstacles:
        parts = [f"obstacle {ob.kind}"]
        for key, val in sorted(ob.params.items()):
            if key == "count":
                parts.append(f"count={val}")
            elif key == "angle":
                parts.append(f"angle={fmt_si(val, 'deg')}")
            elif key == "descending":
                continue
            else:
                parts.append(f"{key}={fmt_si(val, 'mm')}")
        out.append("  " + " ".join(parts))
    for fl in sc.world.fluids:
        parts = [f"water level={fmt_si(fl.level, 'mm')}"]
        if math.isfinite(fl.x_from):
            parts.append(f"from={fmt_si(fl.x_from, 'mm')}")
        if math.isfinite(fl.x_to):
            parts.append(f"to={fmt_si(fl.x_to, 'mm')}")
        if fl.mu != 1e-3:
            parts.append(f"viscosity={fl.mu:.9g}")
        out.append("  " + " ".join(parts))
    for c in sc.world.cargo:
        out.append(
            f"  cargo sphere diameter={fmt_si(c.diameter, 'mm')} "
            f"x={fmt_si(c.position[0], 'mm')} y={fmt_si(c.position[1], 'mm')} "
            f"z={fmt_si(c.position[2], 'mm')}"
            + (f" density={c.density:.9g}" if c.density != 1200.0 else "")
        )
    out.append("}")

    out.append("schedule {")
    for seg in sc.schedule.segments:
        if seg.kind == "rotate":
            line = (f"  rotate axis=({seg.axis[0]:.9g},{seg.axis[1]:.9g},{seg.axis[2]:.9g}) "
                    f"strength={fmt_si(seg.strength, 'mT')} freq={fmt_si(seg.frequency, 'Hz')}")
            if seg.duration is not None:
                line += f" for={fmt_si(seg.duration, 's')}"
            out.append(line)
        elif seg.kind == "pulse":
            out.append(f"  pulse dir=({seg.axis[0]:.9g},{seg.axis[1]:.9g},{seg.axis[2]:.9g}) "
                       f"strength={fmt_si(seg.strength, 'mT')} for={fmt_si(seg.duration, 's')}")
        elif seg.kind == "off":
            out.append(f"  off for={fmt_si(seg.duration, 's')}" if seg.duration is not None else "  off")
        elif seg.kind == "pump":
            out.append(f"  pump cycles={seg.cycles} strength={fmt_si(seg.strength, 'mT')}")
        if seg.until is not None and not (seg.kind in ("rotate", "off") and seg.until.kind == "mode"
                                          and seg.until.mode == "rest" and seg.duration is None):
            u = seg.until
            if u.kind == "position":
                out.append(f"  until position=({fmt_si(u.point[0], 'mm')},{fmt_si(u.point[1], 'mm')},"
                           f"{fmt_si(u.point[2], 'mm')}) tol={fmt_si(u.tol, 'mm')}")
            elif u.kind == "mode":
                out.append(f"  until mode={u.mode}")
            else:
                out.append("  until captured=true")
    out.append("}")

    sim_lines = []
    for f in fields(SimOverrides):
        val = getattr(sc.sim, f.name)
        if val is not None:
            sim_lines.append(f"  {f.name}={val:.9g}")
    if sim_lines:
        out.append("sim {")
        out.extend(sim_lines)
        out.append("}")
    return "\n".join(out) + "\n"
