"""World composition: terrain obstacles, fluid regions, and cargo.

Obstacles keep their parsed parameter dicts (for serialization and event
bookkeeping) alongside their kernel primitive encoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..engine import terrain
from ..engine.rigid import Cargo
from ..errors import ScenarioParseError
from ..hydro import FluidSpec

DEFAULT_BOUNDS = (0.16, 0.12, 0.08)  # workspace: 160 x 120 x 80 mm


@dataclass
class Obstacle:
    kind: str  # wall | stairs | incline | columns | cylinder
    params: dict
    x_far: float  # far edge in x; crossing it with ground contact = cleared

    def rows(self) -> list[np.ndarray]:
        p = self.params
        if self.kind == "wall":
            return [terrain.wall(p["x"], p["height"])]
        if self.kind == "stairs":
            return terrain.stairs(p["x"], p["gap"], p["rise"], p["count"],
                                  descending=p.get("descending", False))
        if self.kind == "incline":
            return terrain.incline(p["x"], p["angle"], p["run"])
        if self.kind == "columns":
            return terrain.column_array(p["x"], p["height"], p["spacing"])
        if self.kind == "cylinder":
            return [terrain.cylinder(p["x"], p["diameter"])]
        raise ScenarioParseError(f"unknown obstacle kind {self.kind!r}")


def make_obstacle(kind: str, params: dict) -> Obstacle:
    p = dict(params)
    p.setdefault("x", 0.03)
    if kind == "wall":
        if p.get("height", 0) <= 0:
            raise ScenarioParseError("wall height must be positive", key_path="world.obstacle.wall.height")
        far = p["x"] + 2e-3
    elif kind == "stairs":
        for key in ("gap", "rise"):
            if p.get(key, 0) <= 0:
                raise ScenarioParseError(f"stairs {key} must be positive", key_path=f"world.obstacle.stairs.{key}")
        p.setdefault("count", 3)
        if p["count"] < 1:
            raise ScenarioParseError("stairs count must be >= 1", key_path="world.obstacle.stairs.count")
        far = p["x"] + 2 * p["gap"] * p["count"]
    elif kind == "incline":
        if not 0 < p.get("angle", 0) < math.pi / 2:
            raise ScenarioParseError("incline angle must be in (0, 90) deg", key_path="world.obstacle.incline.angle")
        p.setdefault("run", 0.015)
        far = p["x"] + 2 * p["run"]
    elif kind == "columns":
        for key in ("height", "spacing"):
            if p.get(key, 0) <= 0:
                raise ScenarioParseError(f"columns {key} must be positive", key_path=f"world.obstacle.columns.{key}")
        far = p["x"] + 4 * p["spacing"]
    elif kind == "cylinder":
        if p.get("diameter", 0) <= 0:
            raise ScenarioParseError("cylinder diameter must be positive", key_path="world.obstacle.cylinder.diameter")
        far = p["x"] + p["diameter"] / 2
    else:
        raise ScenarioParseError(f"unknown obstacle kind {kind!r}", key_path="world.obstacle")
    return Obstacle(kind=kind, params=p, x_far=far)


@dataclass
class World:
    ground: bool = True
    ground_z: float = 0.0
    obstacles: list[Obstacle] = field(default_factory=list)
    fluids: list[FluidSpec] = field(default_factory=list)
    cargo: list[Cargo] = field(default_factory=list)
    platforms: list[dict] = field(default_factory=list)  # raw boxes (mission preset)
    bounds: tuple = DEFAULT_BOUNDS

    def validate(self, hole_diameter: float | None = None) -> None:
        bx, by, bz = self.bounds
        for ob in self.obstacles:
            if not 0 <= ob.params.get("x", 0) <= bx:
                raise ScenarioParseError(
                    f"obstacle x={ob.params.get('x')} outside workspace 0..{bx}",
                    key_path=f"world.obstacle.{ob.kind}.x",
                )
        for f in self.fluids:
            if not 0 <= f.level <= bz:
                raise ScenarioParseError(
                    f"water level {f.level} outside workspace 0..{bz}", key_path="world.water.level"
                )
        if hole_diameter is not None:
            for c in self.cargo:
                if c.diameter >= hole_diameter:
                    raise ScenarioParseError(
                        f"cargo diameter {c.diameter * 1e3:.3g}mm does not fit the "
                        f"{hole_diameter * 1e3:.3g}mm hole",
                        key_path="world.cargo.diameter",
                    )

    def terrain_prims(self) -> np.ndarray:
        rows = []
        if self.ground:
            rows.append(terrain.ground(self.ground_z))
        for p in self.platforms:
            rows.append(terrain.box(p["center"], p["half"]))
        for ob in self.obstacles:
            rows.extend(ob.rows())
        return terrain.pack(rows)

    def add_obstacle(self, kind: str, **params) -> Obstacle:
        ob = make_obstacle(kind, params)
        self.obstacles.append(ob)
        return ob

    def add_water(self, level: float, x_from: float = -math.inf, x_to: float = math.inf,
                  rho: float = 1000.0, mu: float = 1.0e-3) -> FluidSpec:
        f = FluidSpec(rho=rho, mu=mu, level=level, x_from=x_from, x_to=x_to)
        self.fluids.append(f)
        return f

    def add_cargo(self, position, diameter: float, density: float = 1200.0) -> Cargo:
        c = Cargo(position=np.array(position, dtype=float), diameter=diameter, density=density)
        self.cargo.append(c)
        return c
