"""Magnetizations, applied-field programs, and magnetic torques.

The torque on a plate of volume V carrying magnetization M in a field B is
T = V (M x B). The dual-plate folding assembly carries two equal-magnitude
in-plane magnetizations at an angle alpha; a field along their vector sum
produces equal and opposite torque components about the longitudinal axis,
which drive the fold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# composite NdFeB/silicone plate, assumed value (calibration parameter)
DEFAULT_MAGNETIZATION = 64e3  # A/m
DEFAULT_PLATE_THICKNESS = 0.8e-3  # m


def hexagonal_plate_volume(radius: float, thickness: float = DEFAULT_PLATE_THICKNESS) -> float:
    """Plate matching the robot cross-section (regular n=6 polygon)."""
    return 1.5 * math.sqrt(3.0) * radius * radius * thickness


@dataclass(frozen=True)
class MagneticPlate:
    """A thin magnetic plate glued to one polygonal end.

    ``magnetization`` is the body-frame M vector [A/m]; it must lie in the
    plate plane, i.e. perpendicular to the robot's longitudinal (z) axis.
    """

    volume: float
    magnetization: np.ndarray
    attach_end: str = "bottom"  # {"top", "bottom"}

    def __post_init__(self):
        if self.volume <= 0:
            raise ValueError("plate volume must be positive")
        m = np.asarray(self.magnetization, dtype=float)
        object.__setattr__(self, "magnetization", m)
        if np.linalg.norm(m) <= 0:
            raise ValueError("magnetization must be non-zero")
        if abs(m[2]) > 1e-9 * np.linalg.norm(m):
            raise ValueError("magnetization must be in-plane (perpendicular to the longitudinal axis)")
        if self.attach_end not in ("top", "bottom"):
            raise ValueError("attach_end must be 'top' or 'bottom'")

    @property
    def moment(self) -> np.ndarray:
        """Magnetic moment V*M [A m^2]."""
        return self.volume * self.magnetization


@dataclass(frozen=True)
class DualPlateAssembly:
    """Two plates with |M1| = |M2| at relative angle alpha (default 90 deg).

    ``plate1`` sits at the bottom end, ``plate2`` at the top. The default
    construction orients M1/M2 symmetrically about the body +x axis so that a
    field along M_net folds (rather than unfolds) a cell of the given
    chirality.
    """

    plate1: MagneticPlate
    plate2: MagneticPlate
    alpha: float = math.pi / 2

    def __post_init__(self):
        m1 = np.linalg.norm(self.plate1.magnetization)
        m2 = np.linalg.norm(self.plate2.magnetization)
        if not math.isclose(m1, m2, rel_tol=1e-9):
            raise ValueError("dual-plate assembly requires |M1| = |M2|")
        cosang = float(
            self.plate1.magnetization @ self.plate2.magnetization / (m1 * m2)
        )
        ang = math.acos(min(1.0, max(-1.0, cosang)))
        if not math.isclose(ang, self.alpha, abs_tol=1e-9):
            raise ValueError(f"plate angle {ang:.6f} rad does not match alpha {self.alpha:.6f} rad")

    @property
    def m_net(self) -> np.ndarray:
        """Net magnetization vector sum M1 + M2 (body frame)."""
        return self.plate1.magnetization + self.plate2.magnetization


def make_dual_assembly(
    plate_volume: float,
    magnetization: float = DEFAULT_MAGNETIZATION,
    alpha: float = math.pi / 2,
    chirality: int = 1,
) -> DualPlateAssembly:
    """Standard folding assembly: M_net along body +x, fold-driving signs
    matched to the cell chirality (the top plate's torque must twist the top
    ring in the folding direction)."""
    if not 0 < alpha < math.pi:
        raise ValueError("alpha must be in (0, 180) degrees")
    half = alpha / 2.0
    # chirality +1 folds by twisting the top ring toward +phi, so the top
    # plate magnetization must lag M_net (torque about +z when B || M_net)
    lag = -chirality * half
    lead = chirality * half
    m1 = magnetization * np.array([math.cos(lead), math.sin(lead), 0.0])
    m2 = magnetization * np.array([math.cos(lag), math.sin(lag), 0.0])
    return DualPlateAssembly(
        plate1=MagneticPlate(plate_volume, m1, "bottom"),
        plate2=MagneticPlate(plate_volume, m2, "top"),
        alpha=alpha,
    )


@dataclass(frozen=True)
class FieldCommand:
    """Applied uniform-field program: Off, Rotating, or Pulse.

    Rotating: B(t) = strength * (cos(2 pi f t + phase0) e1 + sin(...) e2)
    with (e1, e2, axis) a right-handed orthonormal triad; e1 derives
    deterministically from the axis (see ``rotation_frame``).
    Pulse: constant ``strength * direction`` during [0, duration), zero after.
    """

    kind: str  # {"off", "rotating", "pulse"}
    axis: np.ndarray | None = None
    strength: float = 0.0
    frequency: float = 0.0
    phase0: float = 0.0
    duration: float = 0.0

    def __post_init__(self):
        if self.kind not in ("off", "rotating", "pulse"):
            raise ValueError(f"unknown field command kind {self.kind!r}")
        if self.strength < 0:
            raise ValueError("field strength must be >= 0")
        if self.frequency < 0:
            raise ValueError("field frequency must be >= 0")
        if self.kind != "off":
            a = np.asarray(self.axis, dtype=float)
            n = np.linalg.norm(a)
            if abs(n - 1.0) > 1e-9:
                if n <= 0:
                    raise ValueError("axis/direction must be a unit vector")
                a = a / n
            object.__setattr__(self, "axis", a)
        if self.kind == "rotating":
            e1, e2 = rotation_frame(self.axis)
            object.__setattr__(self, "_frame", (e1, e2))

    @staticmethod
    def off() -> "FieldCommand":
        return FieldCommand(kind="off")

    @staticmethod
    def rotating(axis, strength: float, frequency: float, phase0: float = 0.0) -> "FieldCommand":
        return FieldCommand(
            kind="rotating", axis=np.asarray(axis, float), strength=strength,
            frequency=frequency, phase0=phase0,
        )

    @staticmethod
    def pulse(direction, strength: float, duration: float) -> "FieldCommand":
        return FieldCommand(
            kind="pulse", axis=np.asarray(direction, float), strength=strength, duration=duration,
        )


def rotation_frame(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic (e1, e2) completing the axis to a right-handed triad.

    e1 = normalize(axis x z-hat) unless the axis is nearly vertical, in which
    case e1 = normalize(axis x x-hat); e2 = axis x e1.
    """
    a = np.asarray(axis, dtype=float)
    zhat = np.array([0.0, 0.0, 1.0])
    e1 = np.cross(a, zhat)
    if np.linalg.norm(e1) < 1e-6:
        e1 = np.cross(a, np.array([1.0, 0.0, 0.0]))
    e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(a, e1)
    return e1, e2


def field_at(command: FieldCommand, t: float) -> np.ndarray:
    """Field vector B(t) [T] of a command, with t measured from segment start."""
    if command.kind == "off" or command.strength == 0.0:
        return np.zeros(3)
    if command.kind == "pulse":
        if 0.0 <= t < command.duration:
            return command.strength * command.axis
        return np.zeros(3)
    e1, e2 = command._frame  # precomputed at construction
    ang = 2.0 * math.pi * command.frequency * t + command.phase0
    c, s = command.strength * math.cos(ang), command.strength * math.sin(ang)
    return np.array([c * e1[0] + s * e2[0], c * e1[1] + s * e2[1], c * e1[2] + s * e2[2]])


def torque(plate: MagneticPlate, b_world: np.ndarray, body_orientation: np.ndarray) -> np.ndarray:
    """T = V (M_world x B) with M_world = R M_body; R is a 3x3 rotation."""
    m_world = body_orientation @ plate.magnetization
    return plate.volume * np.cross(m_world, np.asarray(b_world, float))


def fold_torque_pair(
    assembly: DualPlateAssembly, b_world: np.ndarray, body_orientation: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-plate torques (T1, T2); equal magnitude and opposite fold-driving
    components whenever B lies along a bisector of (M1, M2)."""
    t1 = torque(assembly.plate1, b_world, body_orientation)
    t2 = torque(assembly.plate2, b_world, body_orientation)
    return t1, t2


def folding_drive_factor(alpha: float) -> float:
    """Per-plate torque magnitude over V |M| |B| when B || M_net: sin(alpha/2)."""
    if not 0.0 < alpha < math.pi:
        raise ValueError("alpha must be strictly between 0 and 180 degrees")
    return math.sin(alpha / 2.0)
