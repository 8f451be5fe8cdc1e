"""Reduced-order fluid model: propeller-law thrust from spinning, quadratic
drag, spin resistance, the air-bubble interface mechanism, and the suction
capture rule.

Thrust follows the propeller law F = C_T rho f^2 D^4 along the longitudinal
axis; translational drag is quadratic on the frontal disc area; spinning
against the fluid costs tau = C_tau rho f |f| D^5. Only the ratio C_T / C_d
is identifiable from terminal-speed data, so C_d is fixed by convention per
variant (bluff body 0.8; the vented hole-and-cuts variant 0.6, encoding its
reduced frontal stagnation) and C_T is fitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

VARIANTS = ("plain", "hole_cuts")

FIXED_DRAG_COEFF = {"plain": 0.8, "hole_cuts": 0.6}
DEFAULT_SPIN_DRAG_COEFF = 0.02
# tumbling a drum broadside is far draggier than spinning it smoothly
DEFAULT_TRANSVERSE_SPIN_FACTOR = 10.0

WATER_DENSITY = 1000.0  # kg/m^3
WATER_VISCOSITY = 1.0e-3  # Pa s
GRAVITY = 9.81

# measured top speeds of the two build variants under a 10 mT field at 30 Hz
DEFAULT_CALIBRATION_POINTS = {
    "hole_cuts": [(30.0, 81.2e-3)],
    "plain": [(30.0, 66.0e-3)],
}


@dataclass(frozen=True)
class HydroCoefficients:
    """Dimensionless reduced-order coefficients for one robot variant."""

    c_thrust: float
    c_drag: float
    c_spin: float = DEFAULT_SPIN_DRAG_COEFF

    def __post_init__(self):
        if self.c_thrust < 0 or self.c_drag < 0 or self.c_spin < 0:
            raise ValueError("hydro coefficients must be >= 0")

    def scaled_for_viscosity(self, mu: float) -> "HydroCoefficients":
        """Viscous-fluid preset: drag terms scale by sqrt(mu / mu_water).

        A placeholder knob; the viscosity dependence is not modeled in depth.
        """
        factor = math.sqrt(mu / WATER_VISCOSITY)
        return replace(self, c_drag=self.c_drag * factor, c_spin=self.c_spin * factor)


@dataclass(frozen=True)
class FluidSpec:
    """A water region: physical properties plus basin placement.

    The region occupies x >= x_from (up to x_to) below z = level.
    """

    rho: float = WATER_DENSITY
    mu: float = WATER_VISCOSITY
    level: float = 0.0
    x_from: float = -math.inf
    x_to: float = math.inf

    def __post_init__(self):
        if self.rho <= 0 or self.mu <= 0:
            raise ValueError("fluid density and viscosity must be positive")

    def contains_x(self, x: float) -> bool:
        return self.x_from <= x <= self.x_to


def thrust(coeffs: HydroCoefficients, fluid: FluidSpec, f_spin: float, diameter: float,
           handedness: int = 1) -> float:
    """Axial thrust [N], signed along the longitudinal axis.

    Propeller law F = C_T rho f^2 D^4; the sign follows the right-hand rule:
    positive spin of a right-handed (+1) panel layout pushes the robot toward
    its +axis (hole) end.
    """
    if diameter <= 0:
        raise ValueError("diameter must be positive")
    magnitude = coeffs.c_thrust * fluid.rho * f_spin * f_spin * diameter**4
    return handedness * math.copysign(magnitude, f_spin) if f_spin != 0.0 else 0.0


def drag(coeffs: HydroCoefficients, fluid: FluidSpec, velocity: np.ndarray,
         diameter: float) -> np.ndarray:
    """Quadratic drag F = -1/2 rho C_d (pi D^2 / 4) |v| v."""
    if diameter <= 0:
        raise ValueError("diameter must be positive")
    v = np.asarray(velocity, dtype=float)
    speed = float(np.linalg.norm(v))
    area = math.pi * diameter * diameter / 4.0
    return -0.5 * fluid.rho * coeffs.c_drag * area * speed * v


def spin_resistance(coeffs: HydroCoefficients, fluid: FluidSpec, f_spin: float,
                    diameter: float) -> float:
    """Resistive torque about the longitudinal axis: -C_tau rho f |f| D^5."""
    if diameter <= 0:
        raise ValueError("diameter must be positive")
    return -coeffs.c_spin * fluid.rho * f_spin * abs(f_spin) * diameter**5


def terminal_speed(coeffs: HydroCoefficients, f_spin: float, diameter: float) -> float:
    """Steady speed where thrust balances drag: v = f D sqrt(8 C_T / (pi C_d))."""
    if coeffs.c_drag == 0:
        raise ValueError("terminal speed undefined for zero drag")
    return abs(f_spin) * diameter * math.sqrt(8.0 * coeffs.c_thrust / (math.pi * coeffs.c_drag))


def calibrate_swim(
    points_per_variant: dict[str, list[tuple[float, float]]],
    diameter: float,
    fixed_drag: dict[str, float] | None = None,
) -> dict[str, HydroCoefficients]:
    """Fit C_T per variant from (frequency [Hz], speed [m/s]) data.

    The terminal-speed model is linear in f, v = kappa f with
    kappa = D sqrt(8 C_T / (pi C_d)); the through-origin least-squares slope
    resolves kappa, and the fixed C_d convention resolves C_T. A single data
    point is fitted exactly.
    """
    fixed_drag = dict(FIXED_DRAG_COEFF if fixed_drag is None else fixed_drag)
    out = {}
    for variant, points in points_per_variant.items():
        if not points:
            raise ValueError(f"no calibration points for variant {variant!r}")
        f = np.array([p[0] for p in points], dtype=float)
        v = np.array([p[1] for p in points], dtype=float)
        if np.any(f <= 0) or np.any(v <= 0):
            raise ValueError("calibration data must be positive")
        kappa = float(f @ v) / float(f @ f)
        c_d = fixed_drag[variant]
        c_t = (kappa / diameter) ** 2 * math.pi * c_d / 8.0
        out[variant] = HydroCoefficients(c_thrust=c_t, c_drag=c_d)
    return out


def default_coefficients(diameter: float = 7.8e-3) -> dict[str, HydroCoefficients]:
    """Coefficients calibrated to the default robot's measured top speeds."""
    return calibrate_swim(DEFAULT_CALIBRATION_POINTS, diameter)


# --- air-bubble interface mechanism -----------------------------------------

@dataclass(frozen=True)
class BubbleParams:
    """Growth rule for the trapped frontal air bubble.

    The bubble grows while the hole is above the waterline and the robot is
    spinning; it vents in one step when the robot is held nose-down/up
    (longitudinal axis near vertical) with the field off.
    """

    growth_rate: float  # m^3/s
    v_max: float  # m^3
    release_angle: float = math.radians(15.0)

    @staticmethod
    def for_hull(hull_volume: float) -> "BubbleParams":
        v_max = 0.06 * hull_volume
        return BubbleParams(growth_rate=v_max / 2.0, v_max=v_max)


def bubble_step(
    bubble_volume: float,
    params: BubbleParams,
    hole_z: float,
    water_level: float,
    axis_world: np.ndarray,
    spinning: bool,
    field_on: bool,
    dt: float,
) -> float:
    """Advance the bubble volume one step; returns the new volume."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    vertical = abs(float(axis_world[2])) >= math.cos(params.release_angle)
    if vertical and not field_on:
        return 0.0
    if spinning and hole_z > water_level:
        return min(bubble_volume + params.growth_rate * dt, params.v_max)
    return bubble_volume


def buoyancy_force(fluid: FluidSpec, submerged_volume: float, bubble_volume: float) -> float:
    """Upward buoyancy [N] on the hull plus trapped bubble."""
    return fluid.rho * GRAVITY * (submerged_volume + bubble_volume)


# --- suction capture / release ----------------------------------------------

@dataclass(frozen=True)
class SuctionParams:
    capture_radius: float = 4.0e-3
    capture_spin_hz: float = 10.0
    release_spin_hz: float = 5.0
    release_angle: float = math.radians(30.0)


def suction_capture(
    hole_center: np.ndarray,
    cargo_center: np.ndarray,
    f_spin: float,
    submerged: bool,
    params: SuctionParams = SuctionParams(),
) -> bool:
    """Capture iff submerged, cargo within reach of the hole, and spinning
    at or above the capture frequency."""
    if not submerged:
        return False
    dist = float(np.linalg.norm(np.asarray(cargo_center) - np.asarray(hole_center)))
    return dist < params.capture_radius and abs(f_spin) >= params.capture_spin_hz


def release_check(
    hole_axis_world: np.ndarray,
    f_spin: float,
    params: SuctionParams = SuctionParams(),
) -> bool:
    """Release iff the hole faces the ground (within the release cone of
    straight down) and the spin has dropped below the release frequency."""
    down = float(np.asarray(hole_axis_world) @ np.array([0.0, 0.0, -1.0]))
    return down >= math.cos(params.release_angle) and abs(f_spin) < params.release_spin_hz
