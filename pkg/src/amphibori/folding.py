"""Axial fold degree of freedom: strain energy, overdamped fold dynamics
under the dual-plate torque pair, and the pumping/dose model.

The cell is monostable: valley bars are at their rest length only at s = 0,
so the strain energy rises monotonically along the fold path and the cell
recovers on its own once the field is removed. The fold coordinate evolves
overdamped (first order): c_eff * ds/dt = Q_mag(s) - dE/ds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import (
    KreslingPattern,
    enclosed_volume,
    fold_configuration,
    fold_height,
    fold_twist,
    fold_twist_rate,
)

# axial rigidity per valley bar; with the relative-strain energy form below
# this is in Newtons (EA-like), not N/m
DEFAULT_K_VALLEY = 0.02
# damping referred to the height coordinate; c_eff = c_fold * (H0 - h_min)^2.
# Together these give fold/recovery time constants around 0.25 s at 200 mT.
DEFAULT_C_FOLD = 0.5
# fold fraction that must be exceeded once before the reservoir opens
PUNCTURE_THRESHOLD = 0.8


@dataclass
class FoldState:
    """Fold coordinate plus the pump bookkeeping.

    ``reservoir + dose_delivered`` equals the initial reservoir exactly; the
    reservoir only becomes available (``punctured``) after the first fold
    cycle that exceeds the puncture threshold.
    """

    s: float = 0.0
    s_dot: float = 0.0
    reservoir: float = 0.0
    dose_delivered: float = 0.0
    initial_reservoir: float = 0.0
    punctured: bool = False

    def __post_init__(self):
        if not 0.0 <= self.s <= 1.0:
            raise ValueError("fold fraction must be in [0, 1]")
        if self.reservoir < 0 or self.dose_delivered < 0:
            raise ValueError("reservoir and dose_delivered must be >= 0")
        if self.initial_reservoir == 0.0:
            self.initial_reservoir = self.reservoir + self.dose_delivered

    def copy(self) -> "FoldState":
        return replace(self)

    def deliver(self, dose: float) -> float:
        """Move up to ``dose`` from reservoir to delivered; returns the actual
        amount. Conservation is exact: reservoir is recomputed from the total."""
        actual = min(self.reservoir, max(dose, 0.0))
        self.dose_delivered += actual
        self.reservoir = self.initial_reservoir - self.dose_delivered
        return actual


@dataclass(frozen=True)
class FoldEnergyModel:
    """Valley-bar truss energy E(s) = sum_bars (k/2) (l - l0)^2 / l0.

    Mountain bars are isometric by construction and store nothing. The model
    is validated monostable at construction: E strictly increasing on (0, 1].
    """

    pattern: KreslingPattern
    k_valley: float = DEFAULT_K_VALLEY
    rest_length: float = field(default=-1.0)
    c_fold: float = DEFAULT_C_FOLD
    eta: float = 1.0

    def __post_init__(self):
        if self.k_valley <= 0 or self.c_fold <= 0:
            raise ValueError("stiffness and damping must be positive")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("expulsion efficiency must be in (0, 1]")
        if self.rest_length < 0:
            l0 = float(fold_configuration(self.pattern, 0.0).valley_bar_lengths()[0])
            object.__setattr__(self, "rest_length", l0)
        grid = np.linspace(0.0, 1.0, 201)
        energies = [fold_energy(self, float(s)) for s in grid]
        if not all(b > a for a, b in zip(energies, energies[1:])):
            raise ValueError(
                "energy model is not monostable: E(s) must be strictly "
                "increasing on (0, 1] (check h_min / rest_twist)"
            )

    @property
    def c_eff(self) -> float:
        """Generalized damping in the s coordinate [J s]."""
        stroke = self.pattern.height - self.pattern.h_min
        return self.c_fold * stroke * stroke


def _valley_length(pattern: KreslingPattern, s: float) -> float:
    # l^2 = Lm^2 - 4 R^2 sin(gamma/2) sin(psi - gamma/2), gamma = 2 pi / n
    h = fold_height(pattern, s)
    psi = abs(fold_twist(pattern, s))
    gamma = 2.0 * math.pi / pattern.n
    lm2 = pattern.mountain_bar_length**2
    l2 = lm2 - 4.0 * pattern.radius**2 * math.sin(gamma / 2.0) * math.sin(psi - gamma / 2.0)
    return math.sqrt(max(l2, 0.0))


def fold_energy(model: FoldEnergyModel, s: float) -> float:
    """Strain energy [J] at fold fraction s; zero at the deployed state."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("fold fraction must be in [0, 1]")
    length = _valley_length(model.pattern, s)
    strain = length - model.rest_length
    return model.pattern.n * 0.5 * model.k_valley * strain * strain / model.rest_length


def fold_energy_gradient(model: FoldEnergyModel, s: float, eps: float = 1e-7) -> float:
    """dE/ds by central difference (the energy is smooth in s)."""
    lo, hi = max(0.0, s - eps), min(1.0, s + eps)
    return (fold_energy(model, hi) - fold_energy(model, lo)) / (hi - lo)


def plate_magnetizations_at(assembly, pattern: KreslingPattern, s: float):
    """Body-frame M1/M2 at fold fraction s.

    The mean body orientation is the reference: the bottom ring (plate 1)
    rotates by -dphi/2 and the top ring (plate 2) by +dphi/2 relative to the
    deployed state, where dphi = phi(s) - phi(0).
    """
    dphi = fold_twist(pattern, s) - fold_twist(pattern, 0.0)
    half = dphi / 2.0

    def rot_z(v, ang):
        c, sn = math.cos(ang), math.sin(ang)
        return np.array([c * v[0] - sn * v[1], sn * v[0] + c * v[1], v[2]])

    m1 = rot_z(assembly.plate1.magnetization, -half)
    m2 = rot_z(assembly.plate2.magnetization, +half)
    return m1, m2


def fold_generalized_force(
    assembly, pattern: KreslingPattern, s: float, b_body: np.ndarray
) -> float:
    """Magnetic generalized force on s from the plate torque pair.

    Q = (T2z - T1z)/2 * dphi/ds in the mean-orientation body frame, with the
    plate magnetizations rotated to their fold-dependent directions.
    """
    m1, m2 = plate_magnetizations_at(assembly, pattern, s)
    t1z = assembly.plate1.volume * float(np.cross(m1, b_body)[2])
    t2z = assembly.plate2.volume * float(np.cross(m2, b_body)[2])
    return 0.5 * (t2z - t1z) * fold_twist_rate(pattern, s)


def step_fold(
    state: FoldState,
    model: FoldEnergyModel,
    torque_pair: tuple[np.ndarray, np.ndarray],
    dt: float,
) -> FoldState:
    """One overdamped fold step under a body-frame torque pair (T1, T2)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    t1, t2 = torque_pair
    q_mag = 0.5 * (float(t2[2]) - float(t1[2])) * fold_twist_rate(model.pattern, state.s)
    return _advance(state, model, q_mag, dt)


def step_fold_in_field(
    state: FoldState,
    model: FoldEnergyModel,
    assembly,
    b_body: np.ndarray,
    dt: float,
) -> FoldState:
    """Fold step with the generalized force evaluated at the current s."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    q_mag = fold_generalized_force(assembly, model.pattern, state.s, b_body)
    return _advance(state, model, q_mag, dt)


def _advance(state: FoldState, model: FoldEnergyModel, q_mag: float, dt: float) -> FoldState:
    s_dot = (q_mag - fold_energy_gradient(model, state.s)) / model.c_eff
    s_new = state.s + dt * s_dot
    if s_new < 0.0:
        s_new, s_dot = 0.0, 0.0
    elif s_new > 1.0:
        s_new, s_dot = 1.0, 0.0
    out = state.copy()
    out.s = s_new
    out.s_dot = s_dot
    if s_new > PUNCTURE_THRESHOLD:
        out.punctured = True
    return out


def cycle_dose(model: FoldEnergyModel, s_peak: float = 1.0) -> float:
    """Expelled volume of one full fold/unfold cycle reaching ``s_peak``."""
    v0 = enclosed_volume(fold_configuration(model.pattern, 0.0))
    v1 = enclosed_volume(fold_configuration(model.pattern, s_peak))
    return model.eta * (v0 - v1)


def pump_cycle(state: FoldState, model: FoldEnergyModel, n_cycles: int) -> FoldState:
    """Quasi-static pump: n full fold/unfold cycles, each expelling
    min(reservoir, eta * (V(0) - V(1))) once the container is punctured."""
    if n_cycles < 0:
        raise ValueError("n_cycles must be >= 0")
    out = state.copy()
    if n_cycles == 0:
        return out
    per_cycle = cycle_dose(model)
    for _ in range(n_cycles):
        out.punctured = True  # a full cycle passes the puncture threshold
        out.deliver(per_cycle)
    out.s = 0.0
    out.s_dot = 0.0
    return out


class PumpTracker:
    """Detects completed fold cycles in a dynamic simulation and doses them.

    A cycle completes when s has exceeded ``s_high`` and then returns below
    ``s_low``; the dose uses the peak s actually reached.
    """

    def __init__(self, model: FoldEnergyModel, s_high: float = PUNCTURE_THRESHOLD, s_low: float = 0.1):
        self.model = model
        self.s_high = s_high
        self.s_low = s_low
        self._armed = False
        self._peak = 0.0

    def update(self, state: FoldState) -> float | None:
        """Feed the current fold state; returns the dose when a cycle completes."""
        if state.s > self._peak:
            self._peak = state.s
        if not self._armed and state.s >= self.s_high:
            self._armed = True
        if self._armed and state.s <= self.s_low:
            dose = state.deliver(cycle_dose(self.model, self._peak)) if state.punctured else 0.0
            self._armed = False
            self._peak = state.s
            return dose
        return None
