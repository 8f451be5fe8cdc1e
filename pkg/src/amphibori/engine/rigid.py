"""Six-degree-of-freedom rigid-body stepper.

One Engine owns one state sequence (single writer). Forces per step: gravity,
buoyancy, penalty contact with regularized Coulomb friction, reduced-order
hydro (thrust / drag / spin resistance), and magnetic torque; the fold degree
of freedom is sub-stepped through the folding module whenever a dual-plate
assembly is present. The magnetic-alignment behavior (robot following the
rotating field, step-out under excess load) is emergent: nothing is
kinematically prescribed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .. import hydro
from ..errors import SimulationAbort
from ..folding import FoldEnergyModel, FoldState, PumpTracker, step_fold_in_field
from ..geometry import (
    KreslingPattern,
    enclosed_volume,
    fold_configuration,
    hull_points,
    mesh_mass_properties,
    panel_facets,
)
from ..magnetics import (
    DEFAULT_MAGNETIZATION,
    DualPlateAssembly,
    FieldCommand,
    MagneticPlate,
    field_at,
    hexagonal_plate_volume,
)
from ..folding import plate_magnetizations_at
from .kernels import (
    contact_forces,
    integrate_rigid,
    quat_from_axis_angle,
    quat_multiply,
    quat_to_matrix,
    transform_points,
)

GRAVITY = 9.81
HULL_REFRESH_DELTA = 0.05


def _cross3(a, b) -> np.ndarray:
    # np.cross has painful overhead on 3-vectors; this is the hot path
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


@dataclass
class ContactParams:
    k_n: float = 200.0  # N/m
    c_n: float = 0.05  # N s/m
    # tanh-regularized friction needs headroom over tan(30 deg) to hold the
    # incline without creep-slip
    mu: float = 0.8
    v_slip: float = 1e-3  # m/s, friction regularization scale
    delta_ref: float = 5e-6  # m, penetration scale for full normal damping

    def __post_init__(self):
        if self.k_n <= 0 or self.c_n < 0 or self.mu < 0 or self.v_slip <= 0 or self.delta_ref <= 0:
            raise ValueError("invalid contact parameters")


@dataclass
class SimParams:
    dt: float = 1e-4
    sample_rate: float = 100.0  # trace output Hz
    gravity: float = GRAVITY

    def __post_init__(self):
        if not 0 < self.dt <= 1e-3:
            raise ValueError("dt must be in (0, 1e-3] s")


@dataclass
class BodyProperties:
    """Mass, inertia and actuation layout of one robot.

    The interior of the shell is open (floods when submerged), so the robot's
    mass is its material mass: shell film plus magnetic plate(s). Buoyancy
    acts on the displaced material volume; the enclosed cavity volume only
    matters for the pump and the collision hull shape.
    """

    pattern: KreslingPattern
    variant: str  # hydro coefficient key
    mass: float
    inertia_body: np.ndarray
    inv_inertia_body: np.ndarray
    hull_body: np.ndarray  # collision points, COM frame
    hull_volume: float  # enclosed cavity volume at build fold
    displacement_volume: float  # material volume (shell + plates)
    com_z: float  # COM height above the bottom ring at build fold
    density: float
    plates: MagneticPlate | DualPlateAssembly
    fold_model: FoldEnergyModel | None = None

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        eig = np.linalg.eigvalsh(self.inertia_body)
        if np.any(eig <= 0):
            raise ValueError("inertia tensor must be positive definite")

    @property
    def diameter(self) -> float:
        return self.pattern.diameter

    @property
    def handedness(self) -> int:
        return self.pattern.chirality

    @property
    def is_dual(self) -> bool:
        return isinstance(self.plates, DualPlateAssembly)

    def hole_offset_body(self, s: float = 0.0) -> np.ndarray:
        """Front-cap (hole) center in the COM frame at fold fraction s."""
        from ..geometry import fold_height

        return np.array([0.0, 0.0, fold_height(self.pattern, s) - self.com_z])

    def hull_at(self, s: float) -> tuple[np.ndarray, float]:
        """Collision points (COM frame) and enclosed volume at fold s."""
        cfg = fold_configuration(self.pattern, s)
        pts = hull_points(cfg) - np.array([0.0, 0.0, self.com_z])
        return np.ascontiguousarray(pts), enclosed_volume(cfg)


def make_body(
    pattern: KreslingPattern,
    plates: str = "single",
    density: float = hydro.WATER_DENSITY,
    magnetization: float = DEFAULT_MAGNETIZATION,
    plate_thickness: float = 0.8e-3,
    film_thickness: float = 0.05e-3,
    k_valley: float | None = None,
    c_fold: float | None = None,
    eta: float = 1.0,
) -> BodyProperties:
    """Assemble body properties from the pattern at the deployed state.

    ``density`` is the average material density; mass = density x material
    volume. Near 1000 kg/m^3 the flooded robot is neutrally buoyant. The
    plate(s) carry most of the mass, concentrated at their cap(s); the film
    spreads over the surface. The resulting end-heavy distribution matters:
    its COM offset is what breaks symmetry when the robot stalls against an
    obstacle.
    """
    cfg = fold_configuration(pattern, 0.0)
    cavity_volume = enclosed_volume(cfg)

    plate_volume = hexagonal_plate_volume(pattern.radius, plate_thickness)
    n_plates = 2 if plates == "dual" else 1
    facets = panel_facets(cfg)
    surface_area = sum(f.area for f in facets)
    film_volume = surface_area * film_thickness
    material_volume = film_volume + n_plates * plate_volume
    mass = density * material_volume
    film_mass = mass * film_volume / material_volume
    plate_mass = mass * plate_volume / material_volume

    # film: per-facet point masses on the surface
    area_density = film_mass / surface_area
    com_film = sum(f.area * f.centroid for f in facets) / surface_area
    parts = []
    inertia_film = np.zeros((3, 3))
    for f in facets:
        m_f = area_density * f.area
        d = f.centroid - com_film
        inertia_film += m_f * ((d @ d) * np.eye(3) - np.outer(d, d))
    parts.append((film_mass, com_film, inertia_film))

    # plates: thin hexagonal prisms at the cap(s)
    plate_ends = [0.0] if n_plates == 1 else [0.0, cfg.h]
    prism = KreslingPattern(n=pattern.n, radius=pattern.radius, height=plate_thickness,
                            hole_and_cuts=False, rest_twist=0.0, h_min=0.0)
    pcfg = fold_configuration(prism, 0.0)
    for z_end in plate_ends:
        offset = np.array([0.0, 0.0, z_end - (plate_thickness if z_end > 0 else 0.0)])
        m_ref, com_p, inertia_p = mesh_mass_properties(pcfg.vertices + offset, pcfg.triangles, 1.0)
        parts.append((plate_mass, com_p, inertia_p * (plate_mass / m_ref)))

    com = sum(m * c for m, c, _ in parts) / mass
    inertia = np.zeros((3, 3))
    for m, c, i_part in parts:
        d = c - com
        inertia += i_part + m * ((d @ d) * np.eye(3) - np.outer(d, d))

    hull = hull_points(cfg) - com

    plate_volume = hexagonal_plate_volume(pattern.radius, plate_thickness)
    if plates == "single":
        mag = MagneticPlate(plate_volume, magnetization * np.array([1.0, 0.0, 0.0]), "bottom")
        fold_model = None
    elif plates == "dual":
        from ..magnetics import make_dual_assembly

        mag = make_dual_assembly(plate_volume, magnetization, chirality=pattern.chirality)
        kwargs = {}
        if k_valley is not None:
            kwargs["k_valley"] = k_valley
        if c_fold is not None:
            kwargs["c_fold"] = c_fold
        fold_model = FoldEnergyModel(pattern=pattern, eta=eta, **kwargs)
    else:
        raise ValueError("plates must be 'single' or 'dual'")

    return BodyProperties(
        pattern=pattern,
        variant="hole_cuts" if pattern.hole_and_cuts else "plain",
        mass=mass,
        inertia_body=inertia,
        inv_inertia_body=np.linalg.inv(inertia),
        hull_body=np.ascontiguousarray(hull),
        hull_volume=cavity_volume,
        displacement_volume=material_volume,
        com_z=float(com[2]),
        density=density,
        plates=mag,
        fold_model=fold_model,
    )


@dataclass
class SimState:
    """Full robot state; the quaternion is kept unit-norm by the stepper."""

    t: float = 0.0
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    quat: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    vel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    fold: FoldState = field(default_factory=FoldState)
    bubble_volume: float = 0.0
    cargo_attached: bool = False
    contact: bool = False
    submerged_fraction: float = 0.0

    def copy(self) -> "SimState":
        return SimState(
            t=self.t,
            position=self.position.copy(),
            quat=self.quat.copy(),
            vel=self.vel.copy(),
            omega=self.omega.copy(),
            fold=self.fold.copy(),
            bubble_volume=self.bubble_volume,
            cargo_attached=self.cargo_attached,
            contact=self.contact,
            submerged_fraction=self.submerged_fraction,
        )

    def axis_world(self) -> np.ndarray:
        """Longitudinal (body z) axis in world coordinates."""
        return quat_to_matrix(self.quat)[:, 2]

    def row(self) -> np.ndarray:
        out = np.empty(13)
        out[0:3] = self.position
        out[3:7] = self.quat
        out[7:10] = self.vel
        out[10:13] = self.omega
        return out


def rolling_pose(yaw: float = 0.0) -> np.ndarray:
    """Quaternion putting the longitudinal axis horizontal (along world y),
    then yawed about world z; the natural ground-rolling attitude."""
    lie = quat_from_axis_angle(np.array([1.0, 0.0, 0.0]), -math.pi / 2.0)
    spin = quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), yaw)
    return quat_multiply(spin, lie)


@dataclass
class Cargo:
    position: np.ndarray
    diameter: float
    density: float = 1200.0
    attached: bool = False


class Engine:
    """Steps one robot through a world. Single writer of its SimState."""

    def __init__(
        self,
        body: BodyProperties,
        terrain_prims: np.ndarray,
        fluids: list[hydro.FluidSpec] | None = None,
        cargo: list[Cargo] | None = None,
        contact: ContactParams | None = None,
        sim: SimParams | None = None,
        coeffs: dict[str, hydro.HydroCoefficients] | None = None,
        suction: hydro.SuctionParams | None = None,
        state: SimState | None = None,
    ):
        self.body = body
        self.prims = np.ascontiguousarray(terrain_prims, dtype=float)
        self.fluids = list(fluids or [])
        self.cargo = list(cargo or [])
        self.contact_params = contact or ContactParams()
        self.sim = sim or SimParams()
        all_coeffs = coeffs or hydro.default_coefficients(body.diameter)
        self.coeffs = all_coeffs[body.variant]
        self.suction = suction or hydro.SuctionParams()
        self.bubble_params = hydro.BubbleParams.for_hull(body.hull_volume)
        self.state = state or SimState()
        self._hull_pts = body.hull_body
        self._hull_volume = body.hull_volume
        self._hull_s = 0.0
        self._pump_tracker = PumpTracker(body.fold_model) if body.fold_model else None
        self.doses: list[tuple[float, float]] = []  # (t, volume)
        self._b_world = np.zeros(3)

    # -- placement helpers ----------------------------------------------------

    def settle_on_ground(self, x: float = 0.0, y: float = 0.0, yaw: float = 0.0,
                         clearance: float = 1e-5) -> None:
        """Place the robot in the rolling attitude resting on the terrain."""
        from .terrain import surface_height

        q = rolling_pose(yaw)
        pts = transform_points(q, np.zeros(3), self._hull_pts)
        z_floor = surface_height(self.prims, x, y)
        if not np.isfinite(z_floor):
            z_floor = 0.0
        self.state.position = np.array([x, y, z_floor - pts[:, 2].min() + clearance])
        self.state.quat = q
        self.state.vel = np.zeros(3)
        self.state.omega = np.zeros(3)

    # -- stepping --------------------------------------------------------------

    def active_fluid(self) -> hydro.FluidSpec | None:
        x = float(self.state.position[0])
        for f in self.fluids:
            if f.contains_x(x):
                return f
        return None

    def _magnetizations_body(self) -> list[tuple[float, np.ndarray]]:
        """(volume, body-frame M) for each plate at the current fold."""
        plates = self.body.plates
        if isinstance(plates, DualPlateAssembly):
            m1, m2 = plate_magnetizations_at(plates, self.body.pattern, self.state.fold.s)
            return [(plates.plate1.volume, m1), (plates.plate2.volume, m2)]
        return [(plates.volume, plates.magnetization)]

    def magnetization_world(self) -> np.ndarray:
        rot = quat_to_matrix(self.state.quat)
        total = np.zeros(3)
        for _, m in self._magnetizations_body():
            total += rot @ m
        return total

    def step(self, command: FieldCommand, t_in_segment: float) -> SimState:
        """Advance one dt under the given field command."""
        st = self.state
        dt = self.sim.dt
        b = field_at(command, t_in_segment)
        self._b_world = b
        rot = quat_to_matrix(st.quat)

        force = np.array([0.0, 0.0, -self.body.mass * self.sim.gravity])
        torque = np.zeros(3)

        # magnetic torque from every plate
        if b[0] != 0.0 or b[1] != 0.0 or b[2] != 0.0:
            for volume, m_body in self._magnetizations_body():
                torque += volume * _cross3(rot @ m_body, b)

        # hull in world coordinates
        pts_world = transform_points(st.quat, st.position, self._hull_pts)

        # fluid forces
        fluid = self.active_fluid()
        frac = 0.0
        axis = rot[:, 2]
        f_spin = float(st.omega @ axis) / (2.0 * math.pi)
        if fluid is not None:
            z_min = float(pts_world[:, 2].min())
            z_max = float(pts_world[:, 2].max())
            if z_max > z_min:
                frac = min(max((fluid.level - z_min) / (z_max - z_min), 0.0), 1.0)
            if frac > 0.0:
                c = self.coeffs
                if fluid.mu > hydro.WATER_VISCOSITY * 1.5:
                    c = c.scaled_for_viscosity(fluid.mu)
                submerged_v = self.body.displacement_volume * frac
                force[2] += hydro.buoyancy_force(fluid, submerged_v, 0.0)
                # bubble buoyancy acts at the hole end
                if st.bubble_volume > 0.0:
                    f_bub = hydro.buoyancy_force(fluid, 0.0, st.bubble_volume)
                    hole_r = rot @ self.body.hole_offset_body(st.fold.s)
                    force[2] += f_bub
                    torque += _cross3(hole_r, np.array([0.0, 0.0, f_bub]))
                force += frac * hydro.drag(c, fluid, st.vel, self.body.diameter)
                force += frac * hydro.thrust(
                    c, fluid, f_spin, self.body.diameter, self.body.handedness
                ) * axis
                torque += frac * hydro.spin_resistance(
                    c, fluid, f_spin, self.body.diameter
                ) * axis
                # broadside tumbling drag (plumbing; far draggier than spinning)
                omega_perp = st.omega - (st.omega @ axis) * axis
                w_perp = float(np.linalg.norm(omega_perp))
                if w_perp > 1e-12:
                    f_perp = w_perp / (2.0 * math.pi)
                    tau_perp = (
                        hydro.DEFAULT_TRANSVERSE_SPIN_FACTOR
                        * self.coeffs.c_spin
                        * fluid.rho
                        * f_perp
                        * f_perp
                        * self.body.diameter**5
                    )
                    torque -= frac * tau_perp * (omega_perp / w_perp)

        # contact
        cp = self.contact_params
        f_c, t_c, n_contacts = contact_forces(
            pts_world, st.vel, st.omega, st.position, self.prims,
            cp.k_n, cp.c_n, cp.mu, cp.v_slip, cp.delta_ref,
        )
        force += f_c
        torque += t_c

        # integrate rigid motion
        new_row = integrate_rigid(
            st.row(), force, torque, self.body.mass,
            self.body.inertia_body, self.body.inv_inertia_body, dt,
        )
        if not np.all(np.isfinite(new_row)):
            term = "state"
            for name, val in (("contact", f_c), ("field", b), ("force", force), ("torque", torque)):
                if not np.all(np.isfinite(val)):
                    term = name
                    break
            raise SimulationAbort(
                f"non-finite state at t={st.t:.6f}s (offending term: {term})", term=term
            )
        st.position = new_row[0:3]
        st.quat = new_row[3:7]
        st.vel = new_row[7:10]
        st.omega = new_row[10:13]
        st.contact = n_contacts > 0
        st.submerged_fraction = frac

        # fold sub-step (dual-plate only)
        if self.body.fold_model is not None:
            b_body = rot.T @ b
            st.fold = step_fold_in_field(
                st.fold, self.body.fold_model, self.body.plates, b_body, dt
            )
            if abs(st.fold.s - self._hull_s) > HULL_REFRESH_DELTA:
                self._hull_pts, self._hull_volume = self.body.hull_at(st.fold.s)
                self._hull_s = st.fold.s
            if self._pump_tracker is not None:
                dose = self._pump_tracker.update(st.fold)
                if dose is not None and dose > 0.0:
                    self.doses.append((st.t, dose))

        # bubble mechanism
        if fluid is not None:
            hole_world = st.position + rot @ self.body.hole_offset_body(st.fold.s)
            st.bubble_volume = hydro.bubble_step(
                st.bubble_volume, self.bubble_params,
                float(hole_world[2]), fluid.level, axis,
                spinning=abs(f_spin) > 1.0,
                field_on=bool(np.any(b != 0.0)),
                dt=dt,
            )

        # cargo capture / transport / release
        if self.cargo:
            hole_world = st.position + rot @ self.body.hole_offset_body(st.fold.s)
            if st.cargo_attached:
                for c in self.cargo:
                    if c.attached:
                        c.position = hole_world.copy()
                        if hydro.release_check(axis, f_spin, self.suction):
                            c.attached = False
                            st.cargo_attached = False
                            self._drop_cargo(c)
            else:
                submerged = frac > 0.9
                for c in self.cargo:
                    if not c.attached and hydro.suction_capture(
                        hole_world, c.position, f_spin, submerged, self.suction
                    ):
                        c.attached = True
                        st.cargo_attached = True
                        break

        st.t += dt
        return st

    def _drop_cargo(self, c: Cargo) -> None:
        from .terrain import surface_height

        z = surface_height(self.prims, float(c.position[0]), float(c.position[1]))
        if np.isfinite(z):
            c.position = np.array([c.position[0], c.position[1], z + c.diameter / 2.0])

    def run_segment(self, command: FieldCommand, duration: float,
                    on_sample=None, stop=None) -> None:
        """Step through one field segment, emitting samples at the trace rate.

        ``on_sample(state)`` runs at the sample cadence; ``stop(state)`` may
        end the segment early.
        """
        dt = self.sim.dt
        steps = int(round(duration / dt))
        sample_every = max(1, int(round(1.0 / (self.sim.sample_rate * dt))))
        for k in range(steps):
            self.step(command, k * dt)
            if (k + 1) % sample_every == 0:
                if on_sample is not None:
                    on_sample(self.state)
                if stop is not None and stop(self.state):
                    return
