"""Kresling origami geometry.

A Kresling cell is a triangulated hollow cylinder: two regular n-gon rings
connected by 2n triangular panels. Folding is modeled as a one-degree-of-
freedom path parameterized by the fold fraction s in [0, 1]: the height
interpolates linearly from the deployed height down to h_min while the twist
angle phi(s) is solved so that the mountain-bar lengths |Q_i - P_i| stay
exactly constant. Valley bars (P_{i+1} - Q_i) strain; their strain drives the
folding energy model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, MeshError

# Fraction of the deployed height that remains when fully folded. Kept above
# the bistability threshold so the valley-bar energy stays strictly increasing
# over the whole fold range (psi(1) - pi/n must stay below pi/2).
DEFAULT_HMIN_RATIO = 0.35

DEFAULT_HOLE_DIAMETER = 3.0e-3
DEFAULT_CUT_COUNT = 6


@dataclass(frozen=True)
class KreslingPattern:
    """Parametric description of one Kresling cell.

    Lengths are meters. ``chirality`` is +1 for a right-handed (propeller-
    forward) twist, -1 for its mirror image. ``rest_twist`` is the deployed
    twist magnitude; the default pi/n makes valley and mountain bars equal at
    s = 0, i.e. the flat pattern is a strip of congruent adjacent triangles.
    """

    n: int
    radius: float
    height: float
    chirality: int = 1
    hole_and_cuts: bool = True
    hole_diameter: float = DEFAULT_HOLE_DIAMETER
    cut_count: int = DEFAULT_CUT_COUNT
    h_min: float = field(default=-1.0)
    rest_twist: float = field(default=-1.0)

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"polygon side count must be >= 3, got {self.n}")
        if self.radius <= 0 or self.height <= 0:
            raise ValueError("radius and height must be positive")
        if self.chirality not in (+1, -1):
            raise ValueError("chirality must be +1 or -1")
        if self.hole_and_cuts:
            if self.hole_diameter <= 0:
                raise ValueError("hole_diameter must be positive for the hole-and-cuts variant")
            if self.cut_count < 1:
                raise ValueError("cut_count must be >= 1")
        if self.h_min < 0:
            object.__setattr__(self, "h_min", DEFAULT_HMIN_RATIO * self.height)
        if not 0 <= self.h_min < self.height:
            raise ValueError("h_min must lie in [0, height)")
        if self.rest_twist < 0:
            object.__setattr__(self, "rest_twist", math.pi / self.n)

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    @property
    def aspect_ratio(self) -> float:
        """Height over diameter; the default robot sits near 0.87 ("close to 1")."""
        return self.height / self.diameter

    @property
    def mountain_bar_length(self) -> float:
        """Bar |Q_i - P_i| at s = 0, preserved exactly along the fold path."""
        return math.sqrt(
            self.height**2 + (2.0 * self.radius * math.sin(self.rest_twist / 2.0)) ** 2
        )

    def side_length(self) -> float:
        """Edge length of the n-gon rings."""
        return 2.0 * self.radius * math.sin(math.pi / self.n)


def build_pattern(
    n: int,
    diameter: float,
    height: float,
    chirality: int = 1,
    hole_and_cuts: bool = True,
    hole_diameter: float = DEFAULT_HOLE_DIAMETER,
    cut_count: int = DEFAULT_CUT_COUNT,
    h_min: float | None = None,
    rest_twist: float | None = None,
) -> KreslingPattern:
    """Build a pattern from outer dimensions (circumscribed diameter)."""
    if n < 3:
        raise ValueError(f"polygon side count must be >= 3, got {n}")
    if diameter <= 0 or height <= 0:
        raise ValueError("diameter and height must be positive")
    return KreslingPattern(
        n=n,
        radius=diameter / 2.0,
        height=height,
        chirality=chirality,
        hole_and_cuts=hole_and_cuts,
        hole_diameter=hole_diameter,
        cut_count=cut_count,
        h_min=-1.0 if h_min is None else h_min,
        rest_twist=-1.0 if rest_twist is None else rest_twist,
    )


def default_robot_pattern(hole_and_cuts: bool = True) -> KreslingPattern:
    """The reference robot: n=6, 7.8 mm across, 6.8 mm deployed, 3 mm hole."""
    return build_pattern(6, 7.8e-3, 6.8e-3, hole_and_cuts=hole_and_cuts)


@dataclass(frozen=True)
class FoldConfiguration:
    """One folded state: vertex rings plus the closed triangulated surface.

    ``vertices`` stacks the bottom ring (n), top ring (n), bottom cap center
    and top cap center; ``triangles`` indexes into it with outward-oriented
    winding (2n lateral panels followed by 2n cap fan triangles).
    """

    pattern: KreslingPattern
    s: float
    h: float
    phi: float
    vertices: np.ndarray  # (2n + 2, 3)
    triangles: np.ndarray  # (4n, 3) int

    @property
    def bottom_ring(self) -> np.ndarray:
        return self.vertices[: self.pattern.n]

    @property
    def top_ring(self) -> np.ndarray:
        return self.vertices[self.pattern.n : 2 * self.pattern.n]

    @property
    def lateral_triangles(self) -> np.ndarray:
        return self.triangles[: 2 * self.pattern.n]

    def mountain_bar_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.top_ring - self.bottom_ring, axis=1)

    def valley_bar_lengths(self) -> np.ndarray:
        # the valley family is the diagonal that shortens along the fold path;
        # it swaps with chirality (the triangulation mirrors accordingly)
        if self.pattern.chirality > 0:
            return np.linalg.norm(self.top_ring - np.roll(self.bottom_ring, -1, axis=0), axis=1)
        return np.linalg.norm(np.roll(self.top_ring, -1, axis=0) - self.bottom_ring, axis=1)


def fold_height(pattern: KreslingPattern, s: float) -> float:
    return pattern.height * (1.0 - s) + pattern.h_min * s


def fold_twist(pattern: KreslingPattern, s: float) -> float:
    """Signed twist phi(s) enforcing mountain-bar isometry."""
    h = fold_height(pattern, s)
    lm2 = pattern.mountain_bar_length**2
    chord2 = lm2 - h * h
    denom = 2.0 * pattern.radius
    u2 = chord2 / (denom * denom)
    if u2 > 1.0 + 1e-12:
        raise GeometryError(
            f"mountain-bar length {pattern.mountain_bar_length:.6g} m cannot be "
            f"preserved at s={s:.4g}: required chord {math.sqrt(chord2):.6g} m "
            f"exceeds the ring diameter {denom:.6g} m"
        )
    u = math.sqrt(min(max(u2, 0.0), 1.0))
    return pattern.chirality * 2.0 * math.asin(u)


def fold_twist_rate(pattern: KreslingPattern, s: float, eps: float = 1e-7) -> float:
    """d(phi)/ds by central difference (one-sided at the endpoints)."""
    lo, hi = max(0.0, s - eps), min(1.0, s + eps)
    return (fold_twist(pattern, hi) - fold_twist(pattern, lo)) / (hi - lo)


def fold_configuration(pattern: KreslingPattern, s: float) -> FoldConfiguration:
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"fold fraction must be in [0, 1], got {s}")
    n = pattern.n
    h = fold_height(pattern, s)
    phi = fold_twist(pattern, s)

    theta = 2.0 * np.pi * np.arange(n) / n
    bottom = np.column_stack(
        [pattern.radius * np.cos(theta), pattern.radius * np.sin(theta), np.zeros(n)]
    )
    top = np.column_stack(
        [
            pattern.radius * np.cos(theta + phi),
            pattern.radius * np.sin(theta + phi),
            np.full(n, h),
        ]
    )
    centers = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, h]])
    vertices = np.vstack([bottom, top, centers])

    nxt = (np.arange(n) + 1) % n
    idx = np.arange(n)
    if pattern.chirality > 0:
        # valley diagonal P_{i+1}-Q_i splits each sector
        lateral_a = np.column_stack([idx, nxt, n + idx])
        lateral_b = np.column_stack([nxt, n + nxt, n + idx])
    else:
        # mirrored triangulation: valley diagonal P_i-Q_{i+1}
        lateral_a = np.column_stack([idx, nxt, n + nxt])
        lateral_b = np.column_stack([idx, n + nxt, n + idx])
    cap_bottom = np.column_stack([np.full(n, 2 * n), nxt, idx])
    cap_top = np.column_stack([np.full(n, 2 * n + 1), n + idx, n + nxt])
    triangles = np.vstack([lateral_a, lateral_b, cap_bottom, cap_top]).astype(np.intp)

    return FoldConfiguration(pattern=pattern, s=s, h=h, phi=phi, vertices=vertices, triangles=triangles)


def _triangle_cross(config: FoldConfiguration) -> tuple[np.ndarray, np.ndarray]:
    v = config.vertices
    t = config.triangles
    e1 = v[t[:, 1]] - v[t[:, 0]]
    e2 = v[t[:, 2]] - v[t[:, 0]]
    return v[t[:, 0]], np.cross(e1, e2)


def check_closed(config: FoldConfiguration, tol: float = 1e-9) -> None:
    """Closed-surface identity: sum of area-weighted normals vanishes."""
    _, cross = _triangle_cross(config)
    total_area = 0.5 * np.linalg.norm(cross, axis=1).sum()
    residual = np.linalg.norm(0.5 * cross.sum(axis=0))
    if total_area > 0 and residual > tol * total_area:
        raise MeshError(
            f"surface is not closed/consistently oriented: |sum(area*normal)| = "
            f"{residual:.3e} vs total area {total_area:.3e}"
        )


def enclosed_volume(config: FoldConfiguration) -> float:
    """Signed volume by the divergence theorem over all facets, caps included."""
    check_closed(config)
    v = config.vertices
    t = config.triangles
    v0, v1, v2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    vol = np.einsum("ij,ij->i", v0, np.cross(v1, v2)).sum() / 6.0
    if vol < -1e-15:
        raise MeshError(f"mesh orientation is inward (volume {vol:.3e} m^3)")
    return float(vol)


@dataclass(frozen=True)
class Facet:
    centroid: np.ndarray
    normal: np.ndarray  # unit, outward; zero vector for degenerate facets
    area: float


def panel_facets(config: FoldConfiguration) -> list[Facet]:
    """Per-triangle (centroid, outward unit normal, area) for the closed surface."""
    v = config.vertices
    t = config.triangles
    centroids = (v[t[:, 0]] + v[t[:, 1]] + v[t[:, 2]]) / 3.0
    _, cross = _triangle_cross(config)
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    facets = []
    for c, x, a in zip(centroids, cross, areas):
        nrm = x / (2.0 * a) if a > 1e-30 else np.zeros(3)
        facets.append(Facet(centroid=c, normal=nrm, area=float(a)))
    return facets


def chirality_signature(config: FoldConfiguration) -> float:
    """Area-weighted correlation of longitudinal and tangential normal components.

    Positive for the right-handed (+1) twist; flips sign under mirroring. This
    is the propeller-handedness signature of the tilted lateral panels.
    """
    sig = 0.0
    for f in panel_facets(config)[: 2 * config.pattern.n]:
        r = np.array([f.centroid[0], f.centroid[1], 0.0])
        rn = np.linalg.norm(r)
        if rn < 1e-30:
            continue
        tangent = np.array([-r[1] / rn, r[0] / rn, 0.0])
        sig += f.area * f.normal[2] * float(f.normal @ tangent)
    return sig


def hull_points(config: FoldConfiguration) -> np.ndarray:
    """Collision proxy vertices: the 2n ring vertices plus both cap centers."""
    return config.vertices.copy()


def mesh_mass_properties(
    vertices: np.ndarray, triangles: np.ndarray, density: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mass, center of mass and inertia tensor (about the COM) of a closed
    uniform-density mesh, by signed-tetrahedron accumulation against the origin.
    """
    v0 = vertices[triangles[:, 0]]
    v1 = vertices[triangles[:, 1]]
    v2 = vertices[triangles[:, 2]]
    det = np.einsum("ij,ij->i", v0, np.cross(v1, v2))
    volume = det.sum() / 6.0
    if volume <= 0:
        raise MeshError("mass properties need an outward-oriented closed mesh")
    com = (det[:, None] * (v0 + v1 + v2)).sum(axis=0) / (24.0 * volume)
    # covariance of each signed tetrahedron against the origin
    c_sum = np.zeros((3, 3))
    verts = (v0, v1, v2)
    for a in range(3):
        for b in range(3):
            acc = np.zeros(len(det))
            for i in range(3):
                for j in range(3):
                    w = 2.0 if i == j else 1.0
                    acc += w * verts[i][:, a] * verts[j][:, b]
            c_sum[a, b] = (det * acc).sum() / 120.0
    mass = density * volume
    covariance = density * c_sum
    # shift to center of mass
    covariance -= mass * np.outer(com, com)
    inertia = np.trace(covariance) * np.eye(3) - covariance
    inertia = 0.5 * (inertia + inertia.T)
    return float(mass), com, inertia


def export_stl(config: FoldConfiguration, path) -> None:
    """ASCII STL of the folded surface for inspection."""
    facets = panel_facets(config)
    v = config.vertices
    t = config.triangles
    lines = ["solid kresling"]
    for k, f in enumerate(facets):
        nx, ny, nz = f.normal
        lines.append(f"  facet normal {nx:.9g} {ny:.9g} {nz:.9g}")
        lines.append("    outer loop")
        for idx in t[k]:
            x, y, z = v[idx]
            lines.append(f"      vertex {x:.9g} {y:.9g} {z:.9g}")
        lines.append("    endloop")
        lines.append("  endfacet")
    lines.append("endsolid kresling")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def flat_pattern_layout(pattern: KreslingPattern) -> dict:
    """Flat crease layout of the lateral strip.

    Bottom points B_i = (i*a, 0); top points T_i = (i*a + p, q) chosen so the
    flat edge lengths reproduce the 3D bar lengths at s = 0: |T_i - B_i| is a
    mountain bar and |T_i - B_{i+1}| a valley bar.
    """
    cfg = fold_configuration(pattern, 0.0)
    a = pattern.side_length()
    lm = float(cfg.mountain_bar_lengths()[0])
    lv = float(cfg.valley_bar_lengths()[0])
    p = (a * a + lm * lm - lv * lv) / (2.0 * a)
    q2 = lm * lm - p * p
    if q2 <= 0:
        raise GeometryError("flat pattern is degenerate: bar lengths violate the triangle inequality")
    q = math.sqrt(q2)
    n = pattern.n
    bottom = [(i * a, 0.0) for i in range(n + 1)]
    top = [(i * a + p, q) for i in range(n + 1)]
    mountains = [(bottom[i], top[i]) for i in range(n + 1)]
    valleys = [(bottom[i + 1], top[i]) for i in range(n)]
    return {
        "bottom": bottom,
        "top": top,
        "mountains": mountains,
        "valleys": valleys,
        "side": a,
        "mountain_len": lm,
        "valley_len": lv,
    }


def export_flat_pattern(pattern: KreslingPattern, path) -> None:
    """SVG 1.1 crease pattern: mountains solid, valleys dashed, hole/cut marks."""
    lay = flat_pattern_layout(pattern)
    mm = 1e3
    pad = 4.0
    strip_w = max(p[0] for p in lay["top"] + lay["bottom"]) * mm
    strip_h = lay["top"][0][1] * mm
    hexa_r = pattern.radius * mm
    width = max(strip_w, 4 * hexa_r + 8) + 2 * pad
    height = strip_h + 2 * hexa_r + 3 * pad + 4

    def pt(p, dy=0.0):
        return f"{p[0] * mm + pad:.4f},{strip_h - p[1] * mm + pad + dy:.4f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width:.2f}mm" height="{height:.2f}mm" '
        f'viewBox="0 0 {width:.2f} {height:.2f}">',
        "<!-- Kresling crease pattern; units mm; mountains solid, valleys dashed -->",
        '<g fill="none" stroke="black" stroke-width="0.2">',
    ]
    parts.append(f'<polyline class="outline" points="{" ".join(pt(p) for p in lay["bottom"])}"/>')
    parts.append(f'<polyline class="outline" points="{" ".join(pt(p) for p in lay["top"])}"/>')
    parts.append(f'<line class="outline" x1="{pt(lay["bottom"][0]).split(",")[0]}" y1="{pt(lay["bottom"][0]).split(",")[1]}" x2="{pt(lay["top"][0]).split(",")[0]}" y2="{pt(lay["top"][0]).split(",")[1]}"/>')
    parts.append(f'<line class="outline" x1="{pt(lay["bottom"][-1]).split(",")[0]}" y1="{pt(lay["bottom"][-1]).split(",")[1]}" x2="{pt(lay["top"][-1]).split(",")[0]}" y2="{pt(lay["top"][-1]).split(",")[1]}"/>')
    for b, t in lay["mountains"][1:-1]:
        b_, t_ = pt(b).split(","), pt(t).split(",")
        parts.append(
            f'<line class="mountain" x1="{b_[0]}" y1="{b_[1]}" x2="{t_[0]}" y2="{t_[1]}"/>'
        )
    for b, t in lay["valleys"]:
        b_, t_ = pt(b).split(","), pt(t).split(",")
        parts.append(
            f'<line class="valley" stroke-dasharray="1.2,0.8" x1="{b_[0]}" y1="{b_[1]}" x2="{t_[0]}" y2="{t_[1]}"/>'
        )

    # end caps drawn below the strip; the frontal cap carries hole + radial cuts
    cy = strip_h + hexa_r + 2 * pad
    for k, cx in enumerate((pad + hexa_r, pad + 3 * hexa_r + 8)):
        ring = [
            (
                cx + hexa_r * math.cos(2 * math.pi * i / pattern.n),
                cy + hexa_r * math.sin(2 * math.pi * i / pattern.n),
            )
            for i in range(pattern.n)
        ]
        pts = " ".join(f"{x:.4f},{y:.4f}" for x, y in ring)
        parts.append(f'<polygon class="cap" points="{pts}"/>')
        if k == 0 and pattern.hole_and_cuts:
            hole_r = pattern.hole_diameter / 2.0 * mm
            parts.append(
                f'<circle class="hole" cx="{cx:.4f}" cy="{cy:.4f}" r="{hole_r:.4f}"/>'
            )
            for i in range(pattern.cut_count):
                ang = 2 * math.pi * i / pattern.cut_count
                x1 = cx + hole_r * math.cos(ang)
                y1 = cy + hole_r * math.sin(ang)
                x2 = cx + hexa_r * 0.95 * math.cos(ang)
                y2 = cy + hexa_r * 0.95 * math.sin(ang)
                parts.append(
                    f'<line class="cut" stroke-dasharray="0.4,0.4" x1="{x1:.4f}" y1="{y1:.4f}" x2="{x2:.4f}" y2="{y2:.4f}"/>'
                )
    parts.append("</g>")
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
