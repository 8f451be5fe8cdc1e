"""Locomotion-mode classification over a window of trace samples.

Rolling and spinning are rotations about the body's longitudinal axis (on
ground / submerged respectively); flipping tumbles about a perpendicular axis
on ground; jumping is ballistic flight; everything else is rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MODES = ("rolling", "flipping", "spinning_swim", "jumping", "rest")

AXIS_TOLERANCE = math.radians(20.0)
MIN_COHERENT_OMEGA = 1.0  # rad/s
AIRBORNE_FRACTION = 0.8
CONTACT_FRACTION = 0.3
MIN_WINDOW = 10


@dataclass(frozen=True)
class ModeSample:
    omega: np.ndarray  # world angular velocity
    axis: np.ndarray  # world longitudinal axis
    contact: bool
    submerged: bool


def classify_mode(window: Sequence[ModeSample]) -> str:
    """Deterministic and total on any window of >= 10 samples."""
    if len(window) < MIN_WINDOW:
        raise ValueError(f"classification window needs >= {MIN_WINDOW} samples, got {len(window)}")

    n = len(window)
    airborne = sum(1 for s in window if not s.contact and not s.submerged) / n
    if airborne >= AIRBORNE_FRACTION:
        return "jumping"

    mean_omega = np.mean([s.omega for s in window], axis=0)
    if float(np.linalg.norm(mean_omega)) < MIN_COHERENT_OMEGA:
        return "rest"

    # |omega|-weighted mean angle between the rotation axis and the
    # longitudinal axis; the axis is undirected, so fold to [0, 90] degrees
    num = 0.0
    den = 0.0
    for s in window:
        w = float(np.linalg.norm(s.omega))
        if w < 1e-9:
            continue
        cosang = abs(float(s.omega @ s.axis)) / (w * float(np.linalg.norm(s.axis)))
        num += w * math.acos(min(1.0, cosang))
        den += w
    if den == 0.0:
        return "rest"
    angle = num / den

    submerged = sum(1 for s in window if s.submerged) / n
    contact = sum(1 for s in window if s.contact) / n

    if submerged > 0.5 and angle <= AXIS_TOLERANCE:
        return "spinning_swim"
    if contact >= CONTACT_FRACTION and angle <= AXIS_TOLERANCE:
        return "rolling"
    if contact >= CONTACT_FRACTION and abs(angle - math.pi / 2.0) <= AXIS_TOLERANCE:
        return "flipping"
    return "rest"


class ModeTracker:
    """Sliding-window classifier with debounce for in-run mode labeling.

    The reported mode only switches after ``debounce`` consecutive windows
    agree on the new label, which keeps vertex-impact wobble from spraying
    spurious transitions into the event log.
    """

    def __init__(self, window: int = 15, debounce: int = 3):
        self.window = window
        self.debounce = debounce
        self.samples: list[ModeSample] = []
        self.mode = "rest"
        self._candidate = "rest"
        self._votes = 0

    def push(self, omega: np.ndarray, axis: np.ndarray, contact: bool, submerged: bool) -> str:
        self.samples.append(ModeSample(np.array(omega), np.array(axis), contact, submerged))
        if len(self.samples) > self.window:
            self.samples.pop(0)
        if len(self.samples) >= MIN_WINDOW:
            raw = classify_mode(self.samples)
            if raw == self.mode:
                self._votes = 0
                self._candidate = raw
            elif raw == self._candidate:
                self._votes += 1
                if self._votes >= self.debounce:
                    self.mode = raw
                    self._votes = 0
            else:
                self._candidate = raw
                self._votes = 1
        return self.mode
