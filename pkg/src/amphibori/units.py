"""Unit parsing/formatting at the external boundary.

Everything inside the simulator is SI (m, T, Hz, s, rad, m^3). The scenario
DSL and the CLI accept suffixed quantities (mm, mT, Hz, s, ms, deg, ul) and
convert here.
"""

from __future__ import annotations

import math
import re

# suffix -> (scale to SI, human name); longest suffixes first when matching
_UNIT_SCALES = {
    "mm": 1e-3,
    "m": 1.0,
    "mT": 1e-3,
    "T": 1.0,
    "Hz": 1.0,
    "ms": 1e-3,
    "s": 1.0,
    "deg": math.pi / 180.0,
    "rad": 1.0,
    "ul": 1e-9,  # microliter -> m^3
    "N": 1.0,
}

_QTY_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([a-zA-Z]*)\s*$")


def parse_quantity(text: str) -> float:
    """Parse '7.8mm', '10mT', '4Hz', '30deg', '20ul' or a bare SI number."""
    m = _QTY_RE.match(text)
    if not m:
        raise ValueError(f"not a quantity: {text!r}")
    value, suffix = float(m.group(1)), m.group(2)
    if not suffix:
        return value
    if suffix not in _UNIT_SCALES:
        raise ValueError(f"unknown unit {suffix!r} in {text!r}")
    return value * _UNIT_SCALES[suffix]


def parse_vector(text: str) -> tuple[float, float, float]:
    """Parse '(0,1,0)' or '(40mm, 0, 3mm)' into an SI 3-tuple."""
    t = text.strip()
    if not (t.startswith("(") and t.endswith(")")):
        raise ValueError(f"not a vector: {text!r}")
    parts = t[1:-1].split(",")
    if len(parts) != 3:
        raise ValueError(f"vector needs 3 components: {text!r}")
    return tuple(parse_quantity(p) for p in parts)  # type: ignore[return-value]


def fmt_si(value: float, unit: str) -> str:
    """Format an SI value back into the DSL's canonical suffixed form."""
    scale = _UNIT_SCALES[unit]
    return f"{_strip(value / scale)}{unit}"


def _strip(x: float) -> str:
    s = f"{x:.9g}"
    return s
