"""Built-in potential families and the tabulated-profile loader.

``depth > 0`` means an attractive well; negative depth gives a barrier.
"""

import numpy as np
from scipy.interpolate import PchipInterpolator

from .channels import RadialPotential

NEGLIGIBLE = 1e-14


def zero_potential(r_support=1.0):
    return RadialPotential(lambda r: np.zeros_like(r), np.inf, r_support, name="zero")


def square_well(depth, radius):
    if radius <= 0:
        raise ValueError("radius must be positive")

    def prof(r):
        return np.where(r < radius, -depth, 0.0)

    return RadialPotential(prof, np.inf, radius, (radius,), "square_well",
                           {"depth": depth, "radius": radius})


def gaussian_well(depth, width=1.0):
    r_s = width * np.sqrt(np.log(max(abs(depth), 1.0) / NEGLIGIBLE))
    return RadialPotential(lambda r: -depth * np.exp(-(r / width) ** 2), np.inf, r_s,
                           name="gaussian", params={"depth": depth, "width": width})


def exponential_well(depth, width=1.0):
    r_s = width * np.log(max(abs(depth), 1.0) / NEGLIGIBLE)
    return RadialPotential(lambda r: -depth * np.exp(-r / width), np.inf, r_s,
                           name="exponential", params={"depth": depth, "width": width})


def power_law_well(depth, power, width=1.0, floor=1e-9):
    """-depth (1 + r/width)^-power; truncated where it drops below ``floor``."""
    if power <= 0:
        raise ValueError("power must be positive")
    r_s = width * ((max(abs(depth), 1.0) / floor) ** (1.0 / power) - 1.0)
    return RadialPotential(lambda r: -depth * (1 + r / width) ** (-power), float(power),
                           max(r_s, width), name="power_law",
                           params={"depth": depth, "power": power, "width": width})


FAMILIES = {
    "square_well": (square_well, {"depth", "radius"}),
    "gaussian": (gaussian_well, {"depth", "width"}),
    "exponential": (exponential_well, {"depth", "width"}),
    "power_law": (power_law_well, {"depth", "power", "width"}),
    "zero": (lambda: zero_potential(), set()),
}


class TableError(ValueError):
    """Malformed tabulated potential; ``row`` is 1-based."""

    def __init__(self, msg, row=None):
        super().__init__(msg if row is None else f"row {row}: {msg}")
        self.row = row


def _parse_table(lines):
    rows = []
    for i, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.replace(",", " ").split()
        if len(parts) != 2:
            raise TableError(f"expected 2 columns, got {len(parts)}", i)
        try:
            r, v = float(parts[0]), float(parts[1])
        except ValueError:
            raise TableError(f"non-numeric entry {text!r}", i) from None
        if not (np.isfinite(r) and np.isfinite(v)):
            raise TableError("non-finite entry", i)
        if r <= 0:
            raise TableError("radius must be positive", i)
        if rows and r <= rows[-1][1]:
            raise TableError(f"radius {r:g} not strictly increasing", i)
        rows.append((i, r, v))
    if len(rows) < 4:
        raise TableError("need at least 4 rows")
    return np.array([x[1] for x in rows]), np.array([x[2] for x in rows])


def estimate_tail_exponent(r, v, tail=5):
    """Fit |V| ~ r^-rho on the last ``tail`` nonzero rows; inf if V is zero there."""
    rt, vt = r[-tail:], np.abs(v[-tail:])
    if np.all(vt == 0):
        return np.inf
    if np.any(vt == 0):
        return np.inf
    slope = np.polyfit(np.log(rt), np.log(vt), 1)[0]
    return float(max(-slope, 0.0))


def load_tabulated_potential(path, floor=1e-9):
    """Load a two-column ``r V(r)`` table.

    Inside the table: monotone cubic (PCHIP) interpolation, constant
    extension toward r = 0.  Beyond the last row: V(r_last) (r_last/r)^rho
    with rho fitted on the tail rows.
    """
    with open(path) as fh:
        r, v = _parse_table(fh.readlines())
    rho = estimate_tail_exponent(r, v)
    r_last, v_last = r[-1], v[-1]
    if np.all(v == 0):
        return RadialPotential(lambda x: np.zeros_like(x), np.inf, float(r_last),
                               name="tabulated", params={"rows": len(r)})
    interp = PchipInterpolator(r, v, extrapolate=False)
    if np.isfinite(rho) and rho > 0 and v_last != 0:
        p = rho

        def tail(x):
            return v_last * (r_last / x) ** p

        r_s = r_last * max((abs(v_last) / floor) ** (1.0 / p), 1.0)
    else:
        # tail row is exactly zero: treat as compact support
        def tail(x):
            return np.zeros_like(x)

        r_s = r_last

    def prof(x):
        x = np.asarray(x, dtype=float)
        inside = interp(np.clip(x, r[0], r_last))
        return np.where(x <= r_last, inside, tail(np.maximum(x, r_last)))

    return RadialPotential(prof, rho, float(r_s), name="tabulated",
                           params={"rows": len(r), "rho_fit": rho if np.isfinite(rho) else -1.0})


def build_potential(family, params):
    if family not in FAMILIES:
        raise KeyError(f"unknown potential family {family!r}; known: {sorted(FAMILIES)}")
    fn, allowed = FAMILIES[family]
    extra = set(params) - allowed
    if extra:
        raise KeyError(f"unexpected parameters for {family}: {sorted(extra)}")
    return fn(**params)
