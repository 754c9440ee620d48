"""Partial-wave reduction of -Laplacian + V on R^n for radial V.

With u(r) = r^{(n-1)/2} f(r) each spherical-harmonic sector of order ell
becomes the half-line problem

    -u'' + [(nu^2 - 1/4) / r^2 + V(r)] u = E u,     nu = ell + (n - 2) / 2,

repeated ``multiplicity(n, ell)`` times.  Units: hbar^2 / 2m = 1.
"""

from dataclasses import dataclass, field
from math import comb
from typing import Callable

import numpy as np

from .specfun import DomainError, riccati_bessel_regular


@dataclass(frozen=True)
class RadialPotential:
    """Radial profile ``r -> V(r)`` with decay data.

    ``rho`` is the power in |V(r)| <= C (1 + r)^-rho; use ``inf`` for
    compact support or faster-than-polynomial decay.  ``r_support`` is the
    radius beyond which V is numerically negligible and doubles as the
    matching radius for phase shifts.  ``breakpoints`` lists radii where V
    is discontinuous so that integrators can restart there.
    """

    profile: Callable[[np.ndarray], np.ndarray]
    rho: float
    r_support: float
    breakpoints: tuple = ()
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.r_support > 0:
            raise ValueError("r_support must be positive")
        if np.isnan(self.rho):
            raise ValueError("rho must not be NaN")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.asarray(self.profile(r), dtype=float) * np.ones_like(r)

    def scaled(self, g):
        """The potential g * V."""
        prof = self.profile
        params = dict(self.params, coupling=float(g))
        return RadialPotential(lambda r: g * prof(r), self.rho, self.r_support,
                               self.breakpoints, self.name, params)

    def sample_grid(self, points=2001):
        r = np.linspace(0.0, 3.0 * self.r_support, points)
        r[0] = 1e-8
        return r

    @property
    def is_zero(self):
        return bool(np.all(self(self.sample_grid()) == 0.0))

    def decay_constant(self):
        """max |V(r)| (1 + r)^rho on the sample grid (0 for rho = inf)."""
        if not np.isfinite(self.rho):
            return 0.0
        r = self.sample_grid()
        return float(np.max(np.abs(self(r)) * (1 + r) ** self.rho))

    @property
    def label(self):
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={self.params[k]:g}" for k in sorted(self.params))
        return f"{self.name}({inner})"


@dataclass(frozen=True)
class Channel:
    n: int
    ell: int

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"dimension must be >= 2, got {self.n}")
        if self.ell < 0:
            raise DomainError(f"angular momentum must be >= 0, got {self.ell}")

    @property
    def nu(self):
        return self.ell + 0.5 * (self.n - 2)

    @property
    def multiplicity(self):
        return multiplicity(self.n, self.ell)

    @property
    def centrifugal(self):
        return self.nu**2 - 0.25


def multiplicity(n, ell):
    """Dimension of the order-``ell`` spherical harmonics on S^{n-1}."""
    if int(n) != n or int(ell) != ell or n < 2 or ell < 0:
        raise DomainError(f"invalid (n, ell) = ({n}, {ell})")
    n, ell = int(n), int(ell)
    if ell == 0:
        return 1
    # harmonic polynomials = homogeneous degree ell minus r^2 * degree ell-2
    return comb(ell + n - 1, n - 1) - comb(ell + n - 3, n - 1)


def effective_potential(ch, V):
    c = ch.centrifugal

    def veff(r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("effective potential needs r > 0")
        out = V(r) + c / r**2
        return float(out) if out.ndim == 0 else out

    return veff


# Decay thresholds on rho required for the structural wave-operator formula.
def required_rho(n):
    if n < 2:
        raise DomainError("dimension must be >= 2")
    return {2: 11.0, 3: 5.0, 4: 12.0}.get(n, (3 * n + 4) / 2)


@dataclass(frozen=True)
class AssumptionReport:
    n: int
    rho: float
    required: float
    ok: bool
    message: str


def validate_assumption(V, n):
    """Check the decay exponent against the dimension-dependent threshold.

    Advisory only: failing potentials are still processed but flagged.
    """
    need = required_rho(n)
    if V.is_zero:
        return AssumptionReport(n, np.inf, need, True, "exact zero")
    ok = V.rho > need
    if not np.isfinite(V.decay_constant()):
        ok = False
    msg = (f"rho={V.rho:g} > {need:g}" if ok
           else f"decay too slow for n={n}: need rho > {need:g}, have {V.rho:g}")
    return AssumptionReport(n, float(V.rho), need, bool(ok), msg)


def _quad_nodes(V, k, r_max):
    edges = sorted({0.0, r_max, *[b for b in V.breakpoints if 0 < b < r_max]})
    xg, wg = np.polynomial.legendre.leggauss(10)
    rs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        width = min(0.5, np.pi / (2 * k))
        m = max(1, int(np.ceil((b - a) / width)))
        cuts = np.linspace(a, b, m + 1)
        half = 0.5 * np.diff(cuts)
        mid = 0.5 * (cuts[1:] + cuts[:-1])
        rs.append((mid[:, None] + half[:, None] * xg).ravel())
        ws.append((half[:, None] * wg).ravel())
    return np.concatenate(rs), np.concatenate(ws)


def born_phase_bound(ch, V, lam):
    """Born estimate (1/k) int |V| S_nu(kr)^2 dr of |delta_ell(lam)|.

    Scalar ``lam`` gives a float, an array gives one value per energy.
    """
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    k = np.sqrt(lam_arr)
    r, w = _quad_nodes(V, float(np.max(k)), V.r_support)
    s = riccati_bessel_regular(ch.nu, k[:, None] * r[None, :])
    out = (s**2 @ (w * np.abs(V(r)))) / k
    return float(out[0]) if np.ndim(lam) == 0 else out


def channel_cutoff(V, n, lambda_max, tol, lambda_min=1e-4, samples=24, ell_cap=400):
    """Smallest ell_max whose Born bound stays below ``tol`` beyond it.

    The estimate is heuristic; callers that need certainty compute the
    phase of channel ell_max + 1 directly.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if V.is_zero:
        return 0
    lams = np.geomspace(lambda_min, lambda_max, samples)
    cache = {}

    def small(ell):
        if ell not in cache:
            cache[ell] = float(np.max(born_phase_bound(Channel(n, ell), V, lams))) < tol
        return cache[ell]

    def ok(ell):
        return small(ell + 1) and small(ell + 2)

    # the bound decays in ell once ell exceeds k R; bracket, then bisect
    lo, hi = -1, 1
    while hi < ell_cap and not ok(hi):
        lo, hi = hi, min(2 * hi, ell_cap)
    if not ok(hi):
        return ell_cap
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
