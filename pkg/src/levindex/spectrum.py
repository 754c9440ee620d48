"""Bound-state counting and zero-energy threshold diagnostics per channel.

Both counters work in the logarithmic variable t = ln r with u = e^{t/2} w,
which turns the radial equation into

    -w'' + [nu^2 + e^{2t} (V(e^t) - E)] w = 0.

The centrifugal term becomes the constant nu^2 and the regular behaviour
u ~ r^{nu + 1/2} becomes the Robin condition w' = nu w at t_min.  This
sidesteps the singular -1/(4 r^2) term of the (n, ell) = (2, 0) channel.
The eigenproblem is the pencil A w = E M w with M = diag(e^{2t}) > 0, so by
Sylvester inertia the number of eigenvalues below sigma equals the number
of negative pivots of A - sigma M (a Sturm sequence).
"""

from dataclasses import dataclass, field

import numpy as np

from .channels import Channel


class ResolutionError(RuntimeError):
    """Bound-state count changed when the radial grid was refined."""


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class RadialGrid:
    """Cell-centred grid, uniform in ln r on [r_min, r_max]."""

    r_min: float = 1e-5
    r_max: float = 1e4
    points: int = 4000

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max:
            raise GridError(f"need 0 < r_min < r_max, got {self.r_min}, {self.r_max}")
        if self.points < 100:
            raise GridError(f"need at least 100 points, got {self.points}")

    @property
    def h(self):
        return np.log(self.r_max / self.r_min) / self.points

    @property
    def t(self):
        return np.log(self.r_min) + self.h * (np.arange(self.points) + 0.5)

    @property
    def r(self):
        return np.exp(self.t)

    def refined(self):
        return RadialGrid(self.r_min, self.r_max, 2 * self.points)

    def check(self, V):
        if self.r_max < 3 * V.r_support:
            raise GridError(f"r_max={self.r_max:g} must be >= 3 * r_support = {3 * V.r_support:g}")

    def eps_floor(self):
        # ten times the O(h^2) error of the lowest Dirichlet box level
        return 10.0 * self.h**2 / 12.0 * (np.pi / self.r_max) ** 2


def _scaled_potential(V, g):
    """e^{2t} V(e^t) on the nodes; cells containing a discontinuity of V get
    their cell average so the jump does not cost an order of accuracy."""
    t = g.t
    h = g.h
    out = np.exp(2 * t) * V(np.exp(t))
    xg, wg = np.polynomial.legendre.leggauss(12)
    for b in V.breakpoints:
        tb = np.log(b)
        i = int(np.floor((tb - (t[0] - 0.5 * h)) / h))
        if not 0 <= i < len(t):
            continue
        lo, hi = t[i] - 0.5 * h, t[i] + 0.5 * h
        total = 0.0
        for a, c in ((lo, tb), (tb, hi)):
            if c <= a:
                continue
            tt = 0.5 * (a + c) + 0.5 * (c - a) * xg
            total += 0.5 * (c - a) * np.sum(wg * np.exp(2 * tt) * V(np.exp(tt)))
        out[i] = total / h
    return out


def _pencil(ch, V, g):
    t = g.t
    h = g.h
    m = np.exp(2 * t)
    diag = 2.0 / h**2 + ch.nu**2 + _scaled_potential(V, g)
    # Robin ghost value from (w0 - w_{-1})/h = nu (w0 + w_{-1})/2
    c = (1 - 0.5 * ch.nu * h) / (1 + 0.5 * ch.nu * h)
    diag[0] -= c / h**2
    diag[-1] += 1.0 / h**2  # Dirichlet at r_max via odd ghost
    off = -1.0 / h**2
    return diag, off, m


def sturm_count(diag, off, sigma=0.0, mass=None):
    """Number of eigenvalues below ``sigma`` of a symmetric tridiagonal
    matrix (or of the pencil (T, diag(mass))).  ``off`` may be a scalar."""
    d = np.asarray(diag, dtype=float)
    if mass is not None:
        d = d - sigma * np.asarray(mass, dtype=float)
    else:
        d = d - sigma
    e2 = np.broadcast_to(np.asarray(off, dtype=float) ** 2, (len(d) - 1,)).tolist()
    tiny = np.finfo(float).tiny ** 0.5
    count = 0
    q = 1.0
    first = True
    for i, di in enumerate(d.tolist()):
        q = di if first else di - e2[i - 1] / q
        first = False
        if q == 0.0:
            q = -tiny
        if q < 0:
            count += 1
    return count


def _count(ch, V, g):
    diag, off, m = _pencil(ch, V, g)
    return sturm_count(diag, off, -g.eps_floor(), m)


def count_negative_eigenvalues(ch, V, g, check_resolution=True):
    """Eigenvalues below -eps_floor of the discretised channel operator."""
    g.check(V)
    n1 = _count(ch, V, g)
    if check_resolution:
        n2 = _count(ch, V, g.refined())
        if n1 != n2:
            raise ResolutionError(
                f"{ch}: count {n1} at {g.points} points but {n2} at {2 * g.points}")
    return n1


def negative_eigenvalues(ch, V, g, tol=1e-10):
    """Locate the negative eigenvalues by bisection on Sturm counts."""
    g.check(V)
    diag, off, m = _pencil(ch, V, g)
    hi = -g.eps_floor()
    total = sturm_count(diag, off, hi, m)
    if total == 0:
        return np.array([])
    lo = min(float(np.min(V(g.r))), hi) - 1.0
    out = []
    for j in range(total):
        a, b = lo, hi
        while b - a > tol * max(1.0, abs(a)):
            mid = 0.5 * (a + b)
            if sturm_count(diag, off, mid, m) > j:
                b = mid
            else:
                a = mid
        out.append(0.5 * (a + b))
    return np.array(out)


def _numerov_zero_energy(ch, V, g, capture=()):
    """Integrate the regular zero-energy solution with Numerov.

    Returns the node count and {index: (w, log_scale)} for the requested
    node indices; values are rescaled internally to avoid overflow.
    """
    t = g.t
    h = g.h
    q = (ch.nu**2 + _scaled_potential(V, g)) * (h * h / 12.0)
    f = (1.0 - q).tolist()
    q = q.tolist()
    w_prev, w = 1.0, float(np.exp(ch.nu * h))
    want = set(capture)
    got = {}
    if 0 in want:
        got[0] = (w_prev, 0.0)
    if 1 in want:
        got[1] = (w, 0.0)
    nodes = 0
    log_scale = 0.0
    for i in range(1, len(t) - 1):
        w_next = (2.0 * w * (1.0 + 5.0 * q[i]) - w_prev * f[i - 1]) / f[i + 1]
        if w * w_next < 0 or (w == 0.0 and w_prev * w_next < 0):
            nodes += 1
        w_prev, w = w, w_next
        if i + 1 in want:
            got[i + 1] = (w, log_scale)
        if abs(w) > 1e150:
            w_prev *= 1e-150
            w *= 1e-150
            log_scale += 150 * np.log(10)
    return nodes, got


def count_nodes_zero_energy(ch, V, g):
    """Nodes of the regular zero-energy solution on (r_min, r_max)."""
    g.check(V)
    return _numerov_zero_energy(ch, V, g)[0]


GROWTH_DOMINANCE = 10.0
AMPLITUDE_FLOOR = 1e-3


@dataclass(frozen=True)
class ThresholdDiagnostic:
    channel: Channel
    generic: bool
    growth_ratio: float        # |A g| / |B d| at r_max
    growing_fraction: float    # |A| / (|A| + |B|) at the support radius
    far_node: float            # radius of the asymptotic node beyond support, inf if none
    detail: str = ""


def _free_basis(nu, dt):
    """Growing / other free zero-energy solutions at offset dt from t_s."""
    if nu > 0:
        return np.exp(nu * dt), np.exp(-nu * dt)
    return dt, 1.0


def threshold_diagnostic(ch, V, g):
    """Classify the large-r behaviour of the regular zero-energy solution.

    Beyond the support radius r_s the solution is w = A g + B d with g the
    growing free solution (e^{nu (t - t_s)}, or t - t_s when nu = 0) and d
    the other one.  The channel is generic when A carries at least
    AMPLITUDE_FLOOR of the weight at r_s and the asymptotic combination has
    no node in (r_max / GROWTH_DOMINANCE, inf); otherwise the zero-energy
    solution is bounded to within tolerance (resonance or eigenvalue at 0)
    and integer guarantees downstream are withdrawn.
    """
    g.check(V)
    t = g.t
    T = t[-1]
    ts = np.log(V.r_support)
    nu = ch.nu
    i0 = int(np.searchsorted(t, ts))
    step = max(1, int(round(min(1.0, 1.0 / max(nu, 1e-12)) / g.h)))
    i1 = min(i0 + step, len(t) - 1)
    if i1 <= i0:
        raise GridError("radial grid does not extend beyond the support radius")
    _, got = _numerov_zero_energy(ch, V, g, (i0, i1))
    (w0, l0), (w1, l1) = got[i0], got[i1]
    w0 = w0 * np.exp(max(l0 - l1, -700.0))
    g0, d0 = _free_basis(nu, t[i0] - ts)
    g1, d1 = _free_basis(nu, t[i1] - ts)
    det = g0 * d1 - g1 * d0
    a = (w0 * d1 - w1 * d0) / det
    b = (g0 * w1 - g1 * w0) / det
    frac = abs(a) / (abs(a) + abs(b)) if (a or b) else 0.0

    # asymptotic node: A g(t*) + B d(t*) = 0
    far = np.inf
    if a != 0 and b != 0 and -b / a > 0:
        if nu > 0:
            t_star = ts + np.log(-b / a) / (2 * nu)
        else:
            t_star = ts - b / a
        if t_star > ts:
            far = float(np.exp(min(t_star, 700.0)))
    elif a == 0:
        far = np.inf if b == 0 else np.inf

    gT, dT = _free_basis(nu, T - ts)
    with np.errstate(over="ignore", divide="ignore"):
        growth = abs(a) * gT / (abs(b) * dT) if b != 0 else np.inf
    no_far_node = far == np.inf or far < np.exp(T) / GROWTH_DOMINANCE
    generic = bool(frac >= AMPLITUDE_FLOOR and no_far_node)
    if generic:
        detail = "growing zero-energy solution"
    elif frac < AMPLITUDE_FLOOR:
        detail = "bounded zero-energy solution: possible zero-energy resonance or eigenvalue"
    else:
        detail = f"zero-energy solution has a node near r={far:.3g}, beyond the resolved box"
    return ThresholdDiagnostic(ch, generic, float(growth), float(frac), far, detail)


@dataclass
class BoundStateCount:
    per_channel: list = field(default_factory=list)   # (Channel, eigen, nodes)
    threshold_flags: list = field(default_factory=list)
    resolution_flags: list = field(default_factory=list)

    @property
    def total(self):
        return sum(ch.multiplicity * ne for ch, ne, _ in self.per_channel)

    @property
    def total_nodes(self):
        return sum(ch.multiplicity * nn for ch, _, nn in self.per_channel)

    @property
    def methods_agree(self):
        return all(ne == nn for _, ne, nn in self.per_channel)


def count_bound_states(V, n, g, ell_min_scan=0):
    """Count per channel until a channel with no bound states is reached
    (counts are non-increasing in ell) and at least ``ell_min_scan`` is covered."""
    out = BoundStateCount()
    ell = 0
    while True:
        ch = Channel(n, ell)
        try:
            ne = count_negative_eigenvalues(ch, V, g)
        except ResolutionError:
            ne = _count(ch, V, g)
            out.resolution_flags.append(ch)
        nn = count_nodes_zero_energy(ch, V, g)
        diag = threshold_diagnostic(ch, V, g)
        if not diag.generic:
            out.threshold_flags.append(ch)
        out.per_channel.append((ch, ne, nn))
        if ne == 0 and nn == 0 and ell >= ell_min_scan and diag.generic:
            break
        ell += 1
        if ell > 200:
            break
    return out
