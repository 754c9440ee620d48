"""Phase shifts, the channel-diagonal scattering symbol, and its winding.

For a radial potential S(lambda) is diagonal in the spherical harmonics:
on the order-ell sector it acts as s_ell(lambda) = exp(2 i delta_ell(lambda)).
Sign convention: with delta decreasing from pi N to 0 as lambda runs from 0
to infinity, the winding of det S is -N.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .channels import Channel, born_phase_bound, channel_cutoff
from .specfun import (riccati_bessel_irregular, riccati_bessel_regular,
                      riccati_derivatives, riccati_log_derivatives)


class RefinementError(RuntimeError):
    def __init__(self, msg, interval=None):
        super().__init__(msg)
        self.interval = interval


class AnchorError(RuntimeError):
    """lambda_max is not far enough into the Born regime to anchor the branch."""


@dataclass(frozen=True)
class EnergyGrid:
    lambda_min: float = 1e-4
    lambda_max: float = 1e3
    points: int = 256

    def __post_init__(self):
        if not 0 < self.lambda_min < self.lambda_max:
            raise ValueError("need 0 < lambda_min < lambda_max")
        if self.points < 64:
            raise ValueError(f"need at least 64 energies, got {self.points}")

    @property
    def lam(self):
        return np.geomspace(self.lambda_min, self.lambda_max, self.points)


def _radial_nodes(V, r0, h, refine=1, r_fine=None, h_fine=None):
    """Geometric integration nodes from r0 to r_support, hitting every
    breakpoint.  Log step ``h`` below ``r_fine`` and ``h_fine`` above it.
    ``refine`` subdivides each step, so node families are nested for
    Richardson extrapolation."""
    R = V.r_support
    cuts = {b for b in V.breakpoints if r0 < b < R}
    if r_fine is not None and r0 < r_fine < R:
        cuts.add(r_fine)
    edges = [r0, *sorted(cuts), R]
    parts = [np.array([r0])]
    for a, b in zip(edges[:-1], edges[1:]):
        step = h if (r_fine is None or b <= r_fine) else h_fine
        m = max(2, int(np.ceil(np.log(b / a) / step))) * refine
        parts.append(np.geomspace(a, b, m + 1)[1:])
    return np.concatenate(parts)


def _step_matrices(V, cent, lam, r, with_phase=False):
    """Exact transfer matrices of the step-wise constant equation u'' = q u,
    q = V(mid) + cent/(r_a r_b) - lam; 1/(r_a r_b) is the exact step average
    of 1/r^2.  Shape (steps, energies, 2, 2).  ``with_phase`` also returns
    sqrt|q| and the oscillatory mask, for zero counting."""
    mid = 0.5 * (r[1:] + r[:-1])
    h = np.diff(r)[:, None]
    q = V(mid)[:, None] + (cent / (r[:-1] * r[1:]))[:, None] - lam[None, :]
    x = np.sqrt(np.abs(q)) * h
    osc = q < 0
    xc = np.minimum(x, 700.0)
    c = np.where(osc, np.cos(x), np.cosh(xc))
    sn = np.where(osc, np.sin(x), np.sinh(xc))
    tiny = x < 1e-8
    xs = np.where(tiny, 1.0, x)
    m = np.empty(q.shape + (2, 2))
    m[..., 0, 0] = c
    m[..., 1, 1] = c
    m[..., 0, 1] = np.where(tiny, h, h * sn / xs)
    m[..., 1, 0] = np.where(tiny, q * h, np.where(osc, -1.0, 1.0) * xs * sn / h)
    if with_phase:
        return m, x, x / h, osc
    return m


def _zeros_in_step(u, du, u_new, x, kappa, osc):
    """Zeros of u on (r_a, r_b] within one step.  Oscillatory steps:
    u = A sin(kappa s + phi), zeros where kappa s + phi hits a multiple of pi.
    Otherwise u is a cosh/sinh/linear combination with at most one zero."""
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.arctan2(u, du / np.where(osc, kappa, 1.0))
    turns = np.floor((phi + x) / np.pi) - np.floor(phi / np.pi)
    flips = (u != 0) & (u * u_new <= 0)
    return np.where(osc, turns, flips).astype(np.int64)


def _chain_product(m):
    """Ordered product m[-1] @ ... @ m[0] by pairwise reduction, with each
    partial product rescaled (only the direction of the final vector is used)."""
    while m.shape[0] > 1:
        if m.shape[0] % 2:
            m = np.concatenate([m, np.broadcast_to(np.eye(2), (1,) + m.shape[1:])])
        m = m[1::2] @ m[0::2]
        m /= np.max(np.abs(m), axis=(-2, -1), keepdims=True)
    return m[0]


def _interior_solution(ch, V, lam, h=0.01, refine=1, count_zeros=False):
    """Regular solution (u, u') at r = r_support for each energy, up to a
    positive per-energy scale.  With ``count_zeros`` also the number of
    zeros of u on (0, r_support]."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    nu = ch.nu
    R = V.r_support
    v0 = float(V(np.array([1e-8]))[0])
    c = (v0 - lam) / (4.0 * (nu + 1.0))
    # start where the series u = r^{nu+1/2} (1 + c r^2) is exact to ~1e-14
    r0 = min(1e-3 * R, np.sqrt(1e-7 * (nu + 1.0) / max(np.max(np.abs(c)), 1e-300)))
    if V.breakpoints:
        r0 = min(r0, 1e-3 * min(V.breakpoints))
    u0 = 1.0 + c * r0**2
    du0 = ((nu + 0.5) * (1.0 + c * r0**2) + 2.0 * c * r0**2) / r0
    # Deep inside the centrifugal barrier step errors relax onto the growing
    # solution; beyond it the log step must shrink like 1/nu.
    vmax = float(np.max(np.abs(V(V.sample_grid(400)))))
    r_fine = 0.2 * nu / np.sqrt(np.max(lam) + vmax) if nu > 10 else None
    r = _radial_nodes(V, r0, h, refine, r_fine, min(h, 0.1 / max(nu, 1e-12)))
    if count_zeros:
        m, x, kappa, osc = _step_matrices(V, ch.centrifugal, lam, r, with_phase=True)
        u, du = u0 * np.ones_like(lam), du0 * np.ones_like(lam)
        zeros = np.zeros(lam.shape, dtype=np.int64)
        for i in range(m.shape[0]):
            un = m[i, :, 0, 0] * u + m[i, :, 0, 1] * du
            dun = m[i, :, 1, 0] * u + m[i, :, 1, 1] * du
            zeros += _zeros_in_step(u, du, un, x[i], kappa[i], osc[i])
            u, du = un, dun
            if i % 32 == 31:
                sc = np.maximum(np.abs(u), np.abs(du))
                u, du = u / sc, du / sc
        return u, du, zeros
    if lam.size >= 16:
        # many energies: a sequential sweep vectorised over energy is cheapest
        m = _step_matrices(V, ch.centrifugal, lam, r)
        u, du = u0, du0
        for i in range(m.shape[0]):
            u, du = m[i, :, 0, 0] * u + m[i, :, 0, 1] * du, m[i, :, 1, 0] * u + m[i, :, 1, 1] * du
            if i % 32 == 31:
                sc = np.maximum(np.abs(u), np.abs(du))
                u, du = u / sc, du / sc
        return u, du
    prod = _chain_product(_step_matrices(V, ch.centrifugal, lam, r))
    return (prod[:, 0, 0] * u0 + prod[:, 0, 1] * du0,
            prod[:, 1, 0] * u0 + prod[:, 1, 1] * du0)


def _wrap_half_pi(d):
    """Representative of d mod pi in (-pi/2, pi/2]."""
    out = np.mod(d + 0.5 * np.pi, np.pi) - 0.5 * np.pi
    return np.where(out == -0.5 * np.pi, 0.5 * np.pi, out)


def match_phase(nu, k, R, u, du):
    """delta mod pi from the interior (u, u') at radius R.

    Outside the support u ~ S(kr) cos(delta) + C(kr) sin(delta), hence
    tan(delta) = (k S' u - S u') / (C u' - k C' u).
    """
    x = k * R
    with np.errstate(all="ignore"):
        s = riccati_bessel_regular(nu, x)
        cc = riccati_bessel_irregular(nu, x)
        ds, dc = riccati_derivatives(nu, x)
        num = k * ds * u - s * du
        den = cc * du - k * dc * u
        ok = np.isfinite(num) & np.isfinite(den) & (np.abs(cc) < 1e250)
    if not np.all(ok):
        ratio, ls, lc = riccati_log_derivatives(nu, x)
        num_r = ratio * (k * ls * u - du)
        den_r = du - k * lc * u
        num = np.where(ok, num, num_r)
        den = np.where(ok, den, den_r)
    return _wrap_half_pi(np.arctan2(num, den))


def phase_shift(ch, V, lam, g=None, step=0.01):
    """delta_ell(lam) modulo pi, in (-pi/2, pi/2].  Vectorised over ``lam``.

    ``g`` is accepted for interface symmetry with the bound-state counters;
    the interior integration builds its own nodes from ``step``.
    """
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if np.any(lam_arr <= 0):
        raise ValueError("energies must be positive")
    if V.is_zero:
        out = np.zeros_like(lam_arr)
    else:
        k = np.sqrt(lam_arr)
        # Richardson extrapolation of the second-order propagator
        coarse = match_phase(ch.nu, k, V.r_support, *_interior_solution(ch, V, lam_arr, step))
        fine = match_phase(ch.nu, k, V.r_support, *_interior_solution(ch, V, lam_arr, step, 2))
        out = _wrap_half_pi(fine + _wrap_half_pi(fine - coarse) / 3.0)
    return float(out[0]) if np.ndim(lam) == 0 else out


def bessel_phase(nu, x):
    """Continuous phase Theta of the free pair: S = M sin(Theta),
    C = M cos(Theta), Theta(0+) = 0, Theta ~ x - nu pi/2 + pi/4.

    atan2 gives Theta modulo 2 pi; the branch is the one nearest the
    Debye/WKB phase, which is within pi/3 of the truth for every nu."""
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        t = np.arctan2(riccati_bessel_regular(nu, x), riccati_bessel_irregular(nu, x))
        ratio = np.clip(nu / x, 0.0, 1.0)
        wkb = np.where(x > nu, np.sqrt(np.maximum(x * x - nu * nu, 0.0)) - nu * np.arccos(ratio)
                       + 0.25 * np.pi, 0.0)
    return t + 2 * np.pi * np.round((wkb - t) / (2 * np.pi))


def absolute_phase_shift(ch, V, lam, step=0.01):
    """delta_ell(lam) on the continuous branch with delta(infinity) = 0.

    The modulo-pi phase fixes delta up to a multiple of pi; the multiple
    comes from counting zeros of the regular solution inside the support
    (oscillation theorem): with u = M sin(Phi) in the free basis, Phi
    passes each multiple of pi exactly at a zero of u, and outside the
    support Phi(kr) = Theta(kr) + delta.  Unlike unwrapping a sampled
    curve this cannot lose a pi to a resonance narrower than the grid.
    """
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if np.any(lam_arr <= 0):
        raise ValueError("energies must be positive")
    if V.is_zero:
        out = np.zeros_like(lam_arr)
    else:
        k = np.sqrt(lam_arr)
        R = V.r_support
        coarse = match_phase(ch.nu, k, R, *_interior_solution(ch, V, lam_arr, step))
        u, du, zeros = _interior_solution(ch, V, lam_arr, step, 2, count_zeros=True)
        fine = match_phase(ch.nu, k, R, u, du)
        theta = bessel_phase(ch.nu, k * R)
        # lift the fine-mesh phase with its own zero count, then apply the
        # (small) Richardson correction
        out = np.pi * zeros + np.mod(theta + fine, np.pi) - theta
        out += _wrap_half_pi(fine - coarse) / 3.0
    return float(out[0]) if np.ndim(lam) == 0 else out


@dataclass
class PhaseCurve:
    """Continuous branch of delta on a (possibly refined) energy grid.

    The branch is anchored at high energy: delta(lambda_max) is the
    representative in (-pi/2, pi/2], i.e. the branch that returns to 0 as
    lambda -> infinity.
    """

    channel: Channel
    lam: np.ndarray
    delta: np.ndarray
    grid: EnergyGrid = None
    anchor: dict = field(default_factory=dict)

    @property
    def multiplicity(self):
        return self.channel.multiplicity

    @property
    def label(self):
        return str(self.channel.ell)

    @property
    def s(self):
        return np.exp(2j * self.delta)


def unwrap_from_top(reps, period=np.pi):
    """Continuous branch through mod-``period`` samples, anchored at the last one."""
    out = np.empty_like(reps)
    out[-1] = reps[-1]
    for j in range(len(reps) - 2, -1, -1):
        out[j] = reps[j] + period * np.round((out[j + 1] - reps[j]) / period)
    return out


def phase_curve(ch, V, grid, g=None, max_step=np.pi / 4, max_refine=10):
    lam = grid.lam
    delta = absolute_phase_shift(ch, V, lam)
    if not V.is_zero:
        born = born_phase_bound(ch, V, grid.lambda_max)
        if born >= 0.5 * np.pi:
            raise AnchorError(f"{ch}: Born bound {born:.3f} at lambda_max={grid.lambda_max:g} "
                              "is not small; raise lambda_max")
    for _ in range(max_refine + 1):
        bad = np.nonzero(np.abs(np.diff(delta)) >= max_step)[0]
        if bad.size == 0:
            break
        mids = np.sqrt(lam[bad] * lam[bad + 1])
        new = absolute_phase_shift(ch, V, mids)
        lam = np.concatenate([lam, mids])
        delta = np.concatenate([delta, new])
        order = np.argsort(lam)
        lam, delta = lam[order], delta[order]
    else:
        j = int(bad[0])
        raise RefinementError(f"{ch}: phase step >= {max_step:.3f} persists",
                              (float(lam[j]), float(lam[j + 1])))
    return PhaseCurve(ch, lam, delta, grid,
                      {"lambda": float(lam[-1]), "delta": float(delta[-1]), "rule": "delta(inf)=0"})


@dataclass
class SymbolBlock:
    """One diagonal block of a unitary symbol: s = exp(2 i delta) on ``lam``."""

    label: str
    multiplicity: int
    lam: np.ndarray
    delta: np.ndarray

    @property
    def s(self):
        return np.exp(2j * self.delta)


@dataclass
class UnitarySymbol:
    blocks: list
    grid: EnergyGrid = None
    n: int = None

    @classmethod
    def from_curves(cls, curves, grid=None, n=None):
        return cls([SymbolBlock(c.label, c.multiplicity, c.lam, c.delta) for c in curves], grid, n)

    @classmethod
    def from_samples(cls, lam, samples, multiplicities=None, labels=None, grid=None):
        """Build from unit-modulus samples; rows are blocks.  The branch of
        delta = arg(s)/2 is unwrapped and anchored at the top energy."""
        samples = np.atleast_2d(samples)
        mult = multiplicities or [1] * len(samples)
        labels = labels or [str(i) for i in range(len(samples))]
        blocks = []
        for lab, m, row in zip(labels, mult, samples):
            theta = unwrap_from_top(np.angle(row), 2 * np.pi)
            blocks.append(SymbolBlock(lab, m, np.asarray(lam, float), 0.5 * theta))
        return cls(blocks, grid)

    def max_unitarity_defect(self):
        return max(float(np.max(np.abs(np.abs(b.s) - 1))) for b in self.blocks)


def scattering_symbol(V, n, grid, g=None, ell_max=None, tol=1e-3):
    if ell_max is None:
        ell_max = channel_cutoff(V, n, grid.lambda_max, tol, lambda_min=grid.lambda_min)
    curves = [phase_curve(Channel(n, ell), V, grid, g) for ell in range(ell_max + 1)]
    return UnitarySymbol.from_curves(curves, grid, n)


@dataclass(frozen=True)
class Winding:
    value: float
    nearest: int
    distance: float


def det_winding(sym):
    """Winding number of lambda -> det S(lambda) over (lambda_min, infinity).

    Each block's branch is anchored at lambda_max and closed along the
    high-energy tail back to delta = 0 (S(infinity) = Id), so the block
    contributes multiplicity * (0 - delta(lambda_min)) / pi.  Closing at the
    top instead of truncating keeps the many high-ell channels, whose phases
    are small but nonzero at lambda_max, from accumulating spurious winding.
    """
    w = 0.0
    for b in sym.blocks:
        w += b.multiplicity * (0.0 - b.delta[0]) / np.pi
    w = float(w)
    nearest = int(np.round(w))
    return Winding(w, nearest, abs(w - nearest))


def det_path_winding(lam, matrices):
    """Winding of det U(lambda) for full (non-diagonal) matrix samples:
    total change of the unwrapped argument divided by 2 pi."""
    dets = np.array([np.linalg.det(m) for m in matrices])
    theta = np.unwrap(np.angle(dets))
    return float((theta[-1] - theta[0]) / (2 * np.pi))


@dataclass(frozen=True)
class ThresholdReport:
    low_deviation: float       # max_ell |s_ell(lambda_min) - 1|
    high_deviation: float      # max_ell |s_ell(lambda_max) - 1|
    low_deviation_10x: float   # same at the grid energy nearest 10 lambda_min
    decaying: bool


def threshold_check(sym):
    low = high = low10 = 0.0
    for b in sym.blocks:
        s = b.s
        low = max(low, abs(s[0] - 1))
        high = max(high, abs(s[-1] - 1))
        j = int(np.argmin(np.abs(np.log(b.lam / (10 * b.lam[0])))))
        low10 = max(low10, abs(s[j] - 1))
    return ThresholdReport(float(low), float(high), float(low10), bool(low <= low10))


def threshold_norms(V, n, lams, ell_max=None, ell_cap=4000, stride=8):
    """||S(lambda) - Id|| = max_ell |s_ell(lambda) - 1| evaluated directly.

    Without ``ell_max`` the channel scan stops once the Born bound, sampled
    every ``stride`` channels, has twice in a row been below a quarter of the
    running maximum at every energy; beyond that point the bound only
    decreases.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    out = np.zeros_like(lams)
    quiet = 0
    for ell in range(ell_cap + 1):
        ch = Channel(n, ell)
        d = phase_shift(ch, V, lams)
        out = np.maximum(out, np.abs(np.exp(2j * d) - 1))
        if ell_max is not None:
            if ell >= ell_max:
                break
            continue
        if ell > 0 and ell % stride == 0:
            born = born_phase_bound(ch, V, lams)
            quiet = quiet + 1 if np.all(2 * born < 0.25 * out) else 0
            if quiet >= 2:
                break
    return out


def export_csv(sym, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["lambda", "channel", "delta", "re_s", "im_s"])
        for b in sym.blocks:
            s = b.s
            for lam, d, z in zip(b.lam, b.delta, s):
                wr.writerow([f"{lam:.12e}", b.label, f"{d:.12e}", f"{z.real:.12e}", f"{z.imag:.12e}"])
