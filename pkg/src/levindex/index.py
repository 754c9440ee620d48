"""Finite sections of the model wave operator and the Hardy pairing, and
their numerical Fredholm indices.

Both operators are built on a periodic LogLattice and stored in the unitary
frequency basis, where functions of the dilation generator are diagonal:

    model:  Id + psi(xi) * (S - Id)          (compact remainder dropped)
    hardy:  P S P + (Id - P),   P = indicator(xi <= 0)

with S the circulant of the symbol s(x).  A square matrix always has index
0; the periodic section pairs every genuine kernel vector (localised at
xi ~ 0, where psi and P switch) with a spurious partner at the Nyquist wrap.
``estimate_index`` keeps only the small singular vectors that live at low
frequency, which recovers the index of the underlying Toeplitz operator.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.linalg import circulant
from scipy.ndimage import gaussian_filter1d

from .mellin import LogLattice, psi, spectral_projection_negative
from .scatter import (EnergyGrid, channel_cutoff, det_winding, phase_curve,
                      UnitarySymbol)
from .channels import Channel
from .spectrum import count_bound_states

# index = INDEX_SIGN * (winding of s in increasing x); fixed once against the
# winding +1 fixture, see ``calibrate_sign``
INDEX_SIGN = 1

CLOSURE_TOL = 1e-6


class ClosureError(ValueError):
    """The symbol does not return to 1 at one end of the lattice."""

    def __init__(self, msg, end):
        super().__init__(msg)
        self.end = end


def _taper(u):
    u = np.clip(u, 0.0, 1.0)
    return 0.5 * (1.0 + np.cos(np.pi * u))


def symbol_on_lattice(lam, delta, lat, taper=3.0, closure_tol=0.5, smooth=0.25):
    """Re-grid a continuous phase branch onto the lattice and close it.

    delta is interpolated monotonically (PCHIP in x = ln lam) and then
    exponentiated, so the result is exactly unimodular.  Outside the data the
    phase is tapered over ``taper`` units of x: to 0 above lambda_max and to
    the nearest multiple of pi below lambda_min.  The top needs
    |delta(lambda_max)| < pi/2, which is what the high-energy anchor of the
    branch asserts.  The low end may only be closed when
    |s(lambda_min) - 1| <= closure_tol; a symbol sitting near -1 there
    (zero-energy resonance) cannot be closed honestly.

    The closed phase is finally mollified by a Gaussian of width ``smooth``
    in x.  This is a homotopy that keeps both ends fixed, so the index is
    unchanged; it removes the C^1 joints of the interpolant and the taper,
    whose slowly decaying Fourier tails otherwise leak the kernel vectors of
    the finite section into the wrap-around band.
    Returns (s, delta) on the lattice.
    """
    x = np.log(np.asarray(lam, dtype=float))
    delta = np.asarray(delta, dtype=float)
    if x[0] - taper < -lat.X or x[-1] + taper > lat.X:
        raise ClosureError(f"lattice half width {lat.X:g} does not cover data "
                           f"[{x[0]:.3g}, {x[-1]:.3g}] plus taper {taper:g}",
                           "low" if x[0] - taper < -lat.X else "high")
    lo_gap = abs(np.exp(2j * delta[0]) - 1)
    if abs(delta[-1]) >= 0.5 * np.pi:
        raise ClosureError(f"|delta| = {abs(delta[-1]):.3g} at lambda_max is not on the "
                           "branch that vanishes at infinity", "high")
    if lo_gap > closure_tol:
        raise ClosureError(f"|s - 1| = {lo_gap:.3g} at lambda_min", "low")
    target = np.pi * np.round(delta[0] / np.pi)
    xl = lat.x
    out = np.empty_like(xl)
    mid = (xl >= x[0]) & (xl <= x[-1])
    out[mid] = PchipInterpolator(x, delta)(xl[mid])
    hi = xl > x[-1]
    out[hi] = delta[-1] * _taper((xl[hi] - x[-1]) / taper)
    lo = xl < x[0]
    out[lo] = target + (delta[0] - target) * _taper((x[0] - xl[lo]) / taper)
    if smooth > 0:
        out = gaussian_filter1d(out, smooth / lat.h, mode="nearest")
    s = np.exp(2j * out)
    _check_closed(s)
    return s, out


def _check_closed(s):
    for end, val in (("low", s[0]), ("high", s[-1])):
        if abs(val - 1) >= CLOSURE_TOL:
            raise ClosureError(f"|s - 1| = {abs(val - 1):.3g} at the {end} end of the lattice", end)


@dataclass
class FiniteSectionOperator:
    matrix: np.ndarray
    provenance: str            # "model_wave_op" | "hardy_pairing" | "plain"
    lattice: LogLattice = None
    channel: Channel = None
    basis: str = "frequency"
    xi: np.ndarray = None      # frequency of each basis vector; defaults to the lattice's

    def __post_init__(self):
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("operator has non-finite entries")

    @property
    def frequencies(self):
        return self.lattice.xi if self.xi is None else self.xi


def block_diagonal(ops, provenance=None):
    """Direct sum of lattice operators (several channels in one matrix)."""
    from scipy.linalg import block_diag
    return FiniteSectionOperator(block_diag(*[o.matrix for o in ops]),
                                 provenance or ops[0].provenance, ops[0].lattice,
                                 xi=np.concatenate([o.frequencies for o in ops]))


def _symbol_circulant(s):
    """Matrix of multiplication by s(x) in the unitary frequency basis."""
    return circulant(np.fft.fft(s) / len(s))


def model_wave_operator(s, lat, channel=None):
    s = np.asarray(s, dtype=complex)
    _check_closed(s)
    m = psi(lat.xi)[:, None] * _symbol_circulant(s - 1.0)
    m[np.diag_indices_from(m)] += 1.0
    return FiniteSectionOperator(m, "model_wave_op", lat, channel)


def hardy_pairing_operator(s, lat, channel=None, include_zero=True):
    """P S P + (Id - P).  ``include_zero=False`` moves the xi = 0 bin out of
    P, which must not change the index."""
    s = np.asarray(s, dtype=complex)
    _check_closed(s)
    p = spectral_projection_negative(lat)
    if not include_zero:
        p[lat.xi == 0] = 0.0
    m = p[:, None] * _symbol_circulant(s) * p[None, :]
    m[np.diag_indices_from(m)] += 1.0 - p
    return FiniteSectionOperator(m, "hardy_pairing", lat, channel)


@dataclass(frozen=True)
class IndexEstimate:
    dim_kernel: int
    dim_cokernel: int
    index: int
    gap_ratio: float
    determinate: bool = True
    detail: str = ""


def _small_block(sv, ceiling):
    """Number k of singular values in the cluster below ``ceiling``, cut at the
    largest relative gap, and the gap ratio sv[k] / sv[k-1] (ascending)."""
    below = np.nonzero(sv < ceiling)[0]
    if below.size == 0:
        return 0, (np.inf if sv[0] > 10 * ceiling else float(sv[0] / ceiling))
    ratios = sv[1:below[-1] + 2] / np.maximum(sv[:below[-1] + 1], 1e-300)
    j = int(np.argmax(ratios))
    return j + 1, float(ratios[j])


def estimate_index(op, ceiling=1e-4, min_gap=10.0, weight_tol=0.2):
    """dim ker - dim coker from thresholded singular values.

    For lattice operators rows that are exactly identity rows are deflated,
    and small singular vectors are attributed by their weight on
    |xi| < xi_nyquist / 2 (genuine) versus the wrap-around band (artifact).
    Plain matrices are counted as they are.
    """
    m = op.matrix
    if m.size == 0 or not np.any(m):
        d = m.shape[0]
        return IndexEstimate(d, d, 0, np.inf, True, "zero matrix")
    if op.basis != "frequency" or (op.lattice is None and op.xi is None):
        sv = np.linalg.svd(m, compute_uv=False)[::-1]
        k, gap = _small_block(sv, ceiling * sv[-1])
        sv_adj = np.linalg.svd(m.conj().T, compute_uv=False)[::-1]
        kc, gap_c = _small_block(sv_adj, ceiling * sv_adj[-1])
        gap = min(gap, gap_c)
        ok = gap > min_gap
        return IndexEstimate(k, kc, k - kc, gap, ok, "" if ok else "no spectral gap")

    # After a permutation M = [[A, B], [0, Id]] where the identity rows are
    # split off; then ker M = ker A x {0} and coker M ~ coker A exactly.
    scale = max(1.0, float(np.max(np.abs(m))))
    keep = np.max(np.abs(m - np.eye(m.shape[0])), axis=1) > 1e-14 * scale
    a = m[np.ix_(keep, keep)]
    if a.size == 0:
        return IndexEstimate(0, 0, 0, np.inf, True, "identity")
    u, sv_desc, vh = np.linalg.svd(a)
    nrm = max(1.0, float(sv_desc[0]))
    sv = sv_desc[::-1]
    k, gap = _small_block(sv, ceiling * nrm)
    if k == 0:
        ok = gap > min_gap
        return IndexEstimate(0, 0, 0, gap, ok, "" if ok else "no spectral gap")
    xi_all = op.frequencies
    low = (np.abs(xi_all) < 0.5 * np.max(np.abs(xi_all)))[keep]
    ker = vh[-k:].conj().T
    cok = u[:, -k:]
    w_ker = float(np.sum(np.abs(ker[low]) ** 2))
    w_cok = float(np.sum(np.abs(cok[low]) ** 2))
    dk, dc = int(np.round(w_ker)), int(np.round(w_cok))
    mixed = max(abs(w_ker - dk), abs(w_cok - dc))
    ok = gap > min_gap and mixed < weight_tol
    detail = f"kernel weight {w_ker:.3f}, cokernel weight {w_cok:.3f}"
    if not ok:
        detail = ("no spectral gap; " if gap <= min_gap else "unlocalised modes; ") + detail
    return IndexEstimate(dk, dc, dk - dc, gap, ok, detail)


def calibrate_sign(size=1024, X=16.0):
    """Sign c with index(hardy) = c * winding for the winding +1 fixture."""
    lat = LogLattice(X, size)
    s = synthetic_symbol(lat, 1)
    return estimate_index(hardy_pairing_operator(s, lat)).index


def synthetic_symbol(lat, w, width=1.5, center=0.0):
    """Unimodular symbol exp(2 pi i w g(x)) with g a tanh step from 0 to 1;
    its winding in increasing x is w."""
    g = 0.5 * (1.0 + np.tanh((lat.x - center) / width))
    return np.exp(2j * np.pi * w * g)


@dataclass(frozen=True)
class ChannelIndex:
    ell: int
    multiplicity: int
    model: IndexEstimate
    hardy: IndexEstimate
    winding: float
    shortcut: bool = False


def channel_indices(s, lat, ell, multiplicity, winding):
    """Model and Hardy indices for one channel symbol on the lattice.

    If sup |s - 1| < 1 both operators are invertible by a Neumann series
    (|psi| <= 1 and P is a projection), so the index is exactly 0.
    """
    if np.max(np.abs(s - 1)) < 1.0:
        zero = IndexEstimate(0, 0, 0, np.inf, True, "sup|s-1| < 1")
        return ChannelIndex(ell, multiplicity, zero, zero, winding, True)
    ch = None
    model = estimate_index(model_wave_operator(s, lat, ch))
    hardy = estimate_index(hardy_pairing_operator(s, lat, ch))
    return ChannelIndex(ell, multiplicity, model, hardy, winding)


@dataclass
class IndexReport:
    n: int
    potential_id: str
    N_eigen: int
    N_nodes: int
    winding: float
    winding_rounded: int
    model_index_total: int
    hardy_index_total: int
    flags: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        vals = {self.N_eigen, self.N_nodes, -self.winding_rounded,
                -self.model_index_total, -self.hardy_index_total}
        return len(vals) == 1 and not self.flags

    def to_dict(self):
        d = asdict(self)
        details = d.pop("details")
        d["pass"] = self.passed
        d["details"] = details
        return d

    def to_json(self, **kw):
        return json.dumps(json_safe(self.to_dict()), default=_jsonable, **kw)


def json_safe(obj):
    """Replace non-finite floats by the strings "inf", "-inf", "nan" so the
    output is strict JSON."""
    if isinstance(obj, dict):
        return {k: json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not np.isfinite(obj):
        return str(float(obj))
    return obj


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def default_lattice(grid, size=1024, taper=3.0):
    span = max(abs(np.log(grid.lambda_min)), abs(np.log(grid.lambda_max)))
    return LogLattice(max(5.0, float(np.ceil(span + taper + 1.0))), size)


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def levinson_report(V, n, energy_grid, radial_grid, lattice_sizes=(512, 1024),
                    tol=1e-3, ell_max=None, taper=3.0, workers=None):
    """N by Sturm count and by nodes, -winding of det S, and the model and
    Hardy indices summed over channels with multiplicity."""
    flags = []
    bc = count_bound_states(V, n, radial_grid)
    for ch in bc.threshold_flags:
        flags.append(f"threshold:ell={ch.ell}")
    for ch in bc.resolution_flags:
        flags.append(f"resolution:ell={ch.ell}")

    if ell_max is None:
        ell_max = channel_cutoff(V, n, energy_grid.lambda_max, tol,
                                 lambda_min=energy_grid.lambda_min)
    ell_max = max(ell_max, len(bc.per_channel) - 1)
    curves = _map(lambda ell: phase_curve(Channel(n, ell), V, energy_grid),
                  range(ell_max + 1), workers)
    wind = det_winding(UnitarySymbol.from_curves(curves, energy_grid, n))

    lats = [default_lattice(energy_grid, size, taper) for size in lattice_sizes]
    model_total = hardy_total = 0
    rows = []
    for c in curves:
        ell, mult = c.channel.ell, c.channel.multiplicity
        w_ch = float(-c.delta[0] / np.pi)
        per_size = []
        for lat in lats:
            try:
                s, _ = symbol_on_lattice(c.lam, c.delta, lat, taper)
            except ClosureError as exc:
                flags.append(f"closure:{exc.end}:ell={ell}")
                per_size = []
                break
            per_size.append(channel_indices(s, lat, ell, mult, w_ch))
        if not per_size:
            continue
        first = per_size[0]
        for lat, ci in zip(lats, per_size):
            for kind, est in (("model", ci.model), ("hardy", ci.hardy)):
                if not est.determinate:
                    flags.append(f"indeterminate:{kind}:ell={ell}:size={lat.size}")
        if any((ci.model.index, ci.hardy.index) != (first.model.index, first.hardy.index)
               for ci in per_size[1:]):
            flags.append(f"lattice_unstable:ell={ell}")
        if first.model.index != first.hardy.index:
            flags.append(f"model_hardy_mismatch:ell={ell}")
        model_total += mult * first.model.index
        hardy_total += mult * first.hardy.index
        if not first.shortcut:
            rows.append({"ell": ell, "multiplicity": mult, "winding": w_ch,
                         "model": asdict(first.model), "hardy": asdict(first.hardy),
                         "sizes": [lat.size for lat in lats]})

    details = {
        "per_channel_counts": [{"ell": ch.ell, "multiplicity": ch.multiplicity,
                                "eigen": ne, "nodes": nn} for ch, ne, nn in bc.per_channel],
        "ell_max": ell_max,
        "winding_distance": wind.distance,
        "nontrivial_index_channels": rows,
        "energy_grid": asdict(energy_grid),
        "lattice": {"X": lats[0].X, "sizes": list(lattice_sizes)},
        "index_sign": INDEX_SIGN,
    }
    return IndexReport(n, V.label, bc.total, bc.total_nodes, wind.value, wind.nearest,
                       INDEX_SIGN * model_total, INDEX_SIGN * hardy_total, flags, details)


@dataclass
class SweepRow:
    g: float
    N_eigen: int
    N_nodes: int
    winding: float
    flags: list


@dataclass
class SweepResult:
    rows: list

    @property
    def g(self):
        return np.array([r.g for r in self.rows])

    @property
    def N(self):
        return np.array([r.N_eigen for r in self.rows])

    @property
    def winding(self):
        return np.array([r.winding for r in self.rows])

    def jumps_N(self):
        return [i for i in range(1, len(self.rows)) if self.N[i] != self.N[i - 1]]

    def jumps_winding(self):
        w = np.round(self.winding)
        return [i for i in range(1, len(self.rows)) if w[i] != w[i - 1]]

    def max_winding_step(self):
        return float(np.max(np.abs(np.diff(self.winding)))) if len(self.rows) > 1 else 0.0


def _sweep_point(V, n, g, energy_grid, radial_grid, tol, ell_max):
    Vg = V.scaled(g)
    if g == 0 or Vg.is_zero:
        return SweepRow(float(g), 0, 0, 0.0, [])
    bc = count_bound_states(Vg, n, radial_grid)
    lmax = ell_max
    if lmax is None:
        lmax = channel_cutoff(Vg, n, energy_grid.lambda_max, tol,
                              lambda_min=energy_grid.lambda_min)
    lmax = max(lmax, len(bc.per_channel) - 1)
    curves = [phase_curve(Channel(n, ell), Vg, energy_grid) for ell in range(lmax + 1)]
    w = det_winding(UnitarySymbol.from_curves(curves, energy_grid, n))
    flags = [f"threshold:ell={ch.ell}" for ch in bc.threshold_flags]
    return SweepRow(float(g), bc.total, bc.total_nodes, w.value, flags)


def coupling_sweep(V, n, g_values, energy_grid, radial_grid, tol=1e-3, ell_max=None,
                   progress=None, workers=None):
    """N(g) and winding(g) along the path g -> g V."""
    g_values = np.asarray(g_values, dtype=float)
    if np.any(np.diff(g_values) <= 0):
        raise ValueError("g_values must be increasing")

    def one(g):
        row = _sweep_point(V, n, g, energy_grid, radial_grid, tol, ell_max)
        if progress:
            progress(row)
        return row

    return SweepResult(_map(one, g_values, workers))
