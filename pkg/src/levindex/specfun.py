"""Riccati-Bessel functions of real order.

    S_nu(x) =  sqrt(pi x / 2) J_nu(x)   ~ sin(x - nu pi/2 + pi/4)
    C_nu(x) = -sqrt(pi x / 2) Y_nu(x)   ~ cos(x - nu pi/2 + pi/4)

With this normalisation S C' - S' C = -1.  Even dimensions give integer
orders, odd dimensions half-integer orders, so real order is required.

Evaluation is delegated to the Amos/Cephes routines in ``scipy.special``
(series near the origin, Debye/Hankel asymptotics at large argument,
recurrence in between; integer-order Y via the limiting form).  Accuracy is
near machine precision for nu <= 50 and 1e-3 <= x <= 1e4.
"""

import numpy as np
from scipy import special


class DomainError(ValueError):
    """Raised for arguments outside the domain of a special function."""


def _check(nu, x):
    nu = np.asarray(nu, dtype=float)
    x = np.asarray(x, dtype=float)
    if not (np.all(np.isfinite(nu)) and np.all(np.isfinite(x))):
        raise DomainError("non-finite order or argument")
    if np.any(nu < 0):
        raise DomainError(f"order must be non-negative, got {nu}")
    if np.any(x <= 0):
        raise DomainError("argument must be positive")
    return nu, x


def _out(a):
    return float(a) if np.ndim(a) == 0 else a


def riccati_bessel_regular(nu, x):
    nu, x = _check(nu, x)
    return _out(np.sqrt(0.5 * np.pi * x) * special.jv(nu, x))


def riccati_bessel_irregular(nu, x):
    nu, x = _check(nu, x)
    return _out(-np.sqrt(0.5 * np.pi * x) * special.yv(nu, x))


def riccati_derivatives(nu, x):
    """Return ``(S'_nu(x), C'_nu(x))``."""
    nu, x = _check(nu, x)
    rx = np.sqrt(x)
    c = np.sqrt(0.5 * np.pi)
    ds = c * (special.jv(nu, x) / (2 * rx) + rx * special.jvp(nu, x))
    dc = -c * (special.yv(nu, x) / (2 * rx) + rx * special.yvp(nu, x))
    return _out(ds), _out(dc)


def riccati_log_derivatives(nu, x):
    """Return ``(S/C, S'/S, C'/C)`` in an underflow-safe form.

    For large order and small argument S underflows and C overflows; the
    ratios stay finite and are what the phase-shift matching actually needs.
    """
    nu, x = _check(nu, x)
    nu, x = np.broadcast_arrays(nu, x)
    with np.errstate(all="ignore"):
        j = special.jv(nu, x)
        y = special.yv(nu, x)
        ratio = -j / y
        ls = 0.5 / x + special.jvp(nu, x) / j
        lc = 0.5 / x + special.yvp(nu, x) / y
    # small-argument limits: J ~ x^nu, Y ~ -x^-nu
    tiny = ~np.isfinite(ratio) | ~np.isfinite(ls) | ~np.isfinite(lc)
    if np.any(tiny):
        ratio = np.where(np.isfinite(ratio), ratio, 0.0)
        ls = np.where(np.isfinite(ls), ls, (nu + 0.5) / x)
        lc = np.where(np.isfinite(lc), lc, (0.5 - nu) / x)
    return _out(ratio), _out(ls), _out(lc)
