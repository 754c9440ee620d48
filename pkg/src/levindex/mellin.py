"""Dilation calculus on the half-line in the log coordinate x = ln(lambda).

The unitary [W f](lam) = lam^{-1/2} f(ln lam) carries L^2(R, dx) onto
L^2(R+, d lam) and turns the dilation generator into -i d/dx, so any bounded
function g of the generator acts as the Fourier multiplier g(xi).  On a
finite lattice this is an FFT on a circle of circumference 2X (periodic
finite section).

Frequency convention: numpy ``fftfreq`` order scaled by 2 pi, so a basis
vector e_j in frequency space is the plane wave exp(i xi_j x).  The Nyquist
bin is on the negative side (``fftfreq`` returns -1/(2h) there).
"""

from dataclasses import dataclass

import numpy as np


def _tanh_sech(z):
    z = np.asarray(z, dtype=float)
    # sech overflows as cosh does; 1/cosh(700) is already 0 in double
    return np.tanh(z), 1.0 / np.cosh(np.clip(z, -700.0, 700.0))


def phi(x):
    """phi(x) = (1 + tanh(pi x) - i sech(pi x)) / 2."""
    t, s = _tanh_sech(np.pi * np.asarray(x, dtype=float))
    out = 0.5 * (1.0 + t - 1j * s)
    return complex(out) if np.ndim(out) == 0 else out


def psi(x):
    """psi(x) = (1 - tanh(2 pi x) - i sech(2 pi x)) / 2 = phi(-2x)."""
    t, s = _tanh_sech(2.0 * np.pi * np.asarray(x, dtype=float))
    out = 0.5 * (1.0 - t - 1j * s)
    return complex(out) if np.ndim(out) == 0 else out


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class LogLattice:
    """Periodic lattice x_m = -X + m h, h = 2X/size, on x = ln(lambda)."""

    X: float
    size: int

    def __post_init__(self):
        if not np.isfinite(self.X) or self.X < 5:
            raise LatticeError(f"half width X must be >= 5, got {self.X}")
        if self.size < 256 or self.size & (self.size - 1):
            raise LatticeError(f"size must be a power of two >= 256, got {self.size}")

    @property
    def h(self):
        return 2.0 * self.X / self.size

    @property
    def x(self):
        return -self.X + self.h * np.arange(self.size)

    @property
    def lam(self):
        return np.exp(self.x)

    @property
    def xi(self):
        return lattice_frequencies(self)

    def refined(self):
        return LogLattice(self.X, 2 * self.size)


def lattice_frequencies(lat):
    return 2.0 * np.pi * np.fft.fftfreq(lat.size, d=lat.h)


def w_map(lat, f):
    """[W f](lam_m) = lam_m^{-1/2} f(x_m) on the geometric grid lam_m = e^{x_m}."""
    return np.exp(-0.5 * lat.x) * np.asarray(f)


def w_map_inverse(lat, g):
    """[W* g](x_m) = e^{x_m/2} g(e^{x_m})."""
    return np.exp(0.5 * lat.x) * np.asarray(g)


def apply_multiplier(sym, lat, f):
    """g(D) f for the dilation generator D: FFT, multiply by sym(xi), inverse."""
    f = np.asarray(f)
    vals = sym(lat.xi) if callable(sym) else np.asarray(sym)
    return np.fft.ifft(vals * np.fft.fft(f))


def spectral_projection_negative(lat):
    """Indicator of xi <= 0 at the lattice frequencies (xi = 0 and the
    Nyquist bin included)."""
    return (lat.xi <= 0).astype(float)
