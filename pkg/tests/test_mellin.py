import numpy as np
import pytest
from hypothesis import given, strategies as st

from levindex.mellin import (LatticeError, LogLattice, apply_multiplier, lattice_frequencies,
                             phi, psi, spectral_projection_negative, w_map, w_map_inverse)

LAT = LogLattice(20.0, 1024)


def test_phi_psi_values():
    assert phi(0.0) == pytest.approx(0.5 - 0.5j, abs=1e-15)
    assert psi(0.0) == pytest.approx(0.5 - 0.5j, abs=1e-15)
    assert abs(phi(20.0) - 1) < 1e-12 and abs(phi(-20.0)) < 1e-12
    assert abs(psi(20.0)) < 1e-12
    assert abs(phi(1.0)) ** 2 == pytest.approx(0.5 * (1 + np.tanh(np.pi)), abs=1e-14)


def test_phi_overflow_safe():
    with np.errstate(all="raise"):
        v = phi(np.array([-1e6, -400.0, 400.0, 1e6]))
    assert np.allclose(v, [0, 0, 1, 1])


@pytest.mark.parametrize("x", [0.3, -0.3, 2.0, -2.0, 7.0, -7.0])
def test_psi_is_phi_of_minus_two_x(x):
    assert abs(psi(x) - phi(-2 * x)) < 1e-15


@given(st.floats(-20, 20))
def test_modulus_identity(x):
    assert abs(abs(phi(x)) ** 2 - 0.5 * (1 + np.tanh(np.pi * x))) < 1e-12


def test_lattice_validation():
    with pytest.raises(LatticeError):
        LogLattice(4.0, 512)
    with pytest.raises(LatticeError):
        LogLattice(8.0, 128)
    with pytest.raises(LatticeError):
        LogLattice(8.0, 1000)
    lat = LogLattice(8.0, 512)
    assert lat.h == pytest.approx(16 / 512)
    assert lat.refined().size == 1024


def test_frequency_convention():
    xi = lattice_frequencies(LAT)
    assert xi[0] == 0 and xi[1] > 0
    # Nyquist bin on the negative side
    assert xi[LAT.size // 2] == pytest.approx(-np.pi / LAT.h)
    p = spectral_projection_negative(LAT)
    assert p[0] == 1 and p[LAT.size // 2] == 1 and p[1] == 0


def test_w_map():
    one = np.ones(LAT.size)
    assert np.allclose(w_map(LAT, one), LAT.lam ** -0.5)
    f = np.random.default_rng(1).normal(size=LAT.size)
    assert np.max(np.abs(w_map_inverse(LAT, w_map(LAT, f)) - f)) < 1e-13
    # unitarity with the measure d lambda = lambda dx
    g = w_map(LAT, f)
    lhs = np.sum(np.abs(g) ** 2 * LAT.lam) * LAT.h
    rhs = np.sum(f**2) * LAT.h
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_apply_multiplier_identity_and_derivative():
    f = np.exp(-LAT.x**2)
    assert np.max(np.abs(apply_multiplier(lambda xi: np.ones_like(xi), LAT, f) - f)) < 1e-13
    got = apply_multiplier(lambda xi: xi, LAT, f)
    assert np.max(np.abs(got - (-1j) * (-2 * LAT.x * f))) < 1e-6


def test_phi_partition():
    f = np.exp(-LAT.x**2) * np.cos(3 * LAT.x)
    a = apply_multiplier(phi, LAT, f)
    b = apply_multiplier(lambda xi: 1 - phi(xi), LAT, f)
    assert np.max(np.abs(a + b - f)) < 1e-12


def test_multipliers_commute_and_are_linear():
    rng = np.random.default_rng(7)
    f, g = rng.normal(size=(2, LAT.size))
    ab = apply_multiplier(phi, LAT, apply_multiplier(psi, LAT, f))
    ba = apply_multiplier(psi, LAT, apply_multiplier(phi, LAT, f))
    assert np.max(np.abs(ab - ba)) < 1e-12
    lin = apply_multiplier(phi, LAT, 2 * f - 3 * g)
    assert np.max(np.abs(lin - 2 * apply_multiplier(phi, LAT, f)
                         + 3 * apply_multiplier(phi, LAT, g))) < 1e-12


def test_projection():
    p = spectral_projection_negative(LAT)
    rng = np.random.default_rng(2)
    f = rng.normal(size=LAT.size) + 1j * rng.normal(size=LAT.size)
    once = apply_multiplier(p, LAT, f)
    assert np.max(np.abs(apply_multiplier(p, LAT, once) - once)) < 1e-13
    rest = f - once
    assert np.linalg.norm(once) ** 2 + np.linalg.norm(rest) ** 2 == pytest.approx(
        np.linalg.norm(f) ** 2, rel=1e-12)
    pos = np.exp(1j * LAT.xi[5] * LAT.x)
    assert np.max(np.abs(apply_multiplier(p, LAT, pos))) < 1e-12
