import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from levindex.specfun import (DomainError, riccati_bessel_irregular, riccati_bessel_regular,
                              riccati_derivatives, riccati_log_derivatives)


def test_half_order_closed_forms():
    assert riccati_bessel_regular(0.5, np.pi / 2) == pytest.approx(1.0, abs=1e-14)
    assert riccati_bessel_irregular(0.5, np.pi) == pytest.approx(-1.0, abs=1e-14)
    x = np.linspace(0.01, 100, 2000)
    assert np.max(np.abs(riccati_bessel_regular(0.5, x) - np.sin(x))) < 1e-12
    assert np.max(np.abs(riccati_bessel_irregular(0.5, x) - np.cos(x))) < 1e-12


@pytest.mark.parametrize("nu, x", [(2.5, 10.0), (0.0, 5.0), (1.0, 0.3), (7.5, 3.0), (4.0, 40.0)])
def test_against_mpmath(nu, x):
    assert riccati_bessel_regular(nu, x) == pytest.approx(oracles.riccati_S(nu, x), rel=1e-10)
    assert riccati_bessel_irregular(nu, x) == pytest.approx(oracles.riccati_C(nu, x), rel=1e-10)
    ds, dc = riccati_derivatives(nu, x)
    assert ds == pytest.approx(oracles.riccati_dS(nu, x), rel=1e-9, abs=1e-12)
    assert dc == pytest.approx(oracles.riccati_dC(nu, x), rel=1e-9, abs=1e-12)


def test_derivative_matches_finite_difference():
    h = 1e-6
    fd = (riccati_bessel_regular(0.5, 1 + h) - riccati_bessel_regular(0.5, 1 - h)) / (2 * h)
    assert riccati_derivatives(0.5, 1.0)[0] == pytest.approx(fd, abs=1e-7)


@given(st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.5, 5.0]),
       st.floats(0.1, 50.0))
def test_wronskian(nu, x):
    s, c = riccati_bessel_regular(nu, x), riccati_bessel_irregular(nu, x)
    ds, dc = riccati_derivatives(nu, x)
    assert abs(s * dc - ds * c + 1.0) < 1e-10 * max(1.0, abs(c * ds))


@given(st.floats(0.0, 5.0), st.floats(50.0, 500.0))
def test_large_argument_phase(nu, x):
    # leading correction is (nu^2 - 1/4) / (2x) times the quadrature partner
    ph = x - nu * np.pi / 2 + np.pi / 4
    bound = abs(nu * nu - 0.25) / (2 * x) * 1.01 + 1e-3
    assert abs(riccati_bessel_regular(nu, x) - np.sin(ph)) <= bound
    assert abs(riccati_bessel_irregular(nu, x) - np.cos(ph)) <= bound


@given(st.floats(0.0, 1.0), st.floats(50.0, 500.0))
def test_large_argument_phase_low_order(nu, x):
    ph = x - nu * np.pi / 2 + np.pi / 4
    assert abs(riccati_bessel_regular(nu, x) - np.sin(ph)) <= 0.02
    assert abs(riccati_bessel_irregular(nu, x) - np.cos(ph)) <= 0.02


def test_large_argument_correction_is_real():
    # the deviation at nu = 5, x = 50 is about 0.12, set by the functions themselves
    nu, x = 5.0, 50.0
    ph = x - nu * np.pi / 2 + np.pi / 4
    dev = max(abs(oracles.riccati_S(nu, x) - np.sin(ph)), abs(oracles.riccati_C(nu, x) - np.cos(ph)))
    assert dev > 0.05


def test_vectorised_shapes():
    x = np.array([0.5, 1.0, 2.0])
    assert riccati_bessel_regular(1.5, x).shape == (3,)
    assert isinstance(riccati_bessel_regular(1.5, 2.0), float)


def test_log_derivatives_consistent():
    nu, x = 3.5, 2.0
    ratio, ls, lc = riccati_log_derivatives(nu, x)
    s, c = riccati_bessel_regular(nu, x), riccati_bessel_irregular(nu, x)
    ds, dc = riccati_derivatives(nu, x)
    assert ratio == pytest.approx(s / c, rel=1e-12)
    assert ls == pytest.approx(ds / s, rel=1e-12)
    assert lc == pytest.approx(dc / c, rel=1e-12)


@pytest.mark.parametrize("nu, x", [(-1.0, 1.0), (0.5, 0.0), (0.5, -2.0), (np.nan, 1.0), (1.0, np.inf)])
def test_domain_errors(nu, x):
    with pytest.raises(DomainError):
        riccati_bessel_regular(nu, x)
    with pytest.raises(DomainError):
        riccati_derivatives(nu, x)
