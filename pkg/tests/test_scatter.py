import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from levindex.channels import Channel
from levindex.potentials import gaussian_well, square_well, zero_potential
from levindex.scatter import (AnchorError, EnergyGrid, RefinementError, UnitarySymbol,
                              absolute_phase_shift, bessel_phase, det_path_winding,
                              det_winding, export_csv, phase_curve,
                              phase_shift, scattering_symbol, threshold_check,
                              threshold_norms, unwrap_from_top)

CRITICAL = (np.pi / 2) ** 2


def _mod_pi(d):
    return (d + np.pi / 2) % np.pi - np.pi / 2


def test_energy_grid_validation():
    with pytest.raises(ValueError):
        EnergyGrid(1.0, 0.5, 128)
    with pytest.raises(ValueError):
        EnergyGrid(1e-4, 1.0, 10)
    g = EnergyGrid(1e-4, 1.0, 64)
    assert g.lam[0] == pytest.approx(1e-4) and g.lam[-1] == pytest.approx(1.0)
    assert np.allclose(np.diff(np.log(g.lam)), np.log(1e4) / 63)


def test_free_phases_vanish():
    lam = np.geomspace(1e-3, 1e2, 20)
    for ell in range(4):
        assert np.all(phase_shift(Channel(3, ell), zero_potential(), lam) == 0)


def test_square_well_closed_form():
    lam = np.geomspace(0.01, 100.0, 400)
    d = phase_shift(Channel(3, 0), square_well(4.0, 1.0), lam)
    ref = oracles.square_well_s_wave_phase(4.0, 1.0, lam)
    assert np.max(np.abs(_mod_pi(d - ref))) < 1e-6
    assert abs(_mod_pi(phase_shift(Channel(3, 0), square_well(4.0, 1.0), 1.0)
                       - oracles.square_well_s_wave_phase(4.0, 1.0, 1.0))) < 1e-6


@pytest.mark.parametrize("n, ell, lam", [(3, 0, 0.05), (3, 1, 1.0), (3, 2, 20.0),
                                         (2, 0, 0.3), (2, 1, 2.0), (4, 0, 1.0), (5, 2, 5.0)])
def test_gaussian_against_variable_phase(n, ell, lam):
    V = gaussian_well(8.0, 1.0)
    ch = Channel(n, ell)
    ref = oracles.variable_phase(ch.nu, V, lam, 8.0)
    got = phase_shift(ch, V, lam)
    assert abs(_mod_pi(got - ref)) < 1e-6


@pytest.mark.parametrize("n, ell, lam", [(3, 0, 0.05), (3, 0, 3.0), (3, 1, 0.2), (2, 0, 0.3),
                                         (4, 1, 1.0)])
def test_absolute_phase_against_variable_phase(n, ell, lam):
    # the variable-phase solution is continuous in r, so it carries the
    # multiple of pi as well
    V = gaussian_well(8.0, 1.0)
    ch = Channel(n, ell)
    ref = oracles.variable_phase(ch.nu, V, lam, 8.0)
    assert absolute_phase_shift(ch, V, lam) == pytest.approx(ref, abs=1e-6)


def test_absolute_phase_counts_bound_states():
    lam = np.array([1e-8, 1e-6])
    d = absolute_phase_shift(Channel(3, 0), square_well(25.0, 1.0), lam)
    assert np.allclose(d / np.pi, 2.0, atol=0.01)
    assert np.all(np.abs(absolute_phase_shift(Channel(3, 0), gaussian_well(-3.0), lam)) < 0.01)


@pytest.mark.parametrize("nu", [0.0, 0.5, 2.0, 7.5, 40.0])
def test_bessel_phase(nu):
    x = np.linspace(0.05, 3 * nu + 60, 5000)
    th = bessel_phase(nu, x)
    assert np.all(np.diff(th) > 0)
    m = np.hypot(oracles.riccati_S(nu, 30.0), oracles.riccati_C(nu, 30.0))
    t30 = bessel_phase(nu, 30.0)
    assert m * np.sin(t30) == pytest.approx(oracles.riccati_S(nu, 30.0), abs=1e-10)
    assert m * np.cos(t30) == pytest.approx(oracles.riccati_C(nu, 30.0), abs=1e-10)
    far = x > 20 * max(nu, 1) ** 2
    assert np.all(np.abs(th[far] - (x[far] - nu * np.pi / 2 + np.pi / 4)) < 0.05)


def test_narrow_resonance_not_aliased():
    # z = sqrt(V0) a = 4.48 sits just below the d-wave binding threshold
    # (tan z = z): a d-wave resonance at lambda ~ 2.8e-4, narrower than the
    # grid spacing; sampled modulo pi it looks like a harmless step
    V = square_well((4.48 / 16) ** 2, 16.0)
    grid = EnergyGrid(1e-4, 1.0, 256)
    c = phase_curve(Channel(3, 2), V, grid)
    assert len(c.lam) > grid.points
    assert abs(c.delta[0]) < 0.01
    assert c.delta.max() > 2.5
    assert np.all(np.abs(np.diff(c.delta)) < np.pi / 4)


def test_high_energy_decay():
    V = gaussian_well(2.0, 1.0)
    lam = np.array([1e2, 1e3, 1e4])
    d = np.abs(phase_shift(Channel(3, 0), V, lam))
    # delta ~ C / k: the products d * k stay bounded while d falls
    assert np.all(np.diff(d) < 0)
    prod = d * np.sqrt(lam)
    assert prod.max() / prod.min() < 1.5


def test_sign_flip_attractive_repulsive():
    lam = np.geomspace(0.1, 10, 8)
    for ell in (0, 1, 2):
        ch = Channel(3, ell)
        att = phase_shift(ch, gaussian_well(0.3), lam)
        rep = phase_shift(ch, gaussian_well(-0.3), lam)
        assert np.all(att > 0) and np.all(rep < 0)


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=40))
def test_unwrap_from_top_is_a_branch(values):
    theta = np.array(values)
    reps = _mod_pi(theta)
    out = unwrap_from_top(reps)
    assert np.allclose(_mod_pi(out - reps), 0, atol=1e-9)
    assert out[-1] == reps[-1]
    assert np.all(np.abs(np.diff(out)) <= np.pi / 2 + 1e-9)


def test_phase_curve_square_well_levinson():
    grid = EnergyGrid(1e-4, 100.0, 128)
    c = phase_curve(Channel(3, 0), square_well(4.0, 1.0), grid)
    # delta(0) - delta(inf) = pi with delta(inf) = 0 on the anchored branch
    assert c.delta[0] == pytest.approx(np.pi, abs=0.05)
    assert abs(c.delta[-1]) < np.pi / 2
    assert np.all(np.abs(np.diff(c.delta)) < np.pi / 4)
    assert c.anchor["rule"] == "delta(inf)=0"


def test_phase_curve_refines_sharp_resonance():
    # d-wave well just short of binding: a narrow resonance the coarse grid misses
    V = square_well(19.4, 1.0)
    grid = EnergyGrid(1e-2, 100.0, 64)
    c = phase_curve(Channel(3, 2), V, grid)
    assert len(c.lam) > 64
    assert np.all(np.abs(np.diff(c.delta)) < np.pi / 4)
    with pytest.raises(RefinementError) as exc:
        phase_curve(Channel(3, 2), V, grid, max_step=1e-4, max_refine=1)
    lo, hi = exc.value.interval
    assert lo < hi


def test_anchor_error_for_low_lambda_max():
    with pytest.raises(AnchorError):
        phase_curve(Channel(3, 0), gaussian_well(50.0, 2.0), EnergyGrid(1e-4, 1.0, 64))


def test_square_well_winding():
    sym = scattering_symbol(square_well(4.0, 1.0), 3, EnergyGrid(1e-4, 100.0, 256))
    w = det_winding(sym)
    assert w.value == pytest.approx(-1.0, abs=0.05)
    assert w.nearest == -1
    assert sym.max_unitarity_defect() < 1e-12


def test_synthetic_winding_from_samples():
    lam = np.geomspace(1e-3, 1e3, 400)
    x = np.log(lam)
    # delta goes from -3 pi at lambda_min to 0 at lambda_max
    delta = -3 * np.pi * 0.5 * (1 - np.tanh(x / 1.5)) / (0.5 * (1 - np.tanh(x[0] / 1.5)))
    delta -= delta[-1]
    delta *= -3 * np.pi / delta[0]
    sym = UnitarySymbol.from_samples(lam, np.exp(2j * delta)[None, :])
    assert det_winding(sym).value == pytest.approx(3.0, abs=1e-10)


def test_det_path_winding_diagonal_matches():
    lam = np.geomspace(1e-2, 1e2, 300)
    t = np.linspace(0, 1, lam.size)
    mats = [np.diag([np.exp(2j * np.pi * 2 * s), np.exp(-2j * np.pi * s)]) for s in t]
    assert det_path_winding(lam, mats) == pytest.approx(1.0, abs=1e-9)


def test_threshold_check_free_and_critical():
    grid = EnergyGrid(1e-4, 100.0, 128)
    free = threshold_check(scattering_symbol(zero_potential(), 3, grid))
    assert free.low_deviation == 0 and free.high_deviation == 0
    crit = threshold_check(scattering_symbol(square_well(CRITICAL, 1.0), 3, grid))
    assert crit.low_deviation > 1.8


def test_threshold_norms_decrease_at_low_energy():
    V = gaussian_well(0.098, 12.0)
    out = threshold_norms(V, 3, [1e-5, 1e-4])
    assert out[0] < out[1] < 0.05


def test_export_csv(tmp_path):
    sym = scattering_symbol(square_well(4.0, 1.0), 3, EnergyGrid(1e-2, 100.0, 64), ell_max=1)
    path = tmp_path / "phases.csv"
    export_csv(sym, path)
    rows = list(csv.DictReader(open(path)))
    assert {r["channel"] for r in rows} == {"0", "1"}
    r0 = rows[0]
    z = complex(float(r0["re_s"]), float(r0["im_s"]))
    assert abs(z - np.exp(2j * float(r0["delta"]))) < 1e-10
