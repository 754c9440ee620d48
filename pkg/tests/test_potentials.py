import numpy as np
import pytest

from levindex.potentials import (TableError, build_potential, estimate_tail_exponent,
                                 gaussian_well, load_tabulated_potential, power_law_well,
                                 square_well)


def _write(tmp_path, rows):
    p = tmp_path / "v.dat"
    p.write_text("\n".join(rows) + "\n")
    return p


def test_square_well_profile():
    V = square_well(4.0, 1.0)
    assert np.allclose(V(np.array([0.5, 0.999, 1.0, 2.0])), [-4, -4, 0, 0])
    assert V.breakpoints == (1.0,)
    assert V.rho == np.inf


def test_scaled_potential():
    V = gaussian_well(2.0).scaled(3.0)
    assert V(0.0) == pytest.approx(-6.0)
    assert V.params["coupling"] == 3.0


def test_power_law_rho():
    V = power_law_well(1.0, 7.0)
    assert V.rho == 7.0
    assert V(V.r_support) == pytest.approx(-1e-9, rel=1e-6)


def test_build_potential_rejects_unknown():
    with pytest.raises(KeyError):
        build_potential("lorentzian", {})
    with pytest.raises(KeyError):
        build_potential("gaussian", {"depth": 1.0, "radius": 2.0})


def test_tabulated_matches_closed_form(tmp_path):
    r = np.linspace(0.02, 8.0, 400)
    p = _write(tmp_path, [f"{a:.10g} {-4 * np.exp(-a * a):.17g}" for a in r])
    V = load_tabulated_potential(p)
    x = np.linspace(0.05, 7.9, 333)
    assert np.max(np.abs(V(x) + 4 * np.exp(-x * x))) < 1e-4
    assert V(0.001) == pytest.approx(V(0.02))


def test_tabulated_power_tail(tmp_path):
    r = np.linspace(1.0, 20.0, 60)
    p = _write(tmp_path, ["# r V", *[f"{a} {-a ** -6.0}" for a in r]])
    V = load_tabulated_potential(p)
    assert V.rho == pytest.approx(6.0, rel=1e-6)
    assert V(40.0) == pytest.approx(-(40.0 ** -6.0), rel=1e-6)


def test_tabulated_all_zero(tmp_path):
    V = load_tabulated_potential(_write(tmp_path, [f"{a} 0" for a in (1, 2, 3, 4)]))
    assert V.is_zero


@pytest.mark.parametrize("rows, bad_row", [
    (["1 -1", "2 -0.5", "1.5 -0.2", "3 0", "4 0"], 3),
    (["1 -1", "2 -0.5", "3 abc", "4 0"], 3),
    (["1 -1", "2", "3 0", "4 0"], 2),
    (["1 -1", "2 -1", "3 nan", "4 0"], 3),
    (["-1 -1", "2 -1", "3 0", "4 0"], 1),
])
def test_table_errors_name_row(tmp_path, rows, bad_row):
    with pytest.raises(TableError) as exc:
        load_tabulated_potential(_write(tmp_path, rows))
    assert exc.value.row == bad_row
    assert f"row {bad_row}" in str(exc.value)


def test_tail_exponent_zero_tail():
    r = np.arange(1.0, 10.0)
    assert estimate_tail_exponent(r, np.zeros_like(r)) == np.inf
