import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ridg.errors import BracketError, DomainError
from ridg.linear_predictor import Scheme
from ridg.stability import (StabilityReport, UpdateSymbol, amplification_1d, amplification_md, max_cfl, omega_grid,
                            stability_function, stability_scan_2d, write_reports_csv, write_scan_csv)


@given(st.sampled_from(list(Scheme)), st.integers(0, 4), st.floats(0.0, 1.5), st.floats(0.0, 2 * np.pi))
def test_closed_form_matches_symbol(scheme, m, nu, omega):
    a = amplification_1d(scheme, m, nu, omega)
    b = amplification_md(scheme, m, (nu,), (omega,))
    assert np.abs(a - b).max() < 1e-12


def test_amplification_rejects_negative_nu():
    with pytest.raises(DomainError):
        amplification_1d("lidg", 1, -0.1, 0.0)


@pytest.mark.parametrize("scheme", list(Scheme))
@pytest.mark.parametrize("m", [0, 2])
def test_zero_mode_is_identity(scheme, m):
    M = amplification_md(scheme, m, (0.4, 0.3), (0.0, 0.0))
    # the mean is conserved exactly
    assert abs(M[0, 0] - 1.0) < 1e-13 and np.allclose(M[0, 1:], 0.0, atol=1e-13)


def test_zero_cfl_is_identity():
    assert abs(stability_function("ridg", 3, (0.0,), 101)) < 1e-13


def test_upwind_m0_amplification():
    nu, w = 0.7, 1.3
    M = amplification_1d("lidg", 0, nu, w)
    assert M[0, 0] == pytest.approx(1 - nu + nu * np.exp(-1j * w))


def test_ridg_m0_amplification_closed_form():
    # Q_i - nu (W_i - W_{i-1}) with W_i = (Q_i + nu Q_{i-1}) / (1 + nu)
    nu, w = 0.8, 2.1
    z = np.exp(-1j * w)
    expect = 1 - nu * (1 + nu * z) * (1 - z) / (1 + nu)
    assert amplification_1d("ridg", 0, nu, w)[0, 0] == pytest.approx(expect)


def test_omega_grid_half_and_full_agree():
    sym = UpdateSymbol("ridg", 1, (0.9, 0.6))
    half = sym.spectral_radius(omega_grid(2, 31, half=True)).max()
    full = sym.spectral_radius(omega_grid(2, 31, half=False)).max()
    assert half == pytest.approx(full, abs=1e-12)


def test_omega_grid_shape():
    assert omega_grid(1, 11).shape == (6, 1)
    assert omega_grid(2, 11, half=False).shape == (121, 2)
    with pytest.raises(DomainError):
        omega_grid(1, 1)


def test_max_cfl_lidg_m0():
    rep = max_cfl("lidg", 0, 1, resolution=401)
    assert rep.max_cfl == pytest.approx(1.0, abs=2e-3)
    assert rep.bracket[0] <= rep.max_cfl <= rep.bracket[1]


def test_max_cfl_is_stable_edge():
    rep = max_cfl("lidg", 2, 1, resolution=801, tol=1e-4)
    assert stability_function("lidg", 2, (rep.bracket[0],), 801) <= rep.epsilon
    assert stability_function("lidg", 2, (rep.bracket[1],), 801) > rep.epsilon


def test_ridg_weak_growth_hump():
    # m=5 RIDG has a shallow band of weak growth below the sharp stability edge
    assert stability_function("ridg", 5, (1.0,), 2001) > 5e-4
    assert stability_function("ridg", 5, (1.04,), 2001) <= 5e-4
    first = max_cfl("ridg", 5, 1, root="first").max_cfl
    largest = max_cfl("ridg", 5, 1).max_cfl
    assert first < 1.0 < largest


def test_bracket_error():
    with pytest.raises(BracketError) as info:
        max_cfl("lidg", 1, 1, bracket=(0.0, 0.2), resolution=201)
    assert info.value.f_hi <= 5e-4


def test_bad_arguments():
    with pytest.raises(DomainError):
        max_cfl("lidg", 1, 2, direction=(0.0, 0.0))
    with pytest.raises(DomainError):
        max_cfl("lidg", 1, 1, root="middle")
    with pytest.raises(ValueError):
        max_cfl("rkdg", 1, 1)


def test_direction_normalised():
    rep = max_cfl("lidg", 0, 2, direction=(2.0, 2.0), resolution=41, tol=5e-3)
    assert rep.direction == (1.0, 1.0)
    assert rep.max_cfl == pytest.approx(0.5, abs=1e-2)


def test_csv_outputs(tmp_path):
    rep = StabilityReport("lidg", 0, 1, (1.0,), 1.0, 5e-4, 11)
    p = tmp_path / "r.csv"
    write_reports_csv(p, [rep])
    rows = list(csv.reader(open(p)))
    assert tuple(rows[0]) == StabilityReport.CSV_HEADER
    assert float(rows[1][4]) == 1.0
    grid = np.array([0.0, 0.1])
    vals = stability_scan_2d("lidg", 0, grid, grid, resolution=11)
    assert vals.shape == (2, 2) and vals[0, 0] == pytest.approx(1.0)
    q = tmp_path / "s.csv"
    write_scan_csv(q, grid, grid, vals)
    rows = list(csv.reader(open(q)))
    assert rows[0] == ["nu_x", "nu_y", "f_plus_1"] and len(rows) == 5
