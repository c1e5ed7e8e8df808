import numpy as np
import pytest

from ridg.advection import PROBLEMS, advance, check_finite, dt_for_cfl, run_advection, time_steps
from ridg.basis import spatial_spec
from ridg.errors import BlowUpError, DomainError
from ridg.mesh import CoeffField, Mesh, project, total_mass


def test_time_steps_clamp_and_uniform():
    s = time_steps(0.3, 1.0)
    assert len(s) == 4 and s[-1] == pytest.approx(0.1) and sum(s) == pytest.approx(1.0)
    u = time_steps(0.3, 1.0, "uniform")
    assert len(u) == 4 and all(x == pytest.approx(0.25) for x in u)
    assert time_steps(0.25, 1.0) == [0.25] * 4
    with pytest.raises(DomainError):
        time_steps(0.1, 1.0, "other")


def test_dt_for_cfl():
    assert dt_for_cfl(0.9, (1.0, 2.0), (0.1, 0.1)) == pytest.approx(0.045)
    with pytest.raises(DomainError):
        dt_for_cfl(0.9, (0.0,), (0.1,))


def test_exact_is_periodic_translate():
    p = PROBLEMS["advection1d"]
    x = np.linspace(-1, 1, 9)
    assert np.allclose(p.exact(2.0)(x), p.initial(x))
    assert np.allclose(p.exact(0.25)(x), p.initial(x - 0.25), atol=1e-12)


def test_constant_advects_unchanged():
    mesh = Mesh.uniform(6, -1.0, 1.0, 2)
    fld = CoeffField.constant(mesh, spatial_spec(2, 2), 3.0)
    out = advance(fld, "ridg", (1.0, 1.0), time_steps(0.1, 0.5))
    assert np.abs(out.coeffs - fld.coeffs).max() < 1e-12


def test_mass_conserved_over_run():
    p = PROBLEMS["advection1d"]
    mesh = p.mesh(20)
    fld = project(lambda x: 1 + np.sin(np.pi * x), mesh, spatial_spec(3, 1))
    out = advance(fld, "lidg", (1.0,), time_steps(0.005, 0.2))
    assert abs(total_mass(out) - total_mass(fld)) < 1e-12


def test_blowup_detected():
    mesh = Mesh.uniform(4, 0, 1)
    fld = CoeffField(mesh, spatial_spec(0, 1), np.full((4, 1), 1e11))
    with pytest.raises(BlowUpError):
        check_finite(fld, 1)


def test_unstable_cfl_blows_up():
    with pytest.raises(BlowUpError):
        run_advection("advection1d", "lidg", 3, 40, 0.5, final_time=20.0)


def test_run_advection_small():
    r = run_advection("advection1d", "ridg", 3, 80, 0.9)
    assert r.n_steps == 89
    assert r.errors[1] == pytest.approx(3.6e-3, rel=0.1)
