"""Reference Runge-Kutta DG (classical RK4 in time) for scalar conservation laws."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .basis import basis_eval, face_rule, gauss_rule
from .burgers import _check_fluxes, rusanov_flux
from .errors import DomainError
from .mesh import CoeffField

# Butcher tableau of the classical fourth-order method
RK4_A = ((), (0.5,), (0.0, 0.5), (0.0, 0.0, 1.0))
RK4_B = (1 / 6, 1 / 3, 1 / 3, 1 / 6)


@lru_cache(maxsize=None)
def _spatial_data(spec):
    d = spec.m_dim
    n = (3 * spec.m_deg) // 2 + 2  # exact for quadratic fluxes in the volume
    rule = gauss_rule(n, d)
    phi = basis_eval(spec, rule.nodes)
    dphi = [basis_eval(spec, rule.nodes, deriv_axis=a) for a in range(d)]
    faces = []
    for a in range(d):
        if d == 1:
            fp, fm = np.array([[1.0]]), np.array([[-1.0]])
            w = np.array([1.0])
        else:
            rp, rm = face_rule(n, d, a, 1.0), face_rule(n, d, a, -1.0)
            fp, fm, w = rp.nodes, rm.nodes, rp.weights
        faces.append((basis_eval(spec, fp), basis_eval(spec, fm), w))
    return phi, dphi, rule.weights, faces


def dg_rhs(fld: CoeffField, fluxes) -> np.ndarray:
    """Semi-discrete DG right-hand side ``dQ/dt`` with Rusanov interface fluxes.

    The orthonormal basis has an identity mass matrix (after the ``2**-d``
    normalisation), so no mass solve is needed.
    """
    d = fld.mesh.m_dim
    fluxes = _check_fluxes(fluxes, d)
    phi, dphi, w, faces = _spatial_data(fld.spec)
    Q = fld.coeffs
    c = 0.5**d
    q = Q @ phi.T
    out = np.zeros_like(Q)
    for a, (fl, h) in enumerate(zip(fluxes, fld.mesh.widths)):
        bp, bm, fw = faces[a]
        F = rusanov_flux(Q @ bp.T, np.roll(Q, -1, axis=a) @ bm.T, fl) * fw
        surf = np.roll(F, 1, axis=a) @ bm - F @ bp
        out += (2.0 / h) * c * ((fl.f(q) * w) @ dphi[a] + surf)
    return out


def rk4_step(rhs, y, dt: float):
    """One step of the explicit Runge-Kutta method given by ``RK4_A``/``RK4_B``."""
    stages = []
    for a_row in RK4_A:
        stages.append(rhs(y + dt * sum((a * k for a, k in zip(a_row, stages)), 0.0 * y)))
    return y + dt * sum(b * k for b, k in zip(RK4_B, stages))


def rkdg_step(fld: CoeffField, dt: float, fluxes) -> CoeffField:
    """One classical RK4 step of the method of lines."""
    if dt <= 0:
        raise DomainError("dt must be positive")
    return fld.with_coeffs(rk4_step(lambda Q: dg_rhs(fld.with_coeffs(Q), fluxes), fld.coeffs, dt))


