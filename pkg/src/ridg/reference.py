"""Velocity-independent reference-element integrals of the spacetime schemes.

Every predictor and corrector matrix is a linear combination of the integrals
collected here with coefficients built from the CFL numbers, so these are
computed once per ``(m_deg, m_dim, spacetime truncation)`` and cached.

Scaling conventions (``d`` spatial dimensions):

* predictor integrals carry ``2**-(d+1)`` (spacetime cube measure),
* corrector integrals carry ``2**-d`` (spatial measure; time is not scaled).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .basis import (
    BasisSpec,
    Truncation,
    basis_eval,
    default_points,
    face_rule,
    gauss_rule,
    spacetime_spec,
    spatial_spec,
)

SIDES = (-1, 1)


@dataclass(frozen=True)
class ReferenceIntegrals:
    spatial: BasisSpec
    spacetime: BasisSpec
    time_volume: np.ndarray  # s * int Psi Psi_tau^T
    space_volume: tuple  # per axis: s * int Psi Psi_a^T
    past_face: np.ndarray  # s * int_{tau=-1} Psi Psi^T
    future_face: np.ndarray  # s * int_{tau=+1} Psi Psi^T
    initial: np.ndarray  # T = s * int_{tau=-1} Psi Phi^T
    embed: np.ndarray  # s * int Psi Phi^T   (time-constant extension)
    time_average: np.ndarray  # (1/2^d) * int Phi Psi^T   (Phi-coefficients of the tau-average)
    faces: tuple  # per axis: {(sa, sb): s * int_face Psi_{a=sa} Psi_{a=sb}^T}
    corr_volume: tuple  # per axis: c * int Phi_a Psi^T
    corr_faces: tuple  # per axis: {(sa, sb): c * int_face Phi_{a=sa} Psi_{a=sb}^T}

    @property
    def m_dim(self) -> int:
        return self.spatial.m_dim


def _face_values(spec, rule_pts, n_vars, axis, side, time_offset):
    """Basis values on a face given in spacetime coordinates.

    ``time_offset`` is 1 when ``spec`` is spatial (drop the time coordinate).
    """
    fr = face_rule(rule_pts, n_vars, axis, side)
    nodes = fr.nodes[:, time_offset:] if time_offset else fr.nodes
    return basis_eval(spec, nodes), fr.weights


@lru_cache(maxsize=None)
def reference_integrals(m_deg: int, m_dim: int, truncation: Truncation = Truncation.TENSOR_PRODUCT) -> ReferenceIntegrals:
    phi_spec = spatial_spec(m_deg, m_dim)
    psi_spec = spacetime_spec(m_deg, m_dim, truncation)
    n = default_points(m_deg)
    nv = m_dim + 1
    s = 0.5**nv
    c = 0.5**m_dim

    vol = gauss_rule(n, nv)
    psi = basis_eval(psi_spec, vol.nodes)
    phi = basis_eval(phi_spec, vol.nodes[:, 1:])
    wpsi = psi * vol.weights[:, None]
    time_volume = s * wpsi.T @ basis_eval(psi_spec, vol.nodes, deriv_axis=0)
    space_volume = tuple(s * wpsi.T @ basis_eval(psi_spec, vol.nodes, deriv_axis=1 + a) for a in range(m_dim))
    embed = s * wpsi.T @ phi
    wphi = phi * vol.weights[:, None]
    time_average = c * 0.5 * wphi.T @ psi
    corr_volume = tuple(
        c * (basis_eval(phi_spec, vol.nodes[:, 1:], deriv_axis=a) * vol.weights[:, None]).T @ psi
        for a in range(m_dim)
    )

    past_psi, w_t = _face_values(psi_spec, n, nv, 0, -1.0, 0)
    past_phi, _ = _face_values(phi_spec, n, nv, 0, -1.0, 1)
    fut_psi, _ = _face_values(psi_spec, n, nv, 0, 1.0, 0)
    past_face = s * (past_psi * w_t[:, None]).T @ past_psi
    future_face = s * (fut_psi * w_t[:, None]).T @ fut_psi
    initial = s * (past_psi * w_t[:, None]).T @ past_phi

    faces, corr_faces = [], []
    for a in range(m_dim):
        tr_psi, tr_phi = {}, {}
        for side in SIDES:
            tr_psi[side], w_f = _face_values(psi_spec, n, nv, 1 + a, float(side), 0)
            tr_phi[side], _ = _face_values(phi_spec, n, nv, 1 + a, float(side), 1)
        faces.append({(sa, sb): s * (tr_psi[sa] * w_f[:, None]).T @ tr_psi[sb] for sa in SIDES for sb in SIDES})
        corr_faces.append({(sa, sb): c * (tr_phi[sa] * w_f[:, None]).T @ tr_psi[sb] for sa in SIDES for sb in SIDES})

    return ReferenceIntegrals(
        spatial=phi_spec,
        spacetime=psi_spec,
        time_volume=time_volume,
        space_volume=space_volume,
        past_face=past_face,
        future_face=future_face,
        initial=initial,
        embed=embed,
        time_average=time_average,
        faces=tuple(faces),
        corr_faces=tuple(corr_faces),
        corr_volume=corr_volume,
    )
