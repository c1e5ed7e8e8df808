"""Explicit correction step shared by the LIDG and RIDG advection schemes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .basis import Truncation
from .errors import DomainError
from .linear_predictor import (
    AdvectionConfig,
    PredictorMatrices,
    Scheme,
    SpacetimeField,
    assemble_predictor,
    predict,
)
from .mesh import CoeffField
from .reference import reference_integrals


@dataclass
class CorrectorMatrices:
    config: AdvectionConfig
    C0: np.ndarray
    Cm: tuple  # per axis, multiplies W_{i - e_a}
    Cp: tuple  # per axis, multiplies W_{i + e_a}
    offsets: np.ndarray
    stencil: np.ndarray  # (K, M_C, M_P)


def assemble_corrector(m_deg: int, config, truncation: Truncation = Truncation.TENSOR_PRODUCT) -> CorrectorMatrices:
    """Upwind-flux corrector matrices for a spacetime basis of the given truncation."""
    if not isinstance(config, AdvectionConfig):
        config = AdvectionConfig(config)
    d = config.m_dim
    ref = reference_integrals(m_deg, d, truncation)
    C0 = sum(v * ref.corr_volume[a] for a, v in enumerate(config.nu))
    Cm, Cp = [], []
    for a in range(d):
        g = ref.corr_faces[a]
        npl, nmi = config.nu_plus[a], config.nu_minus[a]
        C0 = C0 - (npl * g[(1, 1)] - nmi * g[(-1, -1)])
        Cm.append(npl * g[(-1, 1)])
        Cp.append(-nmi * g[(1, -1)])
    offsets = [np.zeros(d, dtype=np.int64)]
    mats = [C0]
    for a in range(d):
        e = np.zeros(d, dtype=np.int64)
        e[a] = 1
        offsets += [-e, e]
        mats += [Cm[a], Cp[a]]
    return CorrectorMatrices(config, C0, tuple(Cm), tuple(Cp), np.array(offsets), np.array(mats))


def correct(fld: CoeffField, prediction: SpacetimeField, mats: CorrectorMatrices) -> CoeffField:
    """New-time coefficients ``Q + C0 W_i + sum_a (Cm_a W_{i-e_a} + Cp_a W_{i+e_a})``."""
    if prediction.coeffs.shape[:-1] != fld.coeffs.shape[:-1]:
        raise DomainError("prediction and field live on different meshes")
    if prediction.coeffs.shape[-1] != mats.stencil.shape[2]:
        raise DomainError("prediction basis does not match the corrector matrices")
    update = _kernels.stencil_apply(prediction.coeffs, mats.offsets, mats.stencil)
    return fld.with_coeffs(fld.coeffs + update)


class LinearScheme:
    """One full predict-correct step for a fixed ``(scheme, m_deg, nu)``.

    The predictor and corrector matrices are assembled together so they can
    never be mismatched.
    """

    def __init__(self, scheme, m_deg: int, config):
        self.scheme = Scheme(scheme)
        self.m_deg = m_deg
        self.config = config if isinstance(config, AdvectionConfig) else AdvectionConfig(config)
        self.predictor: PredictorMatrices = assemble_predictor(self.scheme, m_deg, self.config)
        trunc = Truncation.TOTAL_DEGREE if self.scheme is Scheme.LIDG else Truncation.TENSOR_PRODUCT
        self.corrector = assemble_corrector(m_deg, self.config, trunc)

    def step(self, fld: CoeffField) -> CoeffField:
        return correct(fld, predict(fld, self.predictor), self.corrector)

    def update_stencil(self) -> tuple:
        """Offsets and ``M_C x M_C`` blocks of the composed one-step update ``Q^{n+1} - Q^n``."""
        acc = {}
        for oc, C in zip(self.corrector.offsets, self.corrector.stencil):
            for op, P in zip(self.predictor.offsets, self.predictor.stencil):
                key = tuple(int(v) for v in oc + op)
                acc[key] = acc.get(key, 0.0) + C @ P
        keys = sorted(acc)
        return np.array(keys, dtype=np.int64), np.array([acc[k] for k in keys])
