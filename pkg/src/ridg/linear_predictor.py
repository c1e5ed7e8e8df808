"""Spacetime predictors for constant-coefficient advection.

Two predictors are provided:

* LIDG: each spacetime element is solved in isolation (no spatial integration
  by parts), which reproduces the Lax-Wendroff DG time-averaged flux.
* RIDG: each element is solved together with its ``3**d - 1`` neighbours, with
  upwind fluxes on faces interior to the region and one-sided interior fluxes
  on the region boundary; only the centre element's solution is kept.

Because the mesh is uniform and the velocity constant, the region matrix is the
same for every element.  It is factorised once and condensed into a stencil
``W_i = sum_o P_o Q_{i+o}`` over the region offsets.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from . import _kernels
from .basis import BasisSpec, Truncation
from .errors import AssemblyError, DomainError
from .mesh import CoeffField, Mesh
from .reference import ReferenceIntegrals, reference_integrals


class Scheme(str, enum.Enum):
    LIDG = "lidg"
    RIDG = "ridg"


@dataclass(frozen=True)
class AdvectionConfig:
    """Per-axis CFL numbers ``nu_a = u_a dt / dx_a``."""

    nu: tuple

    def __post_init__(self):
        nu = tuple(float(v) for v in np.atleast_1d(self.nu))
        if len(nu) not in (1, 2, 3):
            raise DomainError("need 1 to 3 CFL components")
        object.__setattr__(self, "nu", nu)

    @classmethod
    def from_physical(cls, velocity: Sequence[float], dt: float, widths: Sequence[float]) -> "AdvectionConfig":
        velocity = np.atleast_1d(velocity)
        return cls(tuple(u * dt / h for u, h in zip(velocity, widths)))

    @property
    def m_dim(self) -> int:
        return len(self.nu)

    @property
    def nu_plus(self) -> tuple:
        return tuple(max(v, 0.0) for v in self.nu)

    @property
    def nu_minus(self) -> tuple:
        return tuple(min(v, 0.0) for v in self.nu)

    @property
    def cfl(self) -> float:
        return max(abs(v) for v in self.nu)


@dataclass
class SpacetimeField:
    mesh: Mesh
    spec: BasisSpec
    coeffs: np.ndarray = field(repr=False)


def region_offsets(m_dim: int) -> np.ndarray:
    """Offsets of the ``3**m_dim`` region elements; last axis varies fastest."""
    return np.array(list(itertools.product((-1, 0, 1), repeat=m_dim)), dtype=np.int64)


@dataclass
class PredictorMatrices:
    scheme: Scheme
    config: AdvectionConfig
    ref: ReferenceIntegrals
    L0: np.ndarray
    T: np.ndarray
    Lp: tuple = ()
    Lm: tuple = ()
    Xp: tuple = ()
    Xm: tuple = ()
    region: np.ndarray | None = None
    lu: tuple | None = None
    offsets: np.ndarray = None
    stencil: np.ndarray = None  # (K, M_P, M_C): W_i = sum_k stencil[k] @ Q_{i+offsets[k]}

    @property
    def m_dim(self) -> int:
        return self.config.m_dim

    @property
    def n_region(self) -> int:
        return 3**self.m_dim


def _check_config(m_deg, config):
    if m_deg < 0:
        raise DomainError("m_deg must be >= 0")
    if not isinstance(config, AdvectionConfig):
        config = AdvectionConfig(config)
    return config


def _local_matrices(ref, config):
    nu = config.nu
    L0 = ref.time_volume + ref.past_face + sum(v * ref.space_volume[a] for a, v in enumerate(nu))
    Lp, Lm, Xp, Xm = [], [], [], []
    for a in range(config.m_dim):
        f = ref.faces[a]
        npl, nmi = config.nu_plus[a], config.nu_minus[a]
        # left face is interior: inflow from the left neighbour when nu > 0
        Lp.append(npl * f[(-1, -1)])
        Xp.append(-npl * f[(-1, 1)])
        # right face is interior: inflow from the right neighbour when nu < 0
        Lm.append(-nmi * f[(1, 1)])
        Xm.append(nmi * f[(1, -1)])
    return L0, tuple(Lp), tuple(Lm), tuple(Xp), tuple(Xm)


def assemble_lidg(m_deg: int, config, truncation: Truncation = Truncation.TOTAL_DEGREE) -> PredictorMatrices:
    """Element-local predictor ``L0 W_i = T Q_i``."""
    config = _check_config(m_deg, config)
    ref = reference_integrals(m_deg, config.m_dim, truncation)
    L0, Lp, Lm, Xp, Xm = _local_matrices(ref, config)
    try:
        P = np.linalg.solve(L0, ref.initial)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - L0 is never singular
        raise AssemblyError("LIDG matrix L0 is singular") from exc
    return PredictorMatrices(
        Scheme.LIDG, config, ref, L0, ref.initial, Lp, Lm, Xp, Xm,
        offsets=np.zeros((1, config.m_dim), dtype=np.int64), stencil=P[None],
    )


def region_matrix(L0, Lp, Lm, Xp, Xm, m_dim) -> np.ndarray:
    offs = region_offsets(m_dim)
    index = {tuple(o): k for k, o in enumerate(offs)}
    mp = L0.shape[0]
    R = len(offs)
    A = np.zeros((R * mp, R * mp))

    def blk(i, j):
        return (slice(i * mp, (i + 1) * mp), slice(j * mp, (j + 1) * mp))

    for i, r in enumerate(offs):
        diag = L0.copy()
        for a in range(m_dim):
            unit = np.zeros(m_dim, dtype=np.int64)
            unit[a] = 1
            if r[a] > -1:
                diag += Lp[a]
                A[blk(i, index[tuple(r - unit)])] += Xp[a]
            if r[a] < 1:
                diag += Lm[a]
                A[blk(i, index[tuple(r + unit)])] += Xm[a]
        A[blk(i, i)] += diag
    return A


def assemble_ridg_region(m_deg: int, config, truncation: Truncation = Truncation.TENSOR_PRODUCT) -> PredictorMatrices:
    """Region predictor: assemble, factorise once and condense to a stencil."""
    config = _check_config(m_deg, config)
    d = config.m_dim
    ref = reference_integrals(m_deg, d, truncation)
    L0, Lp, Lm, Xp, Xm = _local_matrices(ref, config)
    A = region_matrix(L0, Lp, Lm, Xp, Xm, d)
    mp = L0.shape[0]
    R = 3**d
    centre = R // 2
    lu = sla.lu_factor(A, check_finite=False)
    if not np.all(np.isfinite(lu[0])) or np.min(np.abs(np.diag(lu[0]))) == 0.0:
        raise AssemblyError("RIDG region matrix is singular")
    # centre block row of A^{-1}:  solve A^T Y = E_centre
    sel = np.zeros((R * mp, mp))
    sel[centre * mp:(centre + 1) * mp] = np.eye(mp)
    rows = sla.lu_solve(lu, sel, trans=1, check_finite=False).T  # (mp, R*mp)
    blocks = rows.reshape(mp, R, mp).transpose(1, 0, 2)
    stencil = blocks @ ref.initial  # (R, mp, mc)
    if not np.all(np.isfinite(stencil)):
        raise AssemblyError("RIDG region solve produced non-finite values")
    return PredictorMatrices(
        Scheme.RIDG, config, ref, L0, ref.initial, Lp, Lm, Xp, Xm,
        region=A, lu=lu, offsets=region_offsets(d), stencil=stencil,
    )


def assemble_predictor(scheme, m_deg: int, config) -> PredictorMatrices:
    scheme = Scheme(scheme)
    if scheme is Scheme.LIDG:
        return assemble_lidg(m_deg, config)
    return assemble_ridg_region(m_deg, config)


def _check_field(fld, mats):
    if fld.spec != mats.ref.spatial:
        raise DomainError("field basis does not match the predictor matrices")


def lidg_predict(fld: CoeffField, mats: PredictorMatrices) -> SpacetimeField:
    _check_field(fld, mats)
    W = fld.coeffs @ mats.stencil[0].T
    return SpacetimeField(fld.mesh, mats.ref.spacetime, W)


def gather_region(coeffs: np.ndarray, index: Sequence[int]) -> np.ndarray:
    """Coefficient blocks of the ``3**d`` region around ``index`` (periodic)."""
    grid = coeffs.shape[:-1]
    d = len(grid)
    return np.stack([coeffs[tuple((int(i) + int(o)) % n for i, o, n in zip(index, off, grid))]
                     for off in region_offsets(d)])


def solve_region(mats: PredictorMatrices, q_region: np.ndarray, keep_hats: bool = False) -> np.ndarray:
    """Solve one region system with the cached factorisation.

    ``q_region`` has shape ``(3**d, M_C)``.  Returns the centre block, or all
    blocks (the centre plus the discarded neighbour solutions) with ``keep_hats``.
    """
    if mats.lu is None:
        raise DomainError("solve_region needs RIDG matrices")
    rhs = (q_region @ mats.T.T).ravel()
    sol = sla.lu_solve(mats.lu, rhs, check_finite=False).reshape(mats.n_region, -1)
    return sol if keep_hats else sol[mats.n_region // 2]


def ridg_predict(fld: CoeffField, mats: PredictorMatrices, method: str = "stencil") -> SpacetimeField:
    """Centre-element predictions of every region.

    ``method="stencil"`` applies the condensed region inverse (default);
    ``method="region"`` gathers each neighbourhood and back-substitutes with the
    cached LU factors element by element.
    """
    _check_field(fld, mats)
    if method == "stencil":
        W = _kernels.stencil_apply(fld.coeffs, mats.offsets, mats.stencil)
    elif method == "region":
        W = np.empty(fld.coeffs.shape[:-1] + (mats.ref.spacetime.size,))
        for idx in np.ndindex(*fld.coeffs.shape[:-1]):
            W[idx] = solve_region(mats, gather_region(fld.coeffs, idx))
    else:
        raise DomainError(f"unknown method {method!r}")
    return SpacetimeField(fld.mesh, mats.ref.spacetime, W)


def predict(fld: CoeffField, mats: PredictorMatrices) -> SpacetimeField:
    if mats.scheme is Scheme.LIDG:
        return lidg_predict(fld, mats)
    return ridg_predict(fld, mats)


def time_averaged_flux(mats: PredictorMatrices, q: np.ndarray) -> np.ndarray:
    """Spatial coefficients of the time-averaged predicted solution of one element (LIDG)."""
    W = mats.stencil[0] @ q if mats.scheme is Scheme.LIDG else None
    if W is None:
        raise DomainError("time_averaged_flux is defined for the element-local predictor")
    return mats.ref.time_average @ W
