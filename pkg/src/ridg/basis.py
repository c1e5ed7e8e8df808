"""Orthonormal Legendre bases on the reference cube and Gauss quadrature.

All bases are products of one-dimensional orthonormal Legendre polynomials
``sqrt(2n+1) P_n`` so that the Gram matrix under the scaled measure
``2**-d dx`` is the identity.  Coordinates are ordered ``(tau, xi, eta, zeta)``
for spacetime bases and ``(xi, eta, zeta)`` for spatial ones.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import DomainError

_REF_TOL = 1e-12


class Truncation(enum.Enum):
    TOTAL_DEGREE = "total"
    TENSOR_PRODUCT = "tensor"


@dataclass(frozen=True)
class BasisSpec:
    """A Legendre basis family on ``[-1, 1]**n_vars``.

    ``n_vars`` is ``m_dim`` for a spatial basis and ``m_dim + 1`` when the
    basis includes time.
    """

    m_deg: int
    m_dim: int
    truncation: Truncation = Truncation.TOTAL_DEGREE
    includes_time: bool = False

    def __post_init__(self):
        if self.m_deg < 0:
            raise DomainError(f"m_deg must be >= 0, got {self.m_deg}")
        if self.m_dim not in (1, 2, 3):
            raise DomainError(f"m_dim must be 1, 2 or 3, got {self.m_dim}")

    @property
    def n_vars(self) -> int:
        return self.m_dim + int(self.includes_time)

    @cached_property
    def exponents(self) -> np.ndarray:
        """Per-variable Legendre degrees of every basis function, canonical order."""
        return _exponents(self.m_deg, self.n_vars, self.truncation)

    @property
    def size(self) -> int:
        return len(self.exponents)

    def __len__(self):
        return self.size


def spatial_spec(m_deg: int, m_dim: int) -> BasisSpec:
    return BasisSpec(m_deg, m_dim, Truncation.TOTAL_DEGREE, False)


def spacetime_spec(m_deg: int, m_dim: int, truncation=Truncation.TENSOR_PRODUCT) -> BasisSpec:
    return BasisSpec(m_deg, m_dim, truncation, True)


@lru_cache(maxsize=None)
def _exponents(m_deg, n_vars, truncation):
    if truncation is Truncation.TENSOR_PRODUCT:
        # first variable (time when present) varies slowest
        exps = list(itertools.product(range(m_deg + 1), repeat=n_vars))
    else:
        exps = [e for e in itertools.product(range(m_deg + 1), repeat=n_vars) if sum(e) <= m_deg]
        # total degree first, then graded lexicographic: (1,0) before (0,1)
        exps.sort(key=lambda e: (sum(e), tuple(-k for k in e)))
    out = np.array(exps, dtype=np.int64).reshape(-1, n_vars)
    out.flags.writeable = False
    return out


def legendre(n: int, x) -> np.ndarray:
    """Orthonormal Legendre values ``sqrt(2k+1) P_k(x)`` for ``k = 0..n``.

    Returns an array of shape ``(n + 1,) + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    p = np.empty((n + 1,) + x.shape)
    p[0] = 1.0
    if n >= 1:
        p[1] = x
    for k in range(1, n):
        p[k + 1] = ((2 * k + 1) * x * p[k] - k * p[k - 1]) / (k + 1)
    scale = np.sqrt(2 * np.arange(n + 1) + 1.0).reshape((-1,) + (1,) * x.ndim)
    return p * scale


def legendre_deriv(n: int, x) -> np.ndarray:
    """Derivatives of :func:`legendre`, same shape."""
    x = np.asarray(x, dtype=float)
    p = np.empty((n + 1,) + x.shape)
    dp = np.zeros((n + 1,) + x.shape)
    p[0] = 1.0
    if n >= 1:
        p[1] = x
        dp[1] = 1.0
    for k in range(1, n):
        p[k + 1] = ((2 * k + 1) * x * p[k] - k * p[k - 1]) / (k + 1)
        # P'_{k+1} = P'_{k-1} + (2k+1) P_k
        dp[k + 1] = dp[k - 1] + (2 * k + 1) * p[k]
    scale = np.sqrt(2 * np.arange(n + 1) + 1.0).reshape((-1,) + (1,) * x.ndim)
    return dp * scale


def _as_points(spec, points):
    pts = np.asarray(points, dtype=float)
    single = pts.ndim <= 1
    if single:
        pts = pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[-1] != spec.n_vars:
        raise DomainError(f"expected points with {spec.n_vars} coordinates, got shape {pts.shape}")
    if np.any(np.abs(pts) > 1.0 + _REF_TOL):
        raise DomainError("point lies outside the reference element [-1, 1]^d")
    return pts, single


def basis_eval(spec: BasisSpec, points, deriv_axis: int | None = None) -> np.ndarray:
    """Evaluate every basis function (or one partial) at ``points``.

    ``points`` has shape ``(npts, n_vars)`` or ``(n_vars,)``; the result has shape
    ``(npts, size)`` or ``(size,)`` respectively.
    """
    pts, single = _as_points(spec, points)
    if deriv_axis is not None and not 0 <= deriv_axis < spec.n_vars:
        raise DomainError(f"axis {deriv_axis} invalid for a basis with {spec.n_vars} variables")
    exps = spec.exponents
    out = np.ones((pts.shape[0], spec.size))
    for v in range(spec.n_vars):
        table = (legendre_deriv if v == deriv_axis else legendre)(spec.m_deg, pts[:, v])
        out *= table[exps[:, v]].T
    return out[0] if single else out


def spatial_basis_eval(spec: BasisSpec, point) -> np.ndarray:
    if spec.includes_time:
        raise DomainError("spatial_basis_eval needs a basis without time")
    return basis_eval(spec, point)


def spacetime_basis_eval(spec: BasisSpec, point) -> np.ndarray:
    if not spec.includes_time:
        raise DomainError("spacetime_basis_eval needs a basis that includes time")
    return basis_eval(spec, point)


def basis_partial_eval(spec: BasisSpec, point, axis: int) -> np.ndarray:
    return basis_eval(spec, point, deriv_axis=axis)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray  # (n, d)
    weights: np.ndarray  # (n,)

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def integrate(self, values) -> np.ndarray:
        """Sum ``weights * values`` over the leading (node) axis."""
        return np.tensordot(self.weights, values, axes=(0, 0))


@lru_cache(maxsize=None)
def _gauss_rule(n, d):
    x, w = np.polynomial.legendre.leggauss(n)
    nodes = np.array(list(itertools.product(x, repeat=d))).reshape(-1, d)
    weights = np.prod(np.array(list(itertools.product(w, repeat=d))).reshape(-1, d), axis=1)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(nodes, weights)


def gauss_rule(points_per_axis: int, d: int) -> QuadratureRule:
    """Tensor Gauss-Legendre rule on ``[-1, 1]**d``, exact per axis to degree ``2n - 1``."""
    if points_per_axis < 1:
        raise DomainError("points_per_axis must be >= 1")
    if d < 0:
        raise DomainError("d must be >= 0")
    if d == 0:
        return QuadratureRule(np.zeros((1, 0)), np.ones(1))
    return _gauss_rule(int(points_per_axis), int(d))


def face_rule(points_per_axis: int, n_vars: int, axis: int, side: float) -> QuadratureRule:
    """Gauss rule on the face ``x[axis] = side`` of ``[-1, 1]**n_vars``.

    Nodes are returned in the full ``n_vars`` coordinates; weights integrate over
    the remaining ``n_vars - 1`` variables.
    """
    sub = gauss_rule(points_per_axis, n_vars - 1)
    nodes = np.insert(sub.nodes, axis, side, axis=1)
    return QuadratureRule(nodes, sub.weights)


def default_points(m_deg: int) -> int:
    return m_deg + 2


def gram_matrix(spec: BasisSpec, points_per_axis: int | None = None) -> np.ndarray:
    """Gram matrix under the scaled measure ``2**-n_vars``; identity for these bases."""
    rule = gauss_rule(points_per_axis or spec.m_deg + 1, spec.n_vars)
    v = basis_eval(spec, rule.nodes)
    return (v * rule.weights[:, None]).T @ v / 2.0**spec.n_vars
