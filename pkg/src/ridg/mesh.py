"""Uniform periodic Cartesian meshes and modal DG coefficient fields."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .basis import BasisSpec, QuadratureRule, basis_eval, default_points, gauss_rule
from .errors import DomainError


@dataclass(frozen=True)
class Mesh:
    """Uniform Cartesian mesh, periodic in every direction.

    ``bounds`` holds one ``(lo, hi)`` pair per axis.
    """

    elements_per_axis: tuple
    bounds: tuple

    def __post_init__(self):
        n = tuple(int(k) for k in self.elements_per_axis)
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(n) != len(b) or len(n) not in (1, 2, 3):
            raise DomainError("axis count of elements_per_axis and bounds must agree and be 1..3")
        if any(k < 1 for k in n):
            raise DomainError("need at least one element per axis")
        if any(hi <= lo for lo, hi in b):
            raise DomainError("domain bounds must satisfy lo < hi")
        object.__setattr__(self, "elements_per_axis", n)
        object.__setattr__(self, "bounds", b)

    @classmethod
    def uniform(cls, n: int | Sequence[int], lo: float, hi: float, m_dim: int | None = None) -> "Mesh":
        if np.isscalar(n):
            n = (int(n),) * (m_dim or 1)
        return cls(tuple(n), tuple((lo, hi) for _ in n))

    @property
    def m_dim(self) -> int:
        return len(self.elements_per_axis)

    @property
    def shape(self) -> tuple:
        return self.elements_per_axis

    @property
    def n_elements(self) -> int:
        return math.prod(self.elements_per_axis)

    @property
    def widths(self) -> tuple:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.bounds, self.elements_per_axis))

    @property
    def lengths(self) -> tuple:
        return tuple(hi - lo for lo, hi in self.bounds)

    @property
    def volume(self) -> float:
        return math.prod(self.lengths)

    @property
    def element_volume(self) -> float:
        return math.prod(self.widths)

    def centers(self, axis: int) -> np.ndarray:
        lo, _ = self.bounds[axis]
        h = self.widths[axis]
        return lo + h * (np.arange(self.elements_per_axis[axis]) + 0.5)

    def wrap(self, index):
        """Periodic element index arithmetic; total on all integers."""
        return tuple(int(i) % n for i, n in zip(index, self.elements_per_axis))

    def locate(self, x) -> tuple:
        """Element multi-index and reference coordinates of physical point(s).

        ``x`` has shape ``(m_dim,)`` or ``(npts, m_dim)``.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        idx = np.empty(x.shape, dtype=np.int64)
        ref = np.empty(x.shape)
        for a, ((lo, hi), n) in enumerate(zip(self.bounds, self.elements_per_axis)):
            length = hi - lo
            s = np.mod(x[:, a] - lo, length) / length * n
            i = np.minimum(np.floor(s).astype(np.int64), n - 1)
            idx[:, a] = i
            ref[:, a] = np.clip(2.0 * (s - i) - 1.0, -1.0, 1.0)
        return idx, ref

    def physical_coords(self, ref_nodes: np.ndarray) -> list:
        """Physical coordinates of reference nodes in every element.

        Returns one array per axis, shaped ``mesh.shape + (n_nodes,)``.
        """
        coords = []
        for a in range(self.m_dim):
            c = self.centers(a)
            shape = [1] * self.m_dim + [ref_nodes.shape[0]]
            shape[a] = c.size
            xa = c.reshape([-1 if k == a else 1 for k in range(self.m_dim)] + [1]) + 0.5 * self.widths[a] * ref_nodes[:, a]
            coords.append(np.broadcast_to(xa, tuple(self.shape) + (ref_nodes.shape[0],)))
        return coords


@dataclass
class CoeffField:
    """Modal DG coefficients, one block of ``spec.size`` values per element.

    ``coeffs`` has shape ``mesh.shape + (spec.size,)`` in row-major element order.
    """

    mesh: Mesh
    spec: BasisSpec
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        expected = tuple(self.mesh.shape) + (self.spec.size,)
        if self.coeffs.shape != expected:
            raise DomainError(f"coefficient array has shape {self.coeffs.shape}, expected {expected}")
        if self.spec.m_dim != self.mesh.m_dim:
            raise DomainError("basis and mesh dimensions differ")

    def copy(self) -> "CoeffField":
        return CoeffField(self.mesh, self.spec, self.coeffs.copy())

    def with_coeffs(self, coeffs) -> "CoeffField":
        return CoeffField(self.mesh, self.spec, coeffs)

    @property
    def cell_averages(self) -> np.ndarray:
        return self.coeffs[..., 0]

    @classmethod
    def constant(cls, mesh, spec, value=0.0) -> "CoeffField":
        c = np.zeros(tuple(mesh.shape) + (spec.size,))
        c[..., 0] = value
        return cls(mesh, spec, c)


def _call(f, coords):
    return np.broadcast_to(np.asarray(f(*coords), dtype=float), coords[0].shape)


def project(f: Callable, mesh: Mesh, spec: BasisSpec, points_per_axis: int | None = None) -> CoeffField:
    """L2 projection of ``f(x[, y[, z]])`` onto the broken space.

    ``f`` must accept numpy arrays, one per axis, and broadcast.
    """
    rule = gauss_rule(points_per_axis or default_points(spec.m_deg), spec.m_dim)
    phi = basis_eval(spec, rule.nodes)
    vals = _call(f, mesh.physical_coords(rule.nodes))
    coeffs = (vals * rule.weights) @ phi / 2.0**spec.m_dim
    return CoeffField(mesh, spec, coeffs)


def evaluate_field(fld: CoeffField, x) -> np.ndarray | float:
    """Point values of the DG field at physical point(s) ``x``."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0 or (arr.ndim == 1 and fld.mesh.m_dim > 1)
    pts = arr.reshape(-1, fld.mesh.m_dim)
    idx, ref = fld.mesh.locate(pts)
    phi = basis_eval(fld.spec, ref)
    q = fld.coeffs[tuple(idx.T)]
    out = np.einsum("nk,nk->n", phi, q)
    return float(out[0]) if scalar else out


def field_at_nodes(fld: CoeffField, ref_nodes: np.ndarray) -> np.ndarray:
    """Field values at reference nodes in every element, shape ``mesh.shape + (n_nodes,)``."""
    return fld.coeffs @ basis_eval(fld.spec, ref_nodes).T


def _corner_nodes(d):
    return np.array(np.meshgrid(*([[-1.0, 1.0]] * d), indexing="ij")).reshape(d, -1).T


def error_norms(fld: CoeffField, exact: Callable, rule: QuadratureRule | None = None) -> tuple:
    """Relative (L1, L2, Linf) errors of ``fld`` against ``exact``.

    Each norm of ``fld - exact`` is divided by the same norm of ``exact`` over the
    whole domain.  Linf is sampled on the quadrature nodes plus element corners.
    """
    mesh = fld.mesh
    rule = rule or gauss_rule(fld.spec.m_deg + 3, mesh.m_dim)
    jac = mesh.element_volume / 2.0**mesh.m_dim
    qh = field_at_nodes(fld, rule.nodes)
    qe = _call(exact, mesh.physical_coords(rule.nodes))
    err = qh - qe
    l1 = np.sum(np.abs(err) @ rule.weights) * jac
    l2 = np.sqrt(np.sum(err**2 @ rule.weights) * jac)
    e1 = np.sum(np.abs(qe) @ rule.weights) * jac
    e2 = np.sqrt(np.sum(qe**2 @ rule.weights) * jac)
    corners = _corner_nodes(mesh.m_dim)
    ch = field_at_nodes(fld, corners)
    ce = _call(exact, mesh.physical_coords(corners))
    linf = max(np.max(np.abs(err)), np.max(np.abs(ch - ce)))
    einf = max(np.max(np.abs(qe)), np.max(np.abs(ce)))
    if e1 == 0.0 or e2 == 0.0 or einf == 0.0:
        raise DomainError("exact solution is identically zero; relative errors undefined")
    return float(l1 / e1), float(l2 / e2), float(linf / einf)


def total_mass(fld: CoeffField) -> float:
    return float(np.sum(fld.coeffs[..., 0]) * fld.mesh.element_volume)


def estimate_order(errors: Sequence[float], h: Sequence[float]) -> list:
    """Observed convergence orders between successive refinements.

    The first entry is ``None``.
    """
    e = np.asarray(errors, dtype=float)
    hh = np.asarray(h, dtype=float)
    if e.shape != hh.shape or e.size < 2:
        raise DomainError("errors and h must have equal length >= 2")
    if np.any(e <= 0) or np.any(hh <= 0):
        raise DomainError("errors and mesh sizes must be strictly positive")
    orders = [None]
    for k in range(1, e.size):
        orders.append(float(np.log(e[k - 1] / e[k]) / np.log(hh[k - 1] / hh[k])))
    return orders


def estimate_order_from_counts(errors: Sequence[float], counts: Sequence[float]) -> list:
    """Same as :func:`estimate_order` with element counts (``h ~ 1/count``)."""
    return estimate_order(errors, [1.0 / c for c in counts])
