"""Von Neumann stability analysis of the LIDG and RIDG advection schemes.

A single Fourier mode ``Q_i = Q~ exp(I omega . i)`` is advanced by one full
predict-correct step; the resulting ``M_C x M_C`` amplification matrix is

    M(nu, omega) = I + sum_k exp(I omega . k) S_k

where ``S_k`` are the blocks of the composed update stencil.  The maximum
stable CFL number is located by bisection on

    f(nu) = max_omega rho(M(nu, omega)) - 1 = epsilon.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .basis import Truncation
from .corrector import LinearScheme, assemble_corrector
from .errors import BracketError, DomainError
from .linear_predictor import AdvectionConfig, Scheme, assemble_lidg, assemble_ridg_region

DEFAULT_EPSILON = 5e-4
DEFAULT_RESOLUTION = {1: 2001, 2: 201, 3: 61}
DEFAULT_BRACKET = {1: (0.0, 4.0), 2: (0.0, 2.0), 3: (0.0, 2.0)}
DEFAULT_SCAN_STEP = {1: 0.01, 2: 0.05, 3: 0.1}

_CHUNK_BYTES = 64 * 2**20


def amplification_1d(scheme, m_deg: int, nu: float, omega) -> np.ndarray:
    """Closed-form 1D amplification matrices for ``nu >= 0``.

    ``omega`` may be a scalar or an array; the result has shape
    ``omega.shape + (M_C, M_C)``.
    """
    scheme = Scheme(scheme)
    if nu < 0:
        raise DomainError("amplification_1d assumes nu >= 0; reflect the problem for negative speeds")
    cfg = AdvectionConfig((nu,))
    omega = np.asarray(omega, dtype=float)
    z = np.exp(-1j * omega)[..., None, None]
    mc = m_deg + 1
    eye = np.eye(mc)
    if scheme is Scheme.LIDG:
        pm = assemble_lidg(m_deg, cfg)
        cm = assemble_corrector(m_deg, cfg, Truncation.TOTAL_DEGREE)
        P = np.linalg.solve(pm.L0, pm.T)
        return (eye + cm.C0 @ P) + z * (cm.Cm[0] @ P)
    pm = assemble_ridg_region(m_deg, cfg)
    cm = assemble_corrector(m_deg, cfg, Truncation.TENSOR_PRODUCT)
    centre = pm.L0 + pm.Lp[0]
    A = np.linalg.solve(centre, pm.T)
    B = np.linalg.solve(centre, pm.Xp[0] @ np.linalg.solve(pm.L0, pm.T))
    C0, Cm = cm.C0, cm.Cm[0]
    return (eye + C0 @ A) + z * (Cm @ A - C0 @ B) - z**2 * (Cm @ B)


class UpdateSymbol:
    """Fourier symbol of the composed one-step update for fixed ``(scheme, m_deg, nu)``."""

    def __init__(self, scheme, m_deg: int, nu: Sequence[float]):
        self.scheme = Scheme(scheme)
        self.m_deg = m_deg
        self.nu = tuple(float(v) for v in np.atleast_1d(nu))
        self.offsets, self.blocks = LinearScheme(self.scheme, m_deg, AdvectionConfig(self.nu)).update_stencil()
        self.mc = self.blocks.shape[1]

    @property
    def m_dim(self) -> int:
        return len(self.nu)

    def matrices(self, omegas: np.ndarray) -> np.ndarray:
        """Amplification matrices for wave-number vectors ``omegas`` of shape ``(n, d)``."""
        omegas = np.asarray(omegas, dtype=float).reshape(-1, self.m_dim)
        phases = np.exp(1j * omegas @ self.offsets.T)  # (n, K)
        flat = phases @ self.blocks.reshape(len(self.blocks), -1)
        M = flat.reshape(-1, self.mc, self.mc)
        M += np.eye(self.mc)
        return M

    def spectral_radius(self, omegas: np.ndarray) -> np.ndarray:
        omegas = np.asarray(omegas, dtype=float).reshape(-1, self.m_dim)
        chunk = max(1, _CHUNK_BYTES // (16 * self.mc * self.mc * 4))
        out = np.empty(len(omegas))
        for start in range(0, len(omegas), chunk):
            M = self.matrices(omegas[start:start + chunk])
            out[start:start + chunk] = np.max(np.abs(np.linalg.eigvals(M)), axis=-1)
        return out


def amplification_md(scheme, m_deg: int, nu: Sequence[float], omega: Sequence[float]) -> np.ndarray:
    """Amplification matrix for one wave-number vector in 1 to 3 dimensions."""
    sym = UpdateSymbol(scheme, m_deg, nu)
    return sym.matrices(np.atleast_2d(omega))[0]


def omega_grid(m_dim: int, resolution: int, half: bool = True) -> np.ndarray:
    """Uniform wave-number grid on ``[0, 2 pi]**d``.

    With ``half`` only the first axis is restricted to ``[0, pi]``; since the
    stencils are real, ``M(-omega) = conj(M(omega))`` and the spectral radius over
    the reduced grid equals the one over the full grid (for odd resolution).
    """
    if resolution < 2:
        raise DomainError("omega resolution must be >= 2")
    w = np.linspace(0.0, 2.0 * np.pi, resolution)
    first = w[: resolution // 2 + 1] if (half and resolution % 2 == 1) else w
    axes = [first] + [w] * (m_dim - 1)
    return np.array(np.meshgrid(*axes, indexing="ij")).reshape(m_dim, -1).T


def stability_function(scheme, m_deg: int, nu: Sequence[float], resolution: int | None = None) -> float:
    """``max_omega rho(M) - 1`` over a uniform grid of ``resolution`` points per axis."""
    nu = tuple(np.atleast_1d(nu).astype(float))
    d = len(nu)
    resolution = resolution or DEFAULT_RESOLUTION[d]
    if all(v == 0.0 for v in nu):
        sym = UpdateSymbol(scheme, m_deg, nu)
        return float(np.max(sym.spectral_radius(np.zeros((1, d)))) - 1.0)
    sym = UpdateSymbol(scheme, m_deg, nu)
    return float(np.max(sym.spectral_radius(omega_grid(d, resolution))) - 1.0)


@dataclass
class StabilityReport:
    scheme: str
    m_deg: int
    m_dim: int
    direction: tuple
    max_cfl: float
    epsilon: float
    omega_resolution: int
    bracket: tuple = (0.0, 0.0)
    iterations: int = 0
    history: list = field(default_factory=list, repr=False)

    CSV_HEADER = ("scheme", "m_deg", "m_dim", "direction", "max_cfl", "epsilon", "omega_resolution")

    def csv_row(self) -> list:
        return [self.scheme, self.m_deg, self.m_dim, ";".join(repr(float(v)) for v in self.direction),
                repr(float(self.max_cfl)), repr(float(self.epsilon)), self.omega_resolution]


def max_cfl(
    scheme,
    m_deg: int,
    m_dim: int = 1,
    direction: Sequence[float] | None = None,
    epsilon: float = DEFAULT_EPSILON,
    resolution: int | None = None,
    bracket: tuple | None = None,
    tol: float = 1e-3,
    root: str = "largest",
    scan_step: float | None = None,
) -> StabilityReport:
    """Bisect for the largest ``|nu|`` with ``f(|nu| * direction) <= epsilon``.

    ``direction`` is scaled so its largest component is 1, making the reported
    value the multidimensional CFL number ``max_a |nu_a|``.  The default is the
    diagonal.

    ``f`` is not monotone for every RIDG degree: a shallow bump of weak growth
    (``f`` of order 1e-3) can sit below the sharp stability edge.  With
    ``root="largest"`` (default) the bracket is first narrowed by stepping down
    from its upper end in ``scan_step`` increments until ``f <= epsilon``, so the
    bisection converges to the last crossing.  ``root="first"`` bisects the
    given bracket directly.
    """
    scheme = Scheme(scheme)
    if root not in ("largest", "first"):
        raise DomainError(f"unknown root selection {root!r}")
    direction = np.ones(m_dim) if direction is None else np.asarray(direction, dtype=float)
    if direction.shape != (m_dim,) or np.max(np.abs(direction)) == 0.0:
        raise DomainError("direction must be a nonzero vector with one entry per dimension")
    direction = direction / np.max(np.abs(direction))
    resolution = resolution or DEFAULT_RESOLUTION[m_dim]
    lo, hi = bracket or DEFAULT_BRACKET[m_dim]
    step = scan_step or DEFAULT_SCAN_STEP[m_dim]

    def f(v):
        val = stability_function(scheme, m_deg, tuple(v * direction), resolution)
        history.append((v, val))
        return val

    history = []
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo <= epsilon < f_hi):
        raise BracketError(
            f"bracket [{lo}, {hi}] does not straddle epsilon={epsilon}: f(lo)={f_lo:.3g}, f(hi)={f_hi:.3g}",
            f_lo, f_hi,
        )
    if root == "largest":
        v = hi - step
        while v > lo:
            if f(v) <= epsilon:
                lo = v
                break
            hi = v
            v -= step
    it = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) <= epsilon:
            lo = mid
        else:
            hi = mid
        it += 1
    return StabilityReport(scheme.value, m_deg, m_dim, tuple(direction), 0.5 * (lo + hi), epsilon,
                           resolution, (lo, hi), it, history)


def stability_scan_2d(scheme, m_deg: int, nu_x: Sequence[float], nu_y: Sequence[float],
                      resolution: int | None = None) -> np.ndarray:
    """Grid of ``f(nu_x, nu_y) + 1`` values, shape ``(len(nu_x), len(nu_y))``."""
    out = np.empty((len(nu_x), len(nu_y)))
    for i, vx in enumerate(nu_x):
        for j, vy in enumerate(nu_y):
            out[i, j] = stability_function(scheme, m_deg, (vx, vy), resolution or DEFAULT_RESOLUTION[2]) + 1.0
    return out


def write_scan_csv(path, nu_x, nu_y, values) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["nu_x", "nu_y", "f_plus_1"])
        for i, vx in enumerate(nu_x):
            for j, vy in enumerate(nu_y):
                w.writerow([repr(float(vx)), repr(float(vy)), repr(float(values[i, j]))])


def write_reports_csv(path, reports) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(StabilityReport.CSV_HEADER)
        for r in reports:
            w.writerow(r.csv_row())
