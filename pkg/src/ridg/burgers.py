"""Nonlinear RIDG for scalar conservation laws, specialised to inviscid Burgers.

Each region (the element and its ``3**d - 1`` neighbours) carries its own copy
of the spacetime unknowns.  The region residual uses Rusanov fluxes on faces
interior to the region and the physical flux of the interior trace on the
region boundary.  Newton's method with a frozen Rusanov wave speed is run on
all regions at once; only the centre block is kept.  The corrector is the
usual DG update with time-integrated Rusanov fluxes of the predicted traces.

Volume integrals of polynomial fluxes (degree <= 2) are evaluated without
quadrature through precomputed triple-product tensors.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .basis import Truncation, basis_eval, default_points, face_rule, gauss_rule, spacetime_spec, spatial_spec
from .errors import DomainError, ExactSolutionError, NewtonError
from .linear_predictor import SpacetimeField, region_offsets
from .mesh import CoeffField, Mesh, error_norms, field_at_nodes, project
from .reference import reference_integrals

# --------------------------------------------------------------------------
# fluxes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarFlux:
    """Scalar flux ``f`` with derivative; ``poly = (a1, a2)`` marks ``f = a1 q + a2 q^2``."""

    name: str
    f: Callable = field(repr=False)
    fprime: Callable = field(repr=False)
    poly: tuple | None = None


def burgers_flux() -> ScalarFlux:
    return ScalarFlux("burgers", lambda q: 0.5 * q * q, lambda q: q, (0.0, 0.5))


def linear_flux(u: float) -> ScalarFlux:
    u = float(u)
    return ScalarFlux(f"linear({u:g})", lambda q: u * q, lambda q: u + 0.0 * q, (u, 0.0))


def rusanov_flux(ql, qr, flux: ScalarFlux):
    """Rusanov flux ``(f(ql) + f(qr))/2 - lam/2 (qr - ql)``."""
    return rusanov_partials(ql, qr, flux)[0]


def rusanov_partials(ql, qr, flux: ScalarFlux):
    """Rusanov flux and its partials with the wave speed held fixed."""
    if flux.name == "burgers":
        return _kernels.burgers_rusanov(np.asarray(ql, dtype=float), np.asarray(qr, dtype=float))
    ql = np.asarray(ql, dtype=float)
    qr = np.asarray(qr, dtype=float)
    fpl, fpr = flux.fprime(ql), flux.fprime(qr)
    lam = np.maximum(np.maximum(np.abs(fpl), np.abs(fpr)), np.abs(flux.fprime(0.5 * (ql + qr))))
    F = 0.5 * (flux.f(ql) + flux.f(qr)) - 0.5 * lam * (qr - ql)
    return F, 0.5 * fpl + 0.5 * lam, 0.5 * fpr - 0.5 * lam


@dataclass(frozen=True)
class NewtonSettings:
    """Stopping rule for the region Newton solves, applied to the centre block.

    ``criterion`` selects what is compared with ``tolerance``:

    * ``update``: L2 norm of the centre-block Newton correction (default);
    * ``residual``: L2 norm of the centre-block residual;
    * ``relative``: that residual norm divided by its initial value.

    A residual below ``floor`` always counts as converged.
    """

    tolerance: float = 1e-4
    max_iterations: int = 3
    criterion: str = "update"
    floor: float = 1e-13

    def __post_init__(self):
        if self.tolerance <= 0 or self.max_iterations < 1:
            raise DomainError("Newton tolerance must be > 0 and max_iterations >= 1")
        if self.criterion not in ("update", "residual", "relative"):
            raise DomainError(f"unknown Newton criterion {self.criterion!r}")


# --------------------------------------------------------------------------
# reference data
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadFreeTensors:
    """Exact triple-product integrals for quadratic fluxes.

    ``pred[a][k, l, b] = s * int d_a psi_k psi_l psi_b`` over the spacetime cube
    and ``corr[a][k, l, b] = c * int d_a phi_k psi_l psi_b``; the ``*_lin``
    entries are the matching two-factor integrals.
    """

    pred: tuple
    pred_lin: tuple
    corr: tuple
    corr_lin: tuple


@lru_cache(maxsize=None)
def quad_free_tensors(m_deg: int, m_dim: int) -> QuadFreeTensors:
    psi_spec = spacetime_spec(m_deg, m_dim)
    phi_spec = spatial_spec(m_deg, m_dim)
    nv = m_dim + 1
    s, c = 0.5**nv, 0.5**m_dim
    rule = gauss_rule((3 * m_deg) // 2 + 1, nv)
    psi = basis_eval(psi_spec, rule.nodes)
    wpsi = psi * rule.weights[:, None]
    pred, pred_lin, corr, corr_lin = [], [], [], []
    for a in range(m_dim):
        dpsi = basis_eval(psi_spec, rule.nodes, deriv_axis=1 + a)
        dphi = basis_eval(phi_spec, rule.nodes[:, 1:], deriv_axis=a)
        pred.append(s * np.einsum("qk,ql,qb->klb", dpsi, wpsi, psi, optimize=True))
        pred_lin.append(s * dpsi.T @ wpsi)
        corr.append(c * np.einsum("qk,ql,qb->klb", dphi, wpsi, psi, optimize=True))
        corr_lin.append(c * dphi.T @ wpsi)
    return QuadFreeTensors(tuple(pred), tuple(pred_lin), tuple(corr), tuple(corr_lin))


@dataclass(frozen=True)
class _FaceData:
    plus: np.ndarray  # (nq, M_P) spacetime basis on the +1 face
    minus: np.ndarray
    phi_plus: np.ndarray  # (nq, M_C)
    phi_minus: np.ndarray
    weights: np.ndarray


@lru_cache(maxsize=None)
def _face_data(m_deg: int, m_dim: int) -> tuple:
    psi_spec = spacetime_spec(m_deg, m_dim)
    phi_spec = spatial_spec(m_deg, m_dim)
    n = default_points(m_deg)
    out = []
    for a in range(m_dim):
        fp = face_rule(n, m_dim + 1, 1 + a, 1.0)
        fm = face_rule(n, m_dim + 1, 1 + a, -1.0)
        out.append(_FaceData(basis_eval(psi_spec, fp.nodes), basis_eval(psi_spec, fm.nodes),
                             basis_eval(phi_spec, fp.nodes[:, 1:]), basis_eval(phi_spec, fm.nodes[:, 1:]),
                             fp.weights))
    return tuple(out)


@lru_cache(maxsize=None)
def _volume_data(m_deg: int, m_dim: int):
    """Quadrature fallback for non-polynomial fluxes."""
    psi_spec = spacetime_spec(m_deg, m_dim)
    phi_spec = spatial_spec(m_deg, m_dim)
    rule = gauss_rule(2 * m_deg + 2, m_dim + 1)
    psi = basis_eval(psi_spec, rule.nodes)
    dpsi = [basis_eval(psi_spec, rule.nodes, deriv_axis=1 + a) for a in range(m_dim)]
    dphi = [basis_eval(phi_spec, rule.nodes[:, 1:], deriv_axis=a) for a in range(m_dim)]
    return psi, dpsi, dphi, rule.weights


def _check_fluxes(fluxes, m_dim):
    if isinstance(fluxes, ScalarFlux):
        fluxes = (fluxes,) * m_dim
    fluxes = tuple(fluxes)
    if len(fluxes) != m_dim:
        raise DomainError("need one flux per spatial axis")
    return fluxes


# --------------------------------------------------------------------------
# region residual and Jacobian
# --------------------------------------------------------------------------


def _face_block(left, coef, right):
    """``sum_q left[q, k] coef[e, q] right[q, b]`` as a batched matmul."""
    return (left.T[None] * coef[:, None, :]) @ right


class RegionSystem:
    """Residual and frozen-speed Jacobian of the nonlinear region problem.

    Arrays are batched over regions: ``W`` has shape ``(E, 3**d, M_P)`` and the
    old-time data ``Q`` has shape ``(E, 3**d, M_C)``.  ``mu`` holds the per-axis
    ratios ``dt / dx_a``.
    """

    def __init__(self, m_deg: int, m_dim: int):
        self.m_deg, self.m_dim = m_deg, m_dim
        self.ref = reference_integrals(m_deg, m_dim, Truncation.TENSOR_PRODUCT)
        self.time_part = self.ref.time_volume + self.ref.past_face
        self.T = self.ref.initial
        self.offsets = region_offsets(m_dim)
        self.R = len(self.offsets)
        self.centre = self.R // 2
        self.faces = _face_data(m_deg, m_dim)
        self.s = 0.5 ** (m_dim + 1)
        self.mp = self.ref.spacetime.size

    def _volume(self, W, mu, fluxes, jac):
        """``-mu_a s int d_a Psi f(w)`` summed over axes, and its Jacobian blocks."""
        res = np.zeros_like(W)
        J = np.zeros(W.shape + (self.mp,)) if jac else None
        for a, (m, fl) in enumerate(zip(mu, fluxes)):
            if fl.poly is not None:
                qf = quad_free_tensors(self.m_deg, self.m_dim)
                a1, a2 = fl.poly
                if a1:
                    res -= m * a1 * W @ qf.pred_lin[a].T
                    if jac:
                        J -= m * a1 * qf.pred_lin[a]
                if a2:
                    P = self.mp
                    # G[e, r, k, b] = sum_l E[k, l, b] W[e, r, l]
                    G = (W.reshape(-1, P) @ qf.pred[a].transpose(1, 0, 2).reshape(P, P * P)).reshape(W.shape + (P,))
                    res -= m * a2 * np.einsum("erkb,erb->erk", G, W)
                    if jac:
                        J -= 2.0 * m * a2 * G
            else:
                psi, dpsi, _, w = _volume_data(self.m_deg, self.m_dim)
                q = W @ psi.T
                res -= m * self.s * (fl.f(q) * w) @ dpsi[a]
                if jac:
                    J -= m * self.s * np.einsum("qk,erq,qb->erkb", dpsi[a], fl.fprime(q) * w, psi, optimize=True)
        return res, J

    def evaluate(self, W, Q, mu, fluxes, jac: bool = True):
        """Return ``(residual, jacobian)``; the Jacobian has shape ``(E, R*M_P, R*M_P)``."""
        fluxes = _check_fluxes(fluxes, self.m_dim)
        E, R, P = W.shape
        res = W @ self.time_part.T - Q @ self.T.T
        vol, Jvol = self._volume(W, mu, fluxes, jac)
        res += vol
        J = None
        if jac:
            J = np.zeros((E, R, P, R, P))
            idx = np.arange(R)
            J[:, idx, :, idx, :] = self.time_part + Jvol.transpose(1, 0, 2, 3)
        s = self.s
        for a, (m, fl) in enumerate(zip(mu, fluxes)):
            fd = self.faces[a]
            trp = W @ fd.plus.T  # (E, R, nq)
            trm = W @ fd.minus.T
            stride = 3 ** (self.m_dim - 1 - a)
            ms = m * s
            for r, off in enumerate(self.offsets):
                # right face
                if off[a] < 1:
                    nb = r + stride
                    F, dl, dr = rusanov_partials(trp[:, r], trm[:, nb], fl)
                    res[:, r] += ms * (F * fd.weights) @ fd.plus
                    if jac:
                        J[:, r, :, r, :] += ms * _face_block(fd.plus, dl * fd.weights, fd.plus)
                        J[:, r, :, nb, :] += ms * _face_block(fd.plus, dr * fd.weights, fd.minus)
                else:
                    q = trp[:, r]
                    res[:, r] += ms * (fl.f(q) * fd.weights) @ fd.plus
                    if jac:
                        J[:, r, :, r, :] += ms * _face_block(fd.plus, fl.fprime(q) * fd.weights, fd.plus)
                # left face
                if off[a] > -1:
                    nb = r - stride
                    F, dl, dr = rusanov_partials(trp[:, nb], trm[:, r], fl)
                    res[:, r] -= ms * (F * fd.weights) @ fd.minus
                    if jac:
                        J[:, r, :, nb, :] -= ms * _face_block(fd.minus, dl * fd.weights, fd.plus)
                        J[:, r, :, r, :] -= ms * _face_block(fd.minus, dr * fd.weights, fd.minus)
                else:
                    q = trm[:, r]
                    res[:, r] -= ms * (fl.f(q) * fd.weights) @ fd.minus
                    if jac:
                        J[:, r, :, r, :] -= ms * _face_block(fd.minus, fl.fprime(q) * fd.weights, fd.minus)
        if jac:
            J = J.reshape(E, R * P, R * P)
        return res, J


def region_residual(system: RegionSystem, W, Q, mu, fluxes) -> np.ndarray:
    return system.evaluate(W, Q, mu, fluxes, jac=False)[0]


def region_jacobian(system: RegionSystem, W, Q, mu, fluxes) -> np.ndarray:
    return system.evaluate(W, Q, mu, fluxes, jac=True)[1]


# --------------------------------------------------------------------------
# predictor / corrector
# --------------------------------------------------------------------------


def gather_regions(coeffs: np.ndarray) -> np.ndarray:
    """``(E, 3**d, M)`` neighbourhood blocks of every element (periodic, C order)."""
    d = coeffs.ndim - 1
    axes = tuple(range(d))
    blocks = [np.roll(coeffs, shift=tuple(-int(o) for o in off), axis=axes) for off in region_offsets(d)]
    return np.stack(blocks, axis=d).reshape(-1, len(blocks), coeffs.shape[-1])


@dataclass
class NewtonStats:
    iterations: np.ndarray  # Newton updates per element
    residual: np.ndarray  # final centre-block residual norms

    @property
    def max_iterations(self) -> int:
        return int(self.iterations.max()) if self.iterations.size else 0


def newton_predict(fld: CoeffField, mu: Sequence[float], fluxes, settings: NewtonSettings = NewtonSettings(),
                   system: RegionSystem | None = None, chunk: int | None = None) -> tuple:
    """Region-wise Newton prediction; returns ``(SpacetimeField, NewtonStats)``.

    The initial guess extends each element's own data constantly in time.  A
    region stops once it passes the test in ``settings`` or after
    ``max_iterations`` updates; ``NewtonStats.iterations`` counts updates.
    """
    d = fld.mesh.m_dim
    system = system or RegionSystem(fld.spec.m_deg, d)
    if fld.spec != system.ref.spatial:
        raise DomainError("field basis does not match the region system")
    fluxes = _check_fluxes(fluxes, d)
    Q = gather_regions(fld.coeffs)
    E, R, _ = Q.shape
    P = system.mp
    W = Q @ system.ref.embed.T
    iters = np.zeros(E, dtype=int)
    rnorm = np.zeros(E)
    chunk = chunk or max(1, int(2**27 // (8 * (R * P) ** 2)))
    for start in range(0, E, chunk):
        sl = slice(start, min(E, start + chunk))
        active = np.arange(sl.start, sl.stop)
        ref = None
        for it in range(settings.max_iterations + 1):
            res, J = system.evaluate(W[active], Q[active], mu, fluxes, jac=it < settings.max_iterations)
            nrm = np.linalg.norm(res[:, system.centre], axis=1)
            rnorm[active] = nrm
            if ref is None:
                ref = nrm if settings.criterion == "relative" else np.ones_like(nrm)
            keep = nrm > settings.floor
            if settings.criterion != "update":
                keep &= nrm > settings.tolerance * ref
            if it == settings.max_iterations or not np.any(keep):
                break
            active, res, J, ref = active[keep], res[keep], J[keep], ref[keep]
            try:
                delta = np.linalg.solve(J, -res.reshape(len(active), R * P, 1))[..., 0]
            except np.linalg.LinAlgError as exc:
                raise NewtonError("singular region Jacobian", element=int(active[0]), iteration=it + 1) from exc
            if not np.all(np.isfinite(delta)):
                bad = active[~np.all(np.isfinite(delta), axis=1)]
                raise NewtonError("non-finite Newton update", element=int(bad[0]), iteration=it + 1)
            delta = delta.reshape(len(active), R, P)
            W[active] += delta
            iters[active] += 1
            if settings.criterion == "update":
                moving = np.linalg.norm(delta[:, system.centre], axis=1) > settings.tolerance
                active, ref = active[moving], ref[moving]
                if not active.size:
                    break
    centre = W[:, system.centre].reshape(fld.coeffs.shape[:-1] + (P,))
    return SpacetimeField(fld.mesh, system.ref.spacetime, centre), NewtonStats(iters.reshape(fld.mesh.shape), rnorm)


def nonlinear_correct(fld: CoeffField, prediction: SpacetimeField, mu: Sequence[float], fluxes) -> CoeffField:
    """DG update with time-integrated Rusanov fluxes of the predicted traces."""
    d = fld.mesh.m_dim
    fluxes = _check_fluxes(fluxes, d)
    m_deg = fld.spec.m_deg
    W = prediction.coeffs
    c = 0.5**d
    upd = np.zeros_like(fld.coeffs)
    faces = _face_data(m_deg, d)
    for a, (m, fl) in enumerate(zip(mu, fluxes)):
        if fl.poly is not None:
            qf = quad_free_tensors(m_deg, d)
            a1, a2 = fl.poly
            if a1:
                upd += m * a1 * W @ qf.corr_lin[a].T
            if a2:
                upd += m * a2 * np.einsum("klb,...l,...b->...k", qf.corr[a], W, W, optimize=True)
        else:
            psi, _, dphi, w = _volume_data(m_deg, d)
            upd += m * c * (fl.f(W @ psi.T) * w) @ dphi[a]
        fd = faces[a]
        trp = W @ fd.plus.T
        trm_next = np.roll(W, -1, axis=a) @ fd.minus.T
        F = rusanov_flux(trp, trm_next, fl) * fd.weights  # flux on the +1 face of each element
        F_left = np.roll(F, 1, axis=a)
        upd += m * c * (F_left @ fd.phi_minus - F @ fd.phi_plus)
    return fld.with_coeffs(fld.coeffs + upd)


# --------------------------------------------------------------------------
# exact solution and time step
# --------------------------------------------------------------------------


def burgers_exact(x, t: float, q0: Callable, grad_q0: Callable, tol: float = 1e-13, max_iter: int = 100):
    """Pre-shock solution of ``q_t + sum_a (q^2/2)_{x_a} = 0``.

    Solves ``q = q0(x - q t (1, ..., 1))`` pointwise by damped Newton.  ``x`` is
    a sequence of coordinate arrays (one per axis); ``grad_q0`` returns the
    gradient as a list of arrays.
    """
    x = [np.asarray(xa, dtype=float) for xa in x]
    q = np.asarray(q0(*x), dtype=float).copy()
    if t == 0.0:
        return q

    def g(qv):
        return qv - q0(*[xa - qv * t for xa in x])

    r = g(q)
    for _ in range(max_iter):
        if np.max(np.abs(r)) <= tol:
            return q
        dg = 1.0 + t * sum(grad_q0(*[xa - q * t for xa in x]))
        if np.any(dg <= 0):
            raise ExactSolutionError("characteristics have crossed (shock formed)")
        step = -r / dg
        lam = np.ones_like(q)
        for _ in range(30):
            trial = q + lam * step
            rt = g(trial)
            bad = np.abs(rt) > np.abs(r) * (1 - 1e-4 * lam) + tol
            if not np.any(bad):
                break
            lam = np.where(bad, 0.5 * lam, lam)
        q, r = trial, rt
    if np.max(np.abs(r)) > tol:
        raise ExactSolutionError(f"characteristic solve did not converge (residual {np.max(np.abs(r)):.2e})")
    return q


STEP_CONVENTIONS = ("lambda_max", "unit")


def max_wave_speed(fld: CoeffField, fluxes) -> float:
    fluxes = _check_fluxes(fluxes, fld.mesh.m_dim)
    rule = gauss_rule(default_points(fld.spec.m_deg), fld.mesh.m_dim)
    q = field_at_nodes(fld, rule.nodes)
    return max(float(np.max(np.abs(fl.fprime(q)))) for fl in fluxes)


def burgers_time_step_size(fld: CoeffField, nu: float, fluxes, convention: str = "lambda_max") -> float:
    """``dt = nu * min_a dx_a / lam_max``.

    ``lambda_max`` takes the largest ``|f'(q_h)|`` over quadrature nodes at the
    current time; ``unit`` sets ``lam_max = 1``.
    """
    h = min(fld.mesh.widths)
    if convention == "unit":
        return nu * h
    if convention != "lambda_max":
        raise DomainError(f"unknown time-step convention {convention!r}")
    lam = max_wave_speed(fld, fluxes)
    if lam == 0.0:
        raise DomainError("zero wave speed: time step undefined")
    return nu * h / lam


# --------------------------------------------------------------------------
# problems and driver
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BurgersProblem:
    name: str
    m_dim: int
    lo: float
    hi: float
    initial: Callable = field(repr=False)
    gradient: Callable = field(repr=False)

    def mesh(self, n) -> Mesh:
        return Mesh.uniform(n, self.lo, self.hi, self.m_dim)

    def exact(self, t: float) -> Callable:
        return lambda *x: burgers_exact(x, t, self.initial, self.gradient)


BURGERS_PROBLEMS = {
    "burgers1d": BurgersProblem(
        "burgers1d", 1, 0.0, 2 * np.pi,
        lambda x: 1.0 - np.cos(x),
        lambda x: [np.sin(x)],
    ),
    "burgers2d": BurgersProblem(
        "burgers2d", 2, 0.0, 2 * np.pi,
        lambda x, y: 0.25 * (1.0 - np.cos(x)) * (1.0 - np.cos(y)),
        lambda x, y: [0.25 * np.sin(x) * (1.0 - np.cos(y)), 0.25 * (1.0 - np.cos(x)) * np.sin(y)],
    ),
}


class NonlinearRIDG:
    """One nonlinear RIDG step: Newton prediction followed by the Rusanov corrector."""

    def __init__(self, m_deg: int, m_dim: int, fluxes, settings: NewtonSettings = NewtonSettings()):
        self.system = RegionSystem(m_deg, m_dim)
        self.fluxes = _check_fluxes(fluxes, m_dim)
        self.settings = settings

    def step(self, fld: CoeffField, dt: float) -> tuple:
        mu = tuple(dt / h for h in fld.mesh.widths)
        pred, stats = newton_predict(fld, mu, self.fluxes, self.settings, self.system)
        return nonlinear_correct(fld, pred, mu, self.fluxes), stats


@dataclass
class BurgersRun:
    field: CoeffField
    n_steps: int
    runtime: float
    errors: tuple | None = None
    newton_iterations: list = field(default_factory=list)


def run_burgers(problem, scheme: str, m_deg: int, n, nu: float, final_time: float = 0.4,
                convention: str = "lambda_max", settings: NewtonSettings = NewtonSettings()) -> BurgersRun:
    """Advance a Burgers problem with RIDG or RKDG and measure relative errors."""
    from .advection import check_finite
    from .rkdg import rkdg_step

    problem = BURGERS_PROBLEMS[problem] if isinstance(problem, str) else problem
    scheme = scheme.lower()
    if scheme not in ("ridg", "rkdg"):
        raise DomainError(f"scheme {scheme!r} is not available for Burgers")
    mesh = problem.mesh(n)
    fld = project(problem.initial, mesh, spatial_spec(m_deg, problem.m_dim))
    fluxes = (burgers_flux(),) * problem.m_dim
    stepper = NonlinearRIDG(m_deg, problem.m_dim, fluxes, settings) if scheme == "ridg" else None
    t, steps, iters = 0.0, 0, []
    t0 = time.perf_counter()
    while t < final_time * (1 - 1e-14):
        dt = min(burgers_time_step_size(fld, nu, fluxes, convention), final_time - t)
        if stepper is not None:
            fld, stats = stepper.step(fld, dt)
            iters.append(stats.max_iterations)
        else:
            fld = rkdg_step(fld, dt, fluxes)
        t += dt
        steps += 1
        check_finite(fld, steps)
    runtime = time.perf_counter() - t0
    return BurgersRun(fld, steps, runtime, error_norms(fld, problem.exact(final_time)), iters)
