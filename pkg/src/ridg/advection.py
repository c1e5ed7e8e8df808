"""Time-stepping driver and test problems for constant-coefficient advection."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .basis import spatial_spec
from .corrector import LinearScheme
from .errors import BlowUpError, DomainError
from .linear_predictor import AdvectionConfig, Scheme
from .mesh import CoeffField, Mesh, error_norms, project

BLOWUP = 1e10


@dataclass(frozen=True)
class AdvectionProblem:
    name: str
    velocity: tuple
    lo: float
    hi: float
    initial: Callable = field(repr=False)

    @property
    def m_dim(self) -> int:
        return len(self.velocity)

    def mesh(self, n) -> Mesh:
        return Mesh.uniform(n, self.lo, self.hi, self.m_dim)

    def exact(self, t: float) -> Callable:
        """Periodic translate of the initial condition."""
        length = self.hi - self.lo

        def q(*x):
            shifted = [self.lo + np.mod(xa - ua * t - self.lo, length) for xa, ua in zip(x, self.velocity)]
            return self.initial(*shifted)

        return q


def _sin1(x):
    return np.sin(16 * np.pi * x)


def _sin2(x, y):
    return np.sin(16 * np.pi * x) * np.sin(16 * np.pi * y)


def _sin3(x, y, z):
    return np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y) * np.sin(2 * np.pi * z)


PROBLEMS = {
    "advection1d": AdvectionProblem("advection1d", (1.0,), -1.0, 1.0, _sin1),
    "advection2d": AdvectionProblem("advection2d", (1.0, 1.0), -1.0, 1.0, _sin2),
    "advection3d": AdvectionProblem("advection3d", (1.0, 1.0, 1.0), -1.0, 1.0, _sin3),
}


def time_steps(dt: float, final_time: float, policy: str = "clamp") -> list:
    """Step sizes landing exactly on ``final_time``.

    ``clamp`` takes full steps of ``dt`` and shortens the last one; ``uniform``
    uses ``ceil(T/dt)`` equal steps (never exceeding ``dt``).
    """
    if dt <= 0 or final_time <= 0:
        raise DomainError("dt and final_time must be positive")
    n = math.ceil(final_time / dt * (1 - 1e-12))
    if policy == "uniform":
        return [final_time / n] * n
    if policy != "clamp":
        raise DomainError(f"unknown step policy {policy!r}")
    steps = [dt] * (n - 1)
    steps.append(final_time - dt * (n - 1))
    return steps


def dt_for_cfl(nu: float, velocity: Sequence[float], widths: Sequence[float]) -> float:
    """Largest ``dt`` with ``max_a |u_a| dt / h_a = nu``."""
    rate = max(abs(u) / h for u, h in zip(velocity, widths))
    if rate == 0.0:
        raise DomainError("zero velocity: CFL number undefined")
    return nu / rate


@dataclass
class RunResult:
    field: CoeffField
    n_steps: int
    runtime: float
    errors: tuple | None = None


def check_finite(fld: CoeffField, step: int) -> None:
    peak = np.max(np.abs(fld.coeffs))
    if not np.isfinite(peak) or peak > BLOWUP:
        raise BlowUpError(f"coefficients exceeded {BLOWUP:g} at step {step}")


def advance(fld: CoeffField, scheme, velocity, steps: Sequence[float]) -> CoeffField:
    """Advance ``fld`` by the given step sizes, reassembling only when ``dt`` changes."""
    cache = {}
    widths = fld.mesh.widths
    for k, dt in enumerate(steps):
        if dt not in cache:
            cache[dt] = LinearScheme(scheme, fld.spec.m_deg, AdvectionConfig.from_physical(velocity, dt, widths))
        fld = cache[dt].step(fld)
        check_finite(fld, k + 1)
    return fld


def run_advection(problem, scheme, m_deg: int, n, nu: float, final_time: float = 2.0,
                  policy: str = "clamp") -> RunResult:
    """Project, time-step to ``final_time`` and measure relative errors."""
    problem = PROBLEMS[problem] if isinstance(problem, str) else problem
    scheme = Scheme(scheme)
    mesh = problem.mesh(n)
    spec = spatial_spec(m_deg, problem.m_dim)
    fld = project(problem.initial, mesh, spec)
    steps = time_steps(dt_for_cfl(nu, problem.velocity, mesh.widths), final_time, policy)
    t0 = time.perf_counter()
    fld = advance(fld, scheme, problem.velocity, steps)
    runtime = time.perf_counter() - t0
    return RunResult(fld, len(steps), runtime, error_norms(fld, problem.exact(final_time)))
