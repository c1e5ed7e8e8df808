"""Locally- and regionally-implicit discontinuous Galerkin solvers."""
from .basis import BasisSpec, Truncation, spacetime_spec, spatial_spec
from .burgers import NewtonSettings, NonlinearRIDG, burgers_exact, burgers_flux, linear_flux, run_burgers
from .corrector import LinearScheme
from .errors import (AssemblyError, BlowUpError, BracketError, DomainError, ExactSolutionError, NewtonError,
                     RIDGError)
from .linear_predictor import AdvectionConfig, Scheme
from .mesh import CoeffField, Mesh, error_norms, estimate_order, project, total_mass
from .advection import run_advection
from .rkdg import rkdg_step
from .stability import max_cfl, stability_function

__version__ = "0.1.0"
