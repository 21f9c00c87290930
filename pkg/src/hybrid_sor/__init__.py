"""Hybrid evolutionary SOR solvers for dense linear systems."""

from ._kernels import BACKEND
from .adaptation import (AdaptationParams, ConfigurationError, adapt_pair, init_omegas,
                         time_variant_factor)
from .evolution import (Population, RunResult, SolverConfig, seed_streams, solve,
                        solve_classical_sor)
from .linalg import (DimensionError, DivergenceError, IterationOperator, LinearSystem,
                     SingularSystemError, build_iteration_matrix, direct_solve,
                     estimate_spectral_radius, residual_norm, sor_sweep)
from .problems import TABLE_I, ProblemSpec, generate_problem, get_spec

__version__ = "0.1.0"
