"""Polyflow approximations of polynomial ODEs.

Lie derivatives of the identity are projected onto the span of the lower
ones over a sampled box; the resulting coefficients define a block-companion
linear ODE whose closed-form solution approximates the nonlinear flow.
"""
from .approx import (Box, Grid, LambdaSet, Norm, binomial_lambdas, exactness_residual,
                     fit_coefficients, make_grid, project, regressor_matrix)
from .lie import LieSequence, TaylorPoly, hadamard_radius, lie_sequence, lie_step, taylor, taylor_eval
from .linsys import (CompanionSystem, Trajectory, TrajectoryLabel, build_companion, expm,
                     jacobian_linearization, simulate_linear, spectral_report)
from .polyalg import Polynomial, PolyVector, format_polynomial, parse_field, parse_polynomial
from .sim import (ErrorReport, RecurrenceSpec, compare, convergence_study, prop1_bound_check,
                  prop2_residual, recurrence_run, rk4, time_grid)

__version__ = "0.1.0"

__all__ = [
    "Box", "Grid", "LambdaSet", "Norm", "binomial_lambdas", "exactness_residual",
    "fit_coefficients", "make_grid", "project", "regressor_matrix",
    "LieSequence", "TaylorPoly", "hadamard_radius", "lie_sequence", "lie_step", "taylor",
    "taylor_eval",
    "CompanionSystem", "Trajectory", "TrajectoryLabel", "build_companion", "expm",
    "jacobian_linearization", "simulate_linear", "spectral_report",
    "Polynomial", "PolyVector", "format_polynomial", "parse_field", "parse_polynomial",
    "ErrorReport", "RecurrenceSpec", "compare", "convergence_study", "prop1_bound_check",
    "prop2_residual", "recurrence_run", "rk4", "time_grid",
]
