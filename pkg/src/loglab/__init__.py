"""Numerical laboratory for the steady diffusive logistic equation on (0, 1).

    mu * theta'' + theta * (m(x) - theta) = 0,   theta' = 0 at x = 0, 1.
"""

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoticData,
    compute_asymptotics,
    convergence_order,
    cosine_family,
    expansion_error,
    hunt_positive_sensitivity,
)
from .grid import (
    Grid,
    derivative,
    gradient_energy,
    integrate,
    neumann_laplacian_apply,
    solve_helmholtz,
    solve_neumann_poisson_zero_mean,
)
from .resource import ConditionReport, ResourceProfile, classify_conditions
from .sensitivity import (
    Sensitivity,
    fd_sensitivity_check,
    moment_derivative_check,
    sandwich_check,
    solve_sensitivity,
)
from .steady import (
    NewtonOptions,
    SteadyState,
    check_bounds,
    newton_solve,
    parabolic_relax,
    residual,
    solve_with_continuation,
)
from .sweep import SweepTable, monotonicity_verdict, run_sweep, sign_changes
from .verify import VerifyReport, run_verification
