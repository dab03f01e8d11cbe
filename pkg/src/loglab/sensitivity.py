"""Diffusion-rate sensitivity theta_mu and the identities it satisfies.

theta_mu solves the linearised problem

    mu * L theta_mu + (m - 2 theta) theta_mu = -L theta

with the same mirror-ghost operator as the steady state.  Because ``W L`` is
symmetric, pairing this equation with theta and the steady equation with
theta_mu gives ``integrate(theta^2 theta_mu) = -gradient_energy(theta)``
exactly, up to the two solve residuals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SingularOperatorError
from .grid import (
    Grid,
    as_field,
    gradient_energy,
    helmholtz_backward_error,
    integrate,
    neumann_laplacian_apply,
    solve_helmholtz,
)
from .resource import ResourceProfile, classify_conditions
from .steady import NewtonOptions, SteadyState, solve_with_continuation

__all__ = [
    "Sensitivity",
    "SandwichCheck",
    "solve_sensitivity",
    "fd_sensitivity_check",
    "sandwich_check",
    "moment_derivative_check",
    "STRICT_RTOL",
]

STRICT_RTOL = 1e-9


@dataclass
class Sensitivity:
    theta_mu: np.ndarray
    linear_residual: float
    identity_defect: float
    weighted_mass: float  # integrate(theta^2 * theta_mu)
    grad_energy: float
    fd_agreement: Optional[float] = None

    def at(self, i: int) -> float:
        return float(self.theta_mu[i])


def solve_sensitivity(grid: Grid, state: SteadyState, m) -> Sensitivity:
    theta = state.theta
    m = as_field(grid, m, theta.dtype)
    c = m - 2 * theta
    rhs = -neumann_laplacian_apply(grid, theta)
    try:
        tmu = solve_helmholtz(grid, state.mu, c, rhs)
    except SingularOperatorError as exc:
        raise SingularOperatorError(
            f"linearised operator singular at mu={state.mu:g}; "
            f"input is not a converged stable state ({exc})", exc.pivot, exc.index,
        ) from exc
    energy = gradient_energy(grid, theta)
    mass = integrate(grid, theta * theta * tmu)
    gap = abs(mass + energy)
    defect = float(gap / energy) if energy > 0 else float(gap)
    return Sensitivity(
        theta_mu=tmu,
        linear_residual=helmholtz_backward_error(grid, state.mu, c, tmu, rhs),
        identity_defect=defect,
        weighted_mass=float(mass),
        grad_energy=float(energy),
    )


def fd_sensitivity_check(grid: Grid, profile: ResourceProfile, mu: float, h_mu: float,
                         opts: NewtonOptions = NewtonOptions()) -> float:
    """``|(theta(mu+h) - theta(mu-h)) / 2h - theta_mu|_inf``."""
    if not mu - h_mu > 0:
        raise ValueError("need mu - h_mu > 0")
    m = grid.sample(profile)
    centre = solve_with_continuation(grid, mu, profile, opts)
    plus = solve_with_continuation(grid, mu + h_mu, profile, opts)
    minus = solve_with_continuation(grid, mu - h_mu, profile, opts)
    sens = solve_sensitivity(grid, centre, m)
    fd = (plus.theta - minus.theta) / (2 * np.longdouble(h_mu))
    return float(np.max(np.abs(fd - sens.theta_mu)))


@dataclass(frozen=True)
class SandwichCheck:
    """min theta < theta + mu*theta_mu < max theta, plus the extremum signs."""

    status: str  # "pass" | "fail" | "not-applicable"
    conditional: bool  # True when (M1) does not hold: a failure proves nothing
    lower_margin: float
    upper_margin: float
    theta_mu_at_argmax: float
    theta_mu_at_argmin: float

    @property
    def ok(self) -> bool:
        return self.status == "pass"


def sandwich_check(state: SteadyState, sens: Sensitivity,
                   profile: Optional[ResourceProfile] = None, m1: Optional[bool] = None) -> SandwichCheck:
    theta = state.theta
    tmax, tmin = theta.max(), theta.min()
    imax, imin = int(np.argmax(theta)), int(np.argmin(theta))
    at_max, at_min = float(sens.theta_mu[imax]), float(sens.theta_mu[imin])
    if m1 is None:
        m1 = classify_conditions(profile).m1 if profile is not None else False
    scale = float(np.max(np.abs(theta)))
    if float(tmax - tmin) <= 1e-12 * (1.0 + scale):
        return SandwichCheck("not-applicable", not m1, 0.0, 0.0, at_max, at_min)
    v = theta + state.mu * sens.theta_mu
    lower = float(np.min(v - tmin))
    upper = float(np.min(tmax - v))
    slack = STRICT_RTOL * scale
    ok = lower > -slack and upper > -slack and at_max < 0 and at_min > 0
    return SandwichCheck("pass" if ok else "fail", not m1, lower, upper, at_max, at_min)


def moment_derivative_check(grid: Grid, profile: ResourceProfile, mu: float, h_mu: float,
                            opts: NewtonOptions = NewtonOptions()) -> tuple[float, float]:
    """(central difference of integrate(theta^3) in mu, -3 * gradient energy at mu)."""
    if not mu - h_mu > 0:
        raise ValueError("need mu - h_mu > 0")
    plus = solve_with_continuation(grid, mu + h_mu, profile, opts)
    minus = solve_with_continuation(grid, mu - h_mu, profile, opts)
    centre = solve_with_continuation(grid, mu, profile, opts)
    lhs = (integrate(grid, plus.theta**3) - integrate(grid, minus.theta**3)) / (2 * np.longdouble(h_mu))
    rhs = -3 * gradient_energy(grid, centre.theta)
    return float(lhs), float(rhs)
