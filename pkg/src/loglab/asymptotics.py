"""Large-diffusion expansion theta(x; 1/lam) = mbar + lam*(C(m) + rho_m(x)) + O(lam^2).

rho_m is the zero-mean Neumann solution of ``rho'' = -mbar*(m - mbar)`` and

    C(m) = integral(rho_m'^2) / (mbar^2 |Omega|) = integral((m - mbar) rho_m) / (mbar |Omega|).

Both forms are evaluated; they agree because ``-integral(rho L rho)`` is the
gradient energy.  (The second form carries a plus sign: integrating by parts
against ``L rho = -mbar (m - mbar)`` gives ``integral((m - mbar) rho) =
integral(rho'^2) / mbar``, and the solvability condition
``integral(u (m - u)) = 0`` of the first-order problem selects this sign.)
Here |Omega| = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import MeanPositivityError
from .grid import Grid, gradient_energy, integrate, solve_neumann_poisson_zero_mean
from .resource import ResourceProfile
from .steady import NewtonOptions, solve_with_continuation

__all__ = [
    "AsymptoticData",
    "ProfileFamily",
    "compute_asymptotics",
    "expansion_error",
    "convergence_order",
    "cosine_family",
    "constant_family",
    "sampled_family",
    "hunt_positive_sensitivity",
    "cosine_family_threshold",
]

DOMAIN_MEASURE = 1.0


@dataclass
class AsymptoticData:
    m_bar: float
    rho_m: np.ndarray
    c_of_m: float
    c_cross_check: float
    min_c_plus_rho: float

    @property
    def first_order(self) -> np.ndarray:
        """C(m) + rho_m, the derivative of theta with respect to lam = 1/mu at lam = 0."""
        return self.c_of_m + self.rho_m


def compute_asymptotics(grid: Grid, profile: ResourceProfile) -> AsymptoticData:
    m = grid.sample(profile)
    m_bar = float(integrate(grid, m)) / DOMAIN_MEASURE
    if not m_bar > 0:
        raise MeanPositivityError(f"mean resource {m_bar:.6g} must be positive for the expansion")
    rho = solve_neumann_poisson_zero_mean(grid, m_bar * (m - m_bar), check_compatibility=False).rho
    c_energy = float(gradient_energy(grid, rho)) / (m_bar**2 * DOMAIN_MEASURE)
    c_cross = float(integrate(grid, (m - m_bar) * rho)) / (m_bar * DOMAIN_MEASURE)
    return AsymptoticData(
        m_bar=m_bar,
        rho_m=rho,
        c_of_m=c_energy,
        c_cross_check=c_cross,
        min_c_plus_rho=float(np.min(c_energy + rho)),
    )


def expansion_error(grid: Grid, profile: ResourceProfile, lam: float,
                    data: Optional[AsymptoticData] = None,
                    opts: NewtonOptions = NewtonOptions()) -> float:
    """Sup-norm remainder of the first-order expansion at lam = 1/mu."""
    if not 0 < lam <= 1:
        raise ValueError("expansion error needs 0 < lam <= 1 (mu >= 1)")
    data = data or compute_asymptotics(grid, profile)
    state = solve_with_continuation(grid, 1.0 / lam, profile, opts)
    approx = data.m_bar + lam * (data.c_of_m + data.rho_m)
    return float(np.max(np.abs(state.theta - approx.astype(state.theta.dtype))))


def convergence_order(grid: Grid, profile: ResourceProfile, lambda0: float = 1e-2,
                      levels: int = 4, opts: NewtonOptions = NewtonOptions()) -> float:
    """Least-squares slope of log e(lam) against log lam over lam0 / 2**k.

    Returns NaN when the remainders sit at the solver noise floor (e.g. for a
    constant resource, where the expansion is exact).
    """
    if levels < 2:
        raise ValueError("need at least two levels")
    data = compute_asymptotics(grid, profile)
    lams = lambda0 / 2.0 ** np.arange(levels)
    errs = np.array([expansion_error(grid, profile, lam, data, opts) for lam in lams])
    if np.any(errs <= 1e-13 * (1.0 + abs(data.m_bar))):
        return math.nan
    slope, _ = np.polyfit(np.log(lams), np.log(errs), 1)
    return float(slope)


@dataclass(frozen=True)
class ProfileFamily:
    """A one-parameter family of resource profiles searched by the hunt."""

    name: str
    build: Callable[[float], ResourceProfile]
    lo: float
    hi: float


def cosine_family(c: float = 1.0, lo: float = 0.0, hi: float = 4.0) -> ProfileFamily:
    return ProfileFamily(f"cosine(c={c:g})", lambda A: ResourceProfile.cosine_offset(c, A), lo, hi)


def constant_family(lo: float = 0.5, hi: float = 2.0) -> ProfileFamily:
    return ProfileFamily("constant", ResourceProfile.constant, lo, hi)


def sampled_family(nodes: Sequence[float], shape: Sequence[float], slopes: Sequence[float],
                   c: float = 1.0, lo: float = 0.0, hi: float = 4.0) -> ProfileFamily:
    """m = c + A * phi with phi given by Hermite data; A is the search parameter."""
    shape = np.asarray(shape, dtype=float)
    slopes = np.asarray(slopes, dtype=float)
    return ProfileFamily(
        "sampled",
        lambda A: ResourceProfile.sampled(nodes, c + A * shape, A * slopes),
        lo, hi,
    )


def cosine_family_threshold(c: float) -> float:
    """Amplitude above which c + A cos(pi x) has C(m) + rho_m > 0 everywhere.

    With rho_m = (c A / pi^2) cos(pi x) and C(m) = A^2 / (2 pi^2) the minimum sits
    at x = 1 and equals (A / pi^2)(A/2 - c), positive iff A > 2c.
    """
    return 2.0 * c


def hunt_positive_sensitivity(family: ProfileFamily, budget: int = 41, n: int = 1025,
                              margin: float = 1e-10) -> Optional[ResourceProfile]:
    """Smallest family member on a uniform parameter grid with min(C(m) + rho_m) > 0.

    Deterministic: candidates are ``linspace(lo, hi, budget)`` scanned in order.
    Candidates must also have a non-negative (here: positive) mean resource.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    grid = Grid(n)
    params = np.linspace(family.lo, family.hi, budget) if budget > 1 else np.array([family.lo])
    for value in params:
        profile = family.build(float(value))
        try:
            data = compute_asymptotics(grid, profile)
        except MeanPositivityError:
            continue
        if data.min_c_plus_rho > margin * (1.0 + abs(data.c_of_m)):
            return profile
    return None
