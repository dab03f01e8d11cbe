"""Uniform grid on [0, 1] with mirror-ghost Neumann operators and direct solves.

All operators work in the floating dtype of their inputs, so extended
precision (``np.longdouble``) fields stay extended end to end.

The mirror-ghost Laplacian ``L`` is self-adjoint with respect to the
trapezoid weights ``W``: ``u @ W @ L v == v @ W @ L u`` and
``-u @ W @ L u == sum((u[i+1] - u[i])**2) / h``.  The integration-by-parts
identities used elsewhere in the package rely on this pairing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import SingularOperatorError

__all__ = [
    "Grid",
    "as_field",
    "neumann_laplacian_apply",
    "derivative",
    "integrate",
    "gradient_energy",
    "helmholtz_apply",
    "solve_helmholtz",
    "solve_tridiagonal",
    "solve_bordered_tridiagonal",
    "NeumannPoissonSolution",
    "solve_neumann_poisson_zero_mean",
    "PIVOT_RTOL",
]

PIVOT_RTOL = 1e-14
HELMHOLTZ_RTOL = 1e-12


@dataclass(frozen=True)
class Grid:
    n: int = 1025

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"grid needs an integer node count >= 3, got {self.n!r}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n - 1)

    @cached_property
    def x(self) -> np.ndarray:
        x = np.arange(self.n, dtype=float) / (self.n - 1)
        x.setflags(write=False)
        return x

    def spacing(self, dtype=float):
        return np.asarray(1, dtype=dtype) / np.asarray(self.n - 1, dtype=dtype)

    def weights(self, dtype=float) -> np.ndarray:
        w = np.full(self.n, self.spacing(dtype), dtype=dtype)
        w[0] = w[-1] = w[0] / 2
        return w

    def sample(self, fn) -> np.ndarray:
        return np.asarray(fn(self.x), dtype=float)


def _dtype(*arrays):
    return np.result_type(*[np.asarray(a) for a in arrays], np.float64)


def as_field(grid: Grid, u, dtype=None) -> np.ndarray:
    """Validate ``u`` as a finite nodal field on ``grid``."""
    arr = np.asarray(u, dtype=dtype if dtype is not None else _dtype(u))
    if arr.ndim == 0:
        arr = np.full(grid.n, arr, dtype=arr.dtype)
    if arr.shape != (grid.n,):
        raise ValueError(f"field has shape {arr.shape}, grid has {grid.n} nodes")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field contains non-finite entries")
    return arr


def neumann_laplacian_apply(grid: Grid, u) -> np.ndarray:
    u = as_field(grid, u)
    h = grid.spacing(u.dtype)
    out = np.empty_like(u)
    out[1:-1] = (u[:-2] - 2 * u[1:-1] + u[2:]) / (h * h)
    out[0] = 2 * (u[1] - u[0]) / (h * h)
    out[-1] = 2 * (u[-2] - u[-1]) / (h * h)
    return out


def derivative(grid: Grid, u) -> np.ndarray:
    """Central differences inside, second-order one-sided stencils at the ends."""
    u = as_field(grid, u)
    h = grid.spacing(u.dtype)
    out = np.empty_like(u)
    out[1:-1] = (u[2:] - u[:-2]) / (2 * h)
    out[0] = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h)
    out[-1] = (3 * u[-1] - 4 * u[-2] + u[-3]) / (2 * h)
    return out


def integrate(grid: Grid, u):
    """Composite trapezoid rule, summed before the single division by n - 1."""
    u = as_field(grid, u)
    total = np.sum(u) - (u[0] + u[-1]) / 2
    return total / np.asarray(grid.n - 1, dtype=u.dtype)


def gradient_energy(grid: Grid, u):
    """Discrete Dirichlet energy ``sum((u[i+1]-u[i])^2)/h``.

    Equal to ``-integrate(u * L u)`` exactly in exact arithmetic; this is the
    quantity that plays the role of the integral of (u')^2 in every identity.
    """
    u = as_field(grid, u)
    d = np.diff(u)
    return (d @ d) / grid.spacing(u.dtype)


def _helmholtz_bands(grid: Grid, mu, c):
    dtype = c.dtype
    h = grid.spacing(dtype)
    k = np.asarray(mu, dtype=dtype) / (h * h)
    diag = c - 2 * k
    upper = np.full(grid.n, k, dtype=dtype)
    lower = np.full(grid.n, k, dtype=dtype)
    upper[0] = 2 * k
    lower[-1] = 2 * k
    upper[-1] = 0
    lower[0] = 0
    return lower, diag, upper, k


def helmholtz_apply(grid: Grid, mu, c, v) -> np.ndarray:
    """``(mu * L + diag(c)) v``."""
    c = as_field(grid, c)
    v = as_field(grid, v)
    return mu * neumann_laplacian_apply(grid, v) + c * v


def _tolist(a):
    return a.tolist() if a.dtype == np.float64 else list(a)


def solve_tridiagonal(lower, diag, upper, rhs, scale=None) -> np.ndarray:
    """Thomas elimination without pivoting.

    Row i reads ``lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]``.
    Raises :class:`SingularOperatorError` when a pivot falls below
    ``PIVOT_RTOL * scale``.
    """
    dtype = _dtype(lower, diag, upper, rhs)
    a, b, c, d = (_tolist(np.asarray(v, dtype=dtype)) for v in (lower, diag, upper, rhs))
    n = len(b)
    if scale is None:
        scale = float(np.max(np.abs(diag)) + np.max(np.abs(lower)) + np.max(np.abs(upper)))
    thresh = PIVOT_RTOL * scale
    cp = [0.0] * n
    dp = [0.0] * n
    for i in range(n):
        piv = b[i] - a[i] * cp[i - 1] if i else b[i]
        if not abs(piv) > thresh:
            raise SingularOperatorError(
                f"pivot {float(piv):.3e} at row {i} below {thresh:.3e}", pivot=float(piv), index=i
            )
        cp[i] = c[i] / piv
        dp[i] = (d[i] - a[i] * dp[i - 1]) / piv if i else d[i] / piv
    x = dp[:]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.asarray(x, dtype=dtype)


def solve_bordered_tridiagonal(lower, diag, upper, col, row, corner, rhs, rhs_extra=0.0):
    """Solve the (n+1)x(n+1) bordered system

        [ T    col ] [x]   [rhs      ]
        [ row  corner] [s] = [rhs_extra]

    with T tridiagonal.  The first n-1 unknowns are eliminated by a Thomas
    sweep that carries the border column along; the remaining 2x2 block in
    ``(x[n-1], s)`` is solved directly.  T itself may be singular (only its
    leading (n-1)x(n-1) block must not be).
    """
    dtype = _dtype(lower, diag, upper, col, row, rhs)
    a, b, c, e, d = (_tolist(np.asarray(v, dtype=dtype)) for v in (lower, diag, upper, col, rhs))
    w = np.asarray(row, dtype=dtype)
    n = len(b)
    scale = float(np.max(np.abs(diag)) + np.max(np.abs(lower)) + np.max(np.abs(upper)))
    thresh = PIVOT_RTOL * scale
    C = [0.0] * n
    D = [0.0] * n
    E = [0.0] * n
    for i in range(n - 1):
        if i:
            piv = b[i] - a[i] * C[i - 1]
            di = d[i] - a[i] * D[i - 1]
            ei = e[i] - a[i] * E[i - 1]
        else:
            piv, di, ei = b[0], d[0], e[0]
        if not abs(piv) > thresh:
            raise SingularOperatorError(
                f"pivot {float(piv):.3e} at row {i} below {thresh:.3e}", pivot=float(piv), index=i
            )
        C[i] = c[i] / piv
        D[i] = di / piv
        E[i] = ei / piv
    # last row of T after elimination: bl * x[n-1] + el * s = dl
    bl = b[-1] - a[-1] * C[-2]
    dl = d[-1] - a[-1] * D[-2]
    el = e[-1] - a[-1] * E[-2]
    # x[i] = p[i] + q[i] x[n-1] + r[i] s
    p = [0.0] * n
    q = [0.0] * n
    r = [0.0] * n
    q[-1] = 1.0
    for i in range(n - 2, -1, -1):
        p[i] = D[i] - C[i] * p[i + 1]
        q[i] = -C[i] * q[i + 1]
        r[i] = -E[i] - C[i] * r[i + 1]
    P, Q, R = (np.asarray(v, dtype=dtype) for v in (p, q, r))
    block = np.array([[bl, el], [w @ Q, w @ R + corner]], dtype=dtype)
    tail = np.array([dl, rhs_extra - w @ P], dtype=dtype)
    det = block[0, 0] * block[1, 1] - block[0, 1] * block[1, 0]
    bscale = float(np.max(np.abs(block))) ** 2
    if not abs(det) > PIVOT_RTOL * bscale * max(scale, 1.0):
        raise SingularOperatorError(f"bordered block is singular (det {float(det):.3e})",
                                    pivot=float(det), index=n - 1)
    xl = (tail[0] * block[1, 1] - block[0, 1] * tail[1]) / det
    s = (block[0, 0] * tail[1] - block[1, 0] * tail[0]) / det
    return P + Q * xl + R * s, s


def solve_helmholtz(grid: Grid, mu, c, rhs) -> np.ndarray:
    """Solve ``(mu * L + diag(c)) v = rhs`` with mirror-ghost Neumann rows.

    Accuracy is checked as a normwise backward error:
    ``|A v - rhs|_inf <= 1e-12 * (|rhs|_inf + |A|_inf |v|_inf)``; up to two
    steps of iterative refinement are taken if the first solve misses it.
    """
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu!r}")
    dtype = _dtype(c, rhs)
    c = as_field(grid, c, dtype)
    rhs = as_field(grid, rhs, dtype)
    lower, diag, upper, k = _helmholtz_bands(grid, mu, c)
    anorm = float(4 * k + np.max(np.abs(c)))
    v = solve_tridiagonal(lower, diag, upper, rhs, scale=anorm)
    for _ in range(2):
        res = helmholtz_apply(grid, mu, c, v) - rhs
        bound = HELMHOLTZ_RTOL * (float(np.max(np.abs(rhs))) + anorm * float(np.max(np.abs(v))))
        if float(np.max(np.abs(res))) <= bound:
            return v
        v = v - solve_tridiagonal(lower, diag, upper, res, scale=anorm)
    raise SingularOperatorError(
        "Helmholtz solve failed its backward-error check (operator numerically singular)"
    )


def helmholtz_backward_error(grid: Grid, mu, c, v, rhs) -> float:
    """``|A v - rhs| / (|rhs| + |A| |v|)`` in the sup norm."""
    c = as_field(grid, c)
    anorm = float(4 * mu / grid.h**2 + np.max(np.abs(c)))
    res = float(np.max(np.abs(helmholtz_apply(grid, mu, c, v) - rhs)))
    denom = float(np.max(np.abs(rhs))) + anorm * float(np.max(np.abs(v)))
    return res / denom if denom > 0 else res


@dataclass(frozen=True)
class NeumannPoissonSolution:
    rho: np.ndarray
    multiplier: float
    warning: Optional[str] = None


def solve_neumann_poisson_zero_mean(grid: Grid, rhs, check_compatibility: bool = True
                                    ) -> NeumannPoissonSolution:
    """Zero-mean solution of ``L rho = -(rhs - mean(rhs))``.

    The singular Neumann Laplacian is bordered with a constant column (one
    Lagrange multiplier) and the trapezoid-weight row enforcing zero mean.
    Callers that build ``rhs`` with its mean already removed may switch the
    compatibility warning off; rounding in that construction is not a defect.
    """
    rhs = as_field(grid, rhs)
    dtype = rhs.dtype
    w = grid.weights(dtype)
    mean = w @ rhs
    scale = float(np.max(np.abs(rhs)))
    warning = None
    if check_compatibility and abs(float(mean)) > 1e-6 * scale:
        warning = f"incompatible data: mean {float(mean):.3e} removed before solving"
        warnings.warn(warning, RuntimeWarning, stacklevel=2)
    data = -(rhs - mean)
    lower, diag, upper, _ = _helmholtz_bands(grid, 1, np.zeros(grid.n, dtype=dtype))
    rho, s = solve_bordered_tridiagonal(
        lower, diag, upper, np.ones(grid.n, dtype=dtype), w, 0, data, 0
    )
    return NeumannPoissonSolution(rho=rho, multiplier=float(s), warning=warning)
