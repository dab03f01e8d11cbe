"""Grid and remainder convergence study.

Prints manufactured-solution errors for the two linear solvers under grid
refinement and the self-convergence of M(mu) in n.  The last block reports
the large-diffusion remainder slope for a few profiles.

    python scripts/convergence_study.py
"""

import numpy as np

from loglab import (
    Grid, ResourceProfile, convergence_order, solve_helmholtz, solve_neumann_poisson_zero_mean,
    solve_with_continuation,
)

NS = (129, 257, 513, 1025, 2049)


def manufactured():
    print("n        helmholtz err   ratio    poisson err    ratio")
    prev = None
    for n in NS:
        g = Grid(n)
        c = np.cos(np.pi * g.x)
        eh = np.max(np.abs(solve_helmholtz(g, 1.0, -np.ones(n), -(1 + np.pi**2) * c) - c))
        ep = np.max(np.abs(solve_neumann_poisson_zero_mean(g, c).rho - c / np.pi**2))
        rh, rp = ("", "") if prev is None else (f"{prev[0] / eh:.3f}", f"{prev[1] / ep:.3f}")
        print(f"{n:<8} {eh:.3e}   {rh:>7}    {ep:.3e}   {rp:>7}")
        prev = (eh, ep)


def self_convergence(profile, mu):
    print(f"\nM(mu={mu:g}) for {profile.describe()}")
    values = [solve_with_continuation(Grid(n), mu, profile).M for n in NS]
    for i, n in enumerate(NS):
        diff = "" if i == 0 else f"{values[i] - values[i - 1]:+.3e}"
        ratio = "" if i < 2 else f"{(values[i - 1] - values[i - 2]) / (values[i] - values[i - 1]):.3f}"
        print(f"  n = {n:<6} M = {values[i]:.12f}  {diff:>11} {ratio:>7}")


def remainder_slopes():
    print("\nremainder slope of theta - (mean + (C + rho)/mu), lambda = 1e-2 / 2^k")
    for p in (ResourceProfile.cosine_offset(1.0, 1.0), ResourceProfile.sine_offset(1.5, 0.4),
              ResourceProfile.single_peak(0.5, 1.0)):
        print(f"  {p.describe():<32} {convergence_order(Grid(1025), p):.4f}")


if __name__ == "__main__":
    manufactured()
    self_convergence(ResourceProfile.single_peak(), 0.01)
    remainder_slopes()
