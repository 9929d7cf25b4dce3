"""Equilibrium measures for three confinement landscapes.

Solves the weight-simplex minimization for a quadratic well, a flat box,
and a double well, then compares against the two closed-form solutions:
the semicircle on [-sqrt2, sqrt2] and the arcsine law on [-1, 1].
"""
import numpy as np

import betagas as bg
from betagas.reference import (ARCSINE_CONSTANT, SEMICIRCLE_CONSTANT,
                               arcsine_density, semicircle_density)


def describe(label, sol):
    print(f"\n{label}")
    for iv in sol.support:
        print(f"  support [{iv.lo:+.4f}, {iv.hi:+.4f}] "
              f"({iv.lo_edge}/{iv.hi_edge} edges, mass {iv.mass:.4f})")
    print(f"  equilibrium constant {sol.robin_constant:+.6f}")
    print(f"  stationarity residuals on/off: "
          f"{sol.residuals.on_support:.2e} / {sol.residuals.off_support:.2e}")
    print(f"  converged in {sol.iterations} iterations")


# quadratic confinement: the density is a semicircle of radius sqrt(2)
quad = bg.Potential.from_polynomial([0, 0, 1], bg.Domain.interval(-3, 3))
sol = bg.solve_equilibrium(quad, grid=bg.GridConfig(512))
describe("V(x) = x^2 on [-3, 3]", sol)
err = np.abs(sol.density - semicircle_density(sol.measure.nodes)).max()
print(f"  sup distance to the exact semicircle density: {err:.2e}")
print(f"  constant vs exact -(1+log 2): "
      f"{abs(sol.robin_constant - SEMICIRCLE_CONSTANT):.2e}")

# no confinement on a box: the arcsine law with hard edges
flat = bg.Potential.zero(bg.Domain.interval(-1, 1))
sol = bg.solve_equilibrium(flat, grid=bg.GridConfig(512))
describe("V = 0 on [-1, 1]", sol)
away = np.abs(sol.measure.nodes) < 0.9
err = np.abs(sol.density - arcsine_density(sol.measure.nodes))[away].max()
print(f"  sup distance to the arcsine density (|x| < 0.9): {err:.2e}")
print(f"  constant vs exact -2 log 2: "
      f"{abs(sol.robin_constant - ARCSINE_CONSTANT):.2e}")
print(f"  edge-normalized density minimum: "
      f"{bg.check_edge_regularity(sol):.4f} (should be near 1)")

# double well: the support splits into two cuts with equal mass
dw = bg.Potential.from_polynomial([0, 0, -3, 0, 1], bg.Domain.interval(-3, 3))
sol = bg.solve_equilibrium(dw, grid=bg.GridConfig(512))
describe("V(x) = x^4 - 3 x^2 on [-3, 3]", sol)
print(f"  filling fractions: {np.round(sol.filling_fractions, 4)}")
