"""Building a potential whose escape cost vanishes outside the bulk.

Recipe: take the equilibrium measure mu of a strictly convex base W, keep
W (plus a constant) left of a neighborhood A of the bulk, and continue to
the right with the log field of mu plus a quadratic well centered at c0.
The well depth is matched at the glue point, so the one-particle escape
cost falls continuously to an exact zero at c0: placing an eigenvalue
there costs only polynomial, not exponential, probability.
"""
import numpy as np

import betagas as bg

base = bg.Potential.from_polynomial([0, 0, 1], bg.Domain.interval(-3, 3))
eq = bg.solve_equilibrium(base, grid=bg.GridConfig(1024))
print(f"base equilibrium: support {eq.support_intervals[0]}, "
      f"constant {eq.robin_constant:+.5f}")

spec = bg.CriticalPotentialSpec(
    measure=eq.measure,
    neighborhood=((-2.0, 1.6),),   # open cover of the bulk
    well_center=3.313)             # strictly right of the neighborhood
crit = bg.build_critical_potential(spec, base)
info = crit.critical_info
print(f"\nmatched well depth d = {info.well_depth:.5f}  "
      f"(glue level {info.glue_value:.5f} at x = 1.6)")
print(f"well window half-width eps = {info.epsilon:.4f}, "
      f"domain {crit.domain.hull}")

rate = bg.RateFunction.from_critical(crit)
xs = np.array([1.7, 2.0, 2.5, 3.0, info.well_center, 3.6, 4.0])
print("\nescape cost profile (zero only at the well center):")
for x in xs:
    print(f"  cost({x:5.3f}) = {rate(x):.6f}")

report = bg.scan_criticality(rate, info.neighborhood)
p = report.points[0]
print(f"\nscan: critical point at {p.location:.4f}, curvature "
      f"{p.second_derivative:.5f} (= 2d), local exponent q = "
      f"{p.local_exponent:.3f}, threshold beta_q = {p.beta_threshold:.3f}")

for n in (1e2, 1e3, 1e4):
    ratio = bg.laplace_ratio(rate, info.well_center, info.epsilon, n,
                             second_derivative=2 * info.well_depth)
    print(f"Gaussian mass ratio at n = {n:.0e}: {ratio:.6f}")

# a quartic well moves the transition threshold to beta = 1/2
spec4 = bg.CriticalPotentialSpec(
    measure=eq.measure, neighborhood=((-2.0, 1.6),),
    well_center=3.313, well_power=4)
quartic = bg.build_critical_potential(spec4, base)
rate4 = bg.RateFunction.from_critical(quartic)
p4 = bg.scan_criticality(rate4, ((-2.0, 1.6),)).points[0]
print(f"\nquartic variant: q = {p4.local_exponent:.3f}, "
      f"beta_q = {p4.beta_threshold:.3f}")
