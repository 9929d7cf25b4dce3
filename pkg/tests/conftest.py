"""Shared fixtures: oracle solutions and constructed critical potentials."""
import numpy as np
import pytest

import betagas as bg


@pytest.fixture(scope="session")
def quadratic_potential():
    return bg.Potential.from_polynomial([0.0, 0.0, 1.0],
                                        bg.Domain.interval(-3.0, 3.0))


@pytest.fixture(scope="session")
def semicircle_solution(quadratic_potential):
    return bg.solve_equilibrium(quadratic_potential, grid=bg.GridConfig(512))


@pytest.fixture(scope="session")
def semicircle_solution_fine(quadratic_potential):
    return bg.solve_equilibrium(quadratic_potential, grid=bg.GridConfig(1024))


@pytest.fixture(scope="session")
def flat_potential():
    return bg.Potential.zero(bg.Domain.interval(-1.0, 1.0))


@pytest.fixture(scope="session")
def arcsine_solution(flat_potential):
    return bg.solve_equilibrium(flat_potential, grid=bg.GridConfig(512))


@pytest.fixture(scope="session")
def critical_potential(quadratic_potential, semicircle_solution_fine):
    """Main phase-transition geometry: well at 3.313 outside A = (-2, 1.6)."""
    spec = bg.CriticalPotentialSpec(
        measure=semicircle_solution_fine.measure,
        neighborhood=((-2.0, 1.6),),
        well_center=3.313)
    return bg.build_critical_potential(spec, quadratic_potential)


@pytest.fixture(scope="session")
def dilute_critical_potential(quadratic_potential, semicircle_solution_fine):
    """Shallow-occupancy geometry: well close to A, used for count scaling."""
    spec = bg.CriticalPotentialSpec(
        measure=semicircle_solution_fine.measure,
        neighborhood=((-2.0, 1.7),),
        well_center=1.85)
    return bg.build_critical_potential(spec, quadratic_potential,
                                       right_margin=0.27)


def arcsine_measure(n=512):
    """Exact cell-integrated arcsine weights on a uniform grid of [-1, 1]."""
    from betagas.measure import DiscreteMeasure, cell_widths
    from betagas.reference import arcsine_cdf
    nodes = np.linspace(-1.0, 1.0, n)
    widths = cell_widths(nodes)
    edges_lo = np.clip(nodes - widths / 2, -1.0, 1.0)
    edges_hi = np.clip(nodes + widths / 2, -1.0, 1.0)
    w = arcsine_cdf(edges_hi) - arcsine_cdf(edges_lo)
    return DiscreteMeasure.from_weights(nodes, w)


def semicircle_measure(n=512, lo=-3.0, hi=3.0):
    """Exact cell-integrated semicircle weights on a uniform grid."""
    from betagas.measure import DiscreteMeasure, cell_widths
    from betagas.reference import semicircle_cdf
    nodes = np.linspace(lo, hi, n)
    widths = cell_widths(nodes)
    w = semicircle_cdf(nodes + widths / 2) - semicircle_cdf(nodes - widths / 2)
    keep = w > 0
    return DiscreteMeasure.from_weights(nodes, np.where(keep, w, 0.0))
