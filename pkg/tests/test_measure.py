import numpy as np
import pytest

from betagas.measure import DiscreteMeasure, cell_widths


def test_cell_widths_uniform():
    nodes = np.linspace(0, 1, 11)
    w = cell_widths(nodes)
    assert np.allclose(w, 0.1)
    assert np.isclose(w.sum(), 1.1)  # end cells extend half a step outward


def test_mass_invariant():
    m = DiscreteMeasure(np.array([0.0, 1.0]), np.array([0.5, 0.5]))
    assert np.isclose(m.weights.sum(), 1.0)
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([0.0, 1.0]), np.array([0.6, 0.6]))
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([0.0, 1.0]), np.array([1.2, -0.2]))
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([1.0, 0.0]), np.array([0.5, 0.5]))


def test_from_density_normalizes():
    nodes = np.linspace(-1, 1, 101)
    m = DiscreteMeasure.from_density(nodes, np.ones_like(nodes))
    assert np.isclose(m.weights.sum(), 1.0)
    assert np.allclose(m.density[1:-1], m.density[1])


def test_mean_and_hull():
    nodes = np.linspace(-2, 2, 201)
    w = np.exp(-nodes ** 2)
    m = DiscreteMeasure.from_weights(nodes, w)
    assert abs(m.mean()) < 1e-12
    lo, hi = m.support_hull()
    assert lo == -2.0 and hi == 2.0


def test_csv_roundtrip(tmp_path):
    nodes = np.linspace(0, 1, 17)
    m = DiscreteMeasure.from_weights(nodes, np.arange(1.0, 18.0))
    path = tmp_path / "m.csv"
    m.to_csv(path)
    back = DiscreteMeasure.from_csv(path)
    assert np.allclose(back.nodes, m.nodes)
    assert np.allclose(back.weights, m.weights)


def test_sampling_matches_weights():
    rng = np.random.default_rng(3)
    nodes = np.array([-1.0, 0.0, 1.0])
    m = DiscreteMeasure(nodes, np.array([0.2, 0.5, 0.3]))
    draws = m.sample(rng, 20000)
    # cells have width 1, so the middle node's draws fill (-0.5, 0.5)
    frac = np.mean(np.abs(draws) < 0.5)
    assert abs(frac - 0.5) < 0.02
