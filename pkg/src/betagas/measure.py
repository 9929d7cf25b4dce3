"""Discrete probability measures on a real grid."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASS_TOL = 1e-12


def cell_widths(nodes: np.ndarray) -> np.ndarray:
    """Midpoint-cell widths for an ascending grid.

    Interior cells run between the midpoints of neighbouring nodes; the
    first and last cells are extended symmetrically.
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.size == 1:
        return np.ones(1)
    edges = np.empty(nodes.size + 1)
    edges[1:-1] = 0.5 * (nodes[1:] + nodes[:-1])
    edges[0] = nodes[0] - 0.5 * (nodes[1] - nodes[0])
    edges[-1] = nodes[-1] + 0.5 * (nodes[-1] - nodes[-2])
    return np.diff(edges)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Nonnegative weights on an ascending grid, summing to one.

    The grid stands in for a probability measure on the real line; the
    weight of a node is the mass of its midpoint cell.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.ascontiguousarray(np.asarray(self.nodes, dtype=float))
        weights = np.ascontiguousarray(np.asarray(self.weights, dtype=float))
        if nodes.ndim != 1 or weights.shape != nodes.shape:
            raise ValueError("nodes and weights must be matching 1-d arrays")
        if nodes.size == 0:
            raise ValueError("empty measure")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly ascending")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(weights.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"weights must sum to 1 (got {weights.sum()!r})")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_weights(cls, nodes, weights) -> "DiscreteMeasure":
        """Build a measure, renormalizing exactly (weights must be >= 0)."""
        weights = np.asarray(weights, dtype=float)
        total = weights.sum()
        if total <= 0:
            raise ValueError("total mass must be positive")
        return cls(np.asarray(nodes, dtype=float), weights / total)

    @classmethod
    def from_density(cls, nodes, density) -> "DiscreteMeasure":
        """Build a measure from density values via midpoint-cell masses."""
        nodes = np.asarray(nodes, dtype=float)
        w = np.asarray(density, dtype=float) * cell_widths(nodes)
        return cls.from_weights(nodes, w)

    @property
    def cells(self) -> np.ndarray:
        return cell_widths(self.nodes)

    @property
    def density(self) -> np.ndarray:
        return self.weights / self.cells

    def mean(self, f=None) -> float:
        """Integral of f against the measure (identity if f is None)."""
        vals = self.nodes if f is None else f(self.nodes)
        return float(self.weights @ vals)

    def support_hull(self, rel_threshold: float = 1e-12) -> tuple[float, float]:
        idx = np.where(self.weights > rel_threshold * self.weights.max())[0]
        return float(self.nodes[idx[0]]), float(self.nodes[idx[-1]])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw points from the measure, jittered uniformly within cells."""
        idx = rng.choice(self.nodes.size, size=size, p=self.weights)
        jitter = (rng.random(size) - 0.5) * self.cells[idx]
        return self.nodes[idx] + jitter

    def to_csv(self, path) -> None:
        data = np.column_stack([self.nodes, self.weights])
        np.savetxt(path, data, delimiter=",", header="node,weight", comments="")

    @classmethod
    def from_csv(cls, path) -> "DiscreteMeasure":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1])
