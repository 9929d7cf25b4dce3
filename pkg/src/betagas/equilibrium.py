"""Equilibrium measures by convex minimization of the log-gas energy.

The energy is a convex quadratic in the node weights once the logarithmic
kernel is discretized with midpoint cells, so the minimizer over the
probability simplex is found by accelerated projected gradient descent.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (ConvergenceError, DomainError, InconsistencyError,
                     ThresholdError)
from .measure import DiscreteMeasure, cell_widths
from .potential import Domain, Potential

ATOM_THRESHOLD = 0.5
SUPPORT_THRESHOLD = 1e-3
EDGE_FIT_NODES = 4
DEFAULT_TOL = 1e-11


@dataclass(frozen=True)
class GridConfig:
    """Grid resolution for the solver; nodes are spread over the domain
    intervals proportionally to length."""

    nodes: int = 512

    def __post_init__(self):
        if self.nodes < 64:
            raise ValueError("grid resolution must be at least 64 nodes")

    def build(self, domain: Domain) -> np.ndarray:
        lengths = np.array([b - a for a, b in domain.intervals])
        if not np.all(np.isfinite(lengths)):
            raise DomainError("equilibrium grids need a bounded domain")
        alloc = np.maximum(8, np.round(self.nodes * lengths / lengths.sum()))
        alloc = alloc.astype(int)
        parts = [np.linspace(a, b, k) for (a, b), k in zip(domain.intervals, alloc)]
        return np.concatenate(parts)


def log_kernel(nodes: np.ndarray) -> np.ndarray:
    """Matrix K[i,j] = log|x_i - x_j| with the singular diagonal replaced by
    its midpoint-cell average log(width/2) - 1."""
    widths = cell_widths(nodes)
    diff = np.abs(nodes[:, None] - nodes[None, :])
    np.fill_diagonal(diff, 1.0)
    K = np.log(diff)
    np.fill_diagonal(K, np.log(widths / 2.0) - 1.0)
    return K


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (O(n log n))."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    rho = idx[u + (1.0 - css) / idx > 0][-1]
    lam = (1.0 - css[rho - 1]) / rho
    return np.maximum(v + lam, 0.0)


def energy(measure: DiscreteMeasure, potential: Potential, beta: float) -> float:
    """Log-gas energy (beta/4) * double integral of V(x)+V(y)-2log|x-y|.

    A node holding more than half the total mass is treated as an atom,
    whose logarithmic self-energy is infinite.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if not potential.domain.contains(measure.nodes).all():
        raise DomainError("measure grid leaves the potential domain")
    if measure.weights.max() >= ATOM_THRESHOLD:
        return np.inf
    K = log_kernel(measure.nodes)
    v = potential(measure.nodes)
    w = measure.weights
    return float((beta / 2.0) * (v @ w - w @ K @ w))


@dataclass(frozen=True)
class ResidualReport:
    on_support: float
    off_support: float

    def as_dict(self):
        return {"on_support": self.on_support, "off_support": self.off_support}


@dataclass(frozen=True)
class SupportInterval:
    lo: float
    hi: float
    mass: float
    lo_edge: str  # 'hard' | 'soft'
    hi_edge: str


@dataclass(frozen=True)
class EquilibriumSolution:
    measure: DiscreteMeasure
    support: tuple[SupportInterval, ...]
    robin_constant: float
    filling_fractions: np.ndarray
    residuals: ResidualReport
    support_mask: np.ndarray = field(repr=False)
    effective_potential: np.ndarray = field(repr=False)  # 2 K w - V on the grid
    iterations: int = 0

    @property
    def density(self) -> np.ndarray:
        return self.measure.density

    @property
    def support_intervals(self) -> tuple[tuple[float, float], ...]:
        return tuple((s.lo, s.hi) for s in self.support)

    @property
    def edge_classes(self) -> tuple[tuple[str, str], ...]:
        return tuple((s.lo_edge, s.hi_edge) for s in self.support)

    def summary(self) -> dict:
        return {
            "support": [[s.lo, s.hi] for s in self.support],
            "edge_classes": [[s.lo_edge, s.hi_edge] for s in self.support],
            "robin_constant": self.robin_constant,
            "filling_fractions": self.filling_fractions.tolist(),
            "residuals": self.residuals.as_dict(),
            "iterations": self.iterations,
            "nodes": int(self.measure.nodes.size),
        }

    def save(self, directory) -> None:
        from pathlib import Path
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        data = np.column_stack([self.measure.nodes, self.measure.weights,
                                self.density])
        np.savetxt(d / "measure.csv", data, delimiter=",",
                   header="node,weight,density", comments="")
        (d / "summary.json").write_text(json.dumps(self.summary(), indent=2))


def _runs(mask: np.ndarray):
    runs, start = [], None
    for i, m in enumerate(mask):
        if m and start is None:
            start = i
        elif not m and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, mask.size - 1))
    return runs


EDGE_TRIM = 2


def _on_support_residual(phi: np.ndarray, mask: np.ndarray, constant: float,
                         edge_trim: int = EDGE_TRIM) -> float:
    """Stationarity violation over support nodes, skipping the outermost
    cells of each run: a boundary cell straddles the support edge, where the
    midpoint quadrature cannot represent the density and its error is
    O(sqrt(width)) instead of O(width^2)."""
    worst = 0.0
    for i0, i1 in _runs(mask):
        trim = min(edge_trim, max((i1 - i0) // 4, 0))
        sel = slice(i0 + trim, i1 - trim + 1)
        vals = np.abs(phi[sel] - constant)
        if vals.size:
            worst = max(worst, float(vals.max()))
    return worst


def _refine_soft_edge(nodes, density, run, side: str) -> float:
    """Square-root edge estimate: density^2 is linear near a soft edge, so a
    linear fit through the outermost support nodes locates the root."""
    i0, i1 = run
    if side == "hi":
        sel = np.arange(max(i0, i1 - EDGE_FIT_NODES + 1), i1 + 1)
        fallback = nodes[i1]
    else:
        sel = np.arange(i0, min(i1, i0 + EDGE_FIT_NODES - 1) + 1)
        fallback = nodes[i0]
    if sel.size < 2:
        return float(fallback)
    x, r2 = nodes[sel], density[sel] ** 2
    slope, intercept = np.polyfit(x, r2, 1)
    if slope == 0:
        return float(fallback)
    root = -intercept / slope
    step = abs(nodes[sel[-1]] - nodes[sel[0]]) / max(sel.size - 1, 1)
    lo_ok = nodes[sel[0]] - 2 * step
    hi_ok = nodes[sel[-1]] + 2 * step
    if not lo_ok <= root <= hi_ok:
        return float(fallback)
    return float(root)


def detect_support(nodes: np.ndarray, weights: np.ndarray, domain: Domain,
                   threshold: float = SUPPORT_THRESHOLD):
    """Group nodes with density above threshold*max into intervals.

    Soft endpoints (interior to the domain) are refined by a square-root
    density fit; hard endpoints snap to the domain boundary they touch.
    Returns (intervals, filling fractions, node mask).
    """
    widths = cell_widths(nodes)
    density = weights / widths
    mask = density > threshold * density.max()
    if not mask.any():
        raise ThresholdError(f"no support nodes above threshold {threshold}")
    runs = _runs(mask)
    dom_ends = [e for iv in domain.intervals for e in iv]
    intervals = []
    for run in runs:
        i0, i1 = run
        mass = float(weights[i0:i1 + 1].sum())
        lo_hard = any(abs(nodes[i0] - e) <= 1.01 * widths[i0] for e in dom_ends)
        hi_hard = any(abs(nodes[i1] - e) <= 1.01 * widths[i1] for e in dom_ends)
        if lo_hard:
            lo = min(dom_ends, key=lambda e: abs(nodes[i0] - e))
        else:
            lo = _refine_soft_edge(nodes, density, run, "lo")
        if hi_hard:
            hi = min(dom_ends, key=lambda e: abs(nodes[i1] - e))
        else:
            hi = _refine_soft_edge(nodes, density, run, "hi")
        intervals.append(SupportInterval(
            lo=lo, hi=hi, mass=mass,
            lo_edge="hard" if lo_hard else "soft",
            hi_edge="hard" if hi_hard else "soft"))
    fractions = np.array([s.mass for s in intervals])
    return tuple(intervals), fractions, mask


def solve_equilibrium(potential: Potential, domain: Domain | None = None,
                      grid: GridConfig | None = None, *,
                      tol: float = DEFAULT_TOL, max_iter: int = 50000,
                      threshold: float = SUPPORT_THRESHOLD,
                      init: DiscreteMeasure | None = None) -> EquilibriumSolution:
    """Minimize the energy over the weight simplex (FISTA with restarts).

    The minimizer does not depend on beta, which only scales the energy, so
    the solve is run on the beta-free quadratic v.w - w K w.
    """
    domain = domain or potential.domain
    grid = grid or GridConfig()
    nodes = grid.build(domain)
    K = log_kernel(nodes)
    v = potential(nodes)

    if init is not None:
        if init.nodes.size != nodes.size or not np.allclose(init.nodes, nodes):
            raise DomainError("warm start must live on the solver grid")
        w = init.weights.copy()
    else:
        widths = cell_widths(nodes)
        w = widths / widths.sum()
    y = w.copy()
    t = 1.0
    lipschitz = 2.0 * np.linalg.norm(K, 2)
    f_prev = np.inf
    step = np.inf
    iterations = max_iter
    for it in range(max_iter):
        g = v - 2.0 * (K @ y)
        w_new = project_simplex(y - g / lipschitz)
        f_new = v @ w_new - w_new @ (K @ w_new)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = w_new + ((t - 1.0) / t_new) * (w_new - w)
        if f_new > f_prev:  # adaptive restart
            y = w_new.copy()
            t_new = 1.0
        step = float(np.abs(w_new - w).max())
        w, t, f_prev = w_new, t_new, f_new
        if step < tol:
            iterations = it + 1
            break

    measure = DiscreteMeasure.from_weights(nodes, w)
    support, fractions, mask = detect_support(nodes, w, domain, threshold)
    phi = 2.0 * (K @ w) - v
    robin = float(np.median(phi[mask]))
    on_res = _on_support_residual(phi, mask, robin)
    off = phi[~mask] - robin
    off_res = float(np.maximum(off, 0.0).max()) if off.size else 0.0
    residuals = ResidualReport(on_support=on_res, off_support=off_res)

    solver_tol = 50.0 * np.sqrt(tol)
    if step >= tol and on_res > solver_tol:
        raise ConvergenceError(
            f"no convergence after {max_iter} iterations "
            f"(step {step:.2e}, residual {on_res:.2e})", residuals=residuals)

    return EquilibriumSolution(
        measure=measure, support=support, robin_constant=robin,
        filling_fractions=fractions, residuals=residuals,
        support_mask=mask, effective_potential=phi, iterations=iterations)


def euler_lagrange_residual(solution: EquilibriumSolution,
                            potential: Potential) -> ResidualReport:
    """Recompute the stationarity residuals of a solution against a potential.

    On the support the effective potential 2*int log|x-s| dmu - V must equal
    the constant; off the support it must not exceed it.
    """
    nodes = solution.measure.nodes
    K = log_kernel(nodes)
    phi = 2.0 * (K @ solution.measure.weights) - potential(nodes)
    mask = solution.support_mask
    c = float(np.median(phi[mask]))
    on_res = _on_support_residual(phi, mask, c)
    off = phi[~mask] - c
    off_res = float(np.maximum(off, 0.0).max()) if off.size else 0.0
    return ResidualReport(on_support=on_res, off_support=off_res)


def edge_regularity_profile(solution: EquilibriumSolution,
                            interior_buffer: int = 4):
    """Edge-normalized density on interior support nodes,

        S(x) = pi * density(x) * sqrt(|prod_hard (x-a) / prod_soft (x-a)|),

    which stays bounded away from zero for regular solutions: the density
    vanishes like a square root at soft edges and diverges like an inverse
    square root at hard edges, and S cancels both behaviours.  Returns
    (positions, values); nodes within interior_buffer of a run end are
    skipped, since the cell-averaged density cannot track the edge
    singularity there.
    """
    nodes = solution.measure.nodes
    density = solution.density
    hard = [e for s in solution.support
            for e, c in ((s.lo, s.lo_edge), (s.hi, s.hi_edge)) if c == "hard"]
    soft = [e for s in solution.support
            for e, c in ((s.lo, s.lo_edge), (s.hi, s.hi_edge)) if c == "soft"]
    xs, vals = [], []
    for run in _runs(solution.support_mask):
        i0, i1 = run
        sel = np.arange(i0 + interior_buffer, i1 - interior_buffer + 1)
        if sel.size == 0:
            sel = np.arange(i0, i1 + 1)
        x = nodes[sel]
        rho = density[sel]
        if np.any(rho <= 0):
            raise InconsistencyError("nonpositive density on claimed support")
        num = np.ones_like(x)
        for a in hard:
            num = num * np.abs(x - a)
        den = np.ones_like(x)
        for a in soft:
            den = den * np.abs(x - a)
        xs.append(x)
        vals.append(np.pi * rho * np.sqrt(num / den))
    return np.concatenate(xs), np.concatenate(vals)


def check_edge_regularity(solution: EquilibriumSolution,
                          interior_buffer: int = 4) -> float:
    """min of the edge-normalized density over interior support nodes; a
    positive minimum certifies edge regularity numerically."""
    _, vals = edge_regularity_profile(solution, interior_buffer)
    return float(vals.min())
