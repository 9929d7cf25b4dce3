"""Large-deviation cost of a single escaping eigenvalue.

The effective landscape of an equilibrium pair (measure, potential) is

    cost(x) = V(x) - 2 * integral log|x - s| dmu(s) + C

with C the equilibrium constant: zero on the support, positive where
escape is exponentially suppressed, and zero again at any critical point.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .equilibrium import EquilibriumSolution
from .errors import DomainError
from .measure import DiscreteMeasure
from .potential import Domain, Potential, log_potential_field

SCAN_VALUE_REL_TOL = 1e-4
PLATEAU_MIN_NODES = 3


@dataclass(frozen=True)
class RateFunction:
    """Evaluator for the escape cost of one eigenvalue."""

    measure: DiscreteMeasure
    potential: Potential
    support: tuple[tuple[float, float], ...]
    robin_constant: float

    @classmethod
    def from_solution(cls, solution: EquilibriumSolution,
                      potential: Potential) -> "RateFunction":
        return cls(measure=solution.measure, potential=potential,
                   support=solution.support_intervals,
                   robin_constant=solution.robin_constant)

    @classmethod
    def from_critical(cls, potential: Potential) -> "RateFunction":
        """Use the builder's exact knowledge of a constructed potential."""
        info = potential.critical_info
        if info is None:
            raise ValueError("potential carries no construction info")
        return cls(measure=info.measure, potential=potential,
                   support=info.support, robin_constant=info.robin_constant)

    @property
    def domain(self) -> Domain:
        return self.potential.domain

    def _on_support(self, x: np.ndarray) -> np.ndarray:
        on = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.support:
            on |= (x >= lo) & (x <= hi)
        return on

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x)
        inside = self.domain.contains(xv)
        if not inside.all():
            raise DomainError(f"x={xv[~inside][0]} outside the domain")
        out = np.zeros(xv.shape)
        off = ~self._on_support(xv)
        if off.any():
            xo = xv[off]
            out[off] = (self.potential(xo) - log_potential_field(self.measure, xo)
                        + self.robin_constant)
        return float(out[0]) if scalar else out

    def second_derivative(self, x: float, h: float = 1e-3) -> float:
        vals = self(np.array([x - h, x, x + h]))
        return float((vals[0] - 2 * vals[1] + vals[2]) / (h * h))


@dataclass(frozen=True)
class CriticalPoint:
    location: float
    second_derivative: float
    local_exponent: float
    beta_threshold: float  # 2 / local_exponent
    value: float

    def as_dict(self):
        return {"location": self.location,
                "second_derivative": self.second_derivative,
                "local_exponent": self.local_exponent,
                "beta_threshold": self.beta_threshold,
                "value": self.value}


@dataclass(frozen=True)
class CriticalityReport:
    points: tuple[CriticalPoint, ...]
    neighborhood: tuple[tuple[float, float], ...]
    tolerance: float
    plateaus: tuple[tuple[float, float], ...] = ()

    @property
    def is_critical(self) -> bool:
        return len(self.points) > 0

    def as_dict(self):
        return {"points": [p.as_dict() for p in self.points],
                "neighborhood": [list(iv) for iv in self.neighborhood],
                "tolerance": self.tolerance,
                "plateaus": [list(p) for p in self.plateaus]}

    def to_json(self, path) -> None:
        from pathlib import Path
        Path(path).write_text(json.dumps(self.as_dict(), indent=2))


def _fit_exponent(rate: RateFunction, c0: float, eps: float) -> float:
    """log-log fit of the cost on a dyadic ladder of offsets, averaging the
    two sides of c0; one-sided fits are biased by the gluing point."""
    offsets = eps / 2.0 ** np.arange(1, 4)
    lo, hi = rate.domain.hull
    vals = []
    for t in offsets:
        pair = []
        for side in (+1.0, -1.0):
            x = c0 + side * t
            if lo < x < hi:
                v = rate(x)
                if v > 0:
                    pair.append(v)
        if not pair:
            return np.nan
        vals.append(np.mean(pair))
    slope = np.polyfit(np.log(offsets), np.log(vals), 1)[0]
    return float(slope)


def scan_criticality(rate: RateFunction,
                     neighborhood: tuple[tuple[float, float], ...],
                     resolution: int = 2000,
                     value_rel_tol: float = SCAN_VALUE_REL_TOL) -> CriticalityReport:
    """Locate near-zero local minima of the escape cost outside a neighborhood.

    Scans the domain minus the closed neighborhood on a uniform grid; local
    minima whose value is below value_rel_tol times the scanned range are
    reported with a finite-difference second derivative, the local exponent
    q from a dyadic two-sided fit, and the threshold 2/q.  Runs of near-zero
    nodes are reported as plateaus rather than silently collapsed.
    """
    nbhd = tuple((float(a), float(b)) for a, b in neighborhood)
    segments = []
    for lo, hi in rate.domain.intervals:
        cur = lo
        for a, b in nbhd:
            if a > cur and min(a, hi) > cur:
                segments.append((cur, min(a, hi)))
            cur = max(cur, b)
        if cur < hi:
            segments.append((cur, hi))
    pts, vals = [], []
    total_len = sum(b - a for a, b in segments)
    if total_len <= 0:
        return CriticalityReport(points=(), neighborhood=nbhd, tolerance=0.0)
    for a, b in segments:
        k = max(8, int(round(resolution * (b - a) / total_len)))
        xs = np.linspace(a, b, k)[1:-1]  # keep off the neighborhood edge
        if xs.size:
            pts.append(xs)
            vals.append(rate(xs))
    xs = np.concatenate(pts)
    js = np.concatenate(vals)
    tol = value_rel_tol * float(js.max() - js.min())

    order = np.argsort(xs)
    xs, js = xs[order], js[order]
    near_zero = js < tol
    # plateaus: contiguous stretches of near-zero nodes
    plateaus = []
    start = None
    gapstep = np.median(np.diff(xs))
    for i in range(xs.size):
        contiguous = i > 0 and (xs[i] - xs[i - 1]) < 3 * gapstep
        if near_zero[i] and start is None:
            start = i
        elif start is not None and (not near_zero[i] or not contiguous):
            if i - start >= PLATEAU_MIN_NODES:
                plateaus.append((float(xs[start]), float(xs[i - 1])))
            start = i if near_zero[i] else None
    if start is not None and xs.size - start >= PLATEAU_MIN_NODES:
        plateaus.append((float(xs[start]), float(xs[-1])))

    points = []
    for i in range(xs.size):
        if not near_zero[i]:
            continue
        left = js[i - 1] if i > 0 and (xs[i] - xs[i - 1]) < 3 * gapstep else np.inf
        right = js[i + 1] if i + 1 < xs.size and (xs[i + 1] - xs[i]) < 3 * gapstep \
            else np.inf
        if js[i] <= left and js[i] < right:
            c0 = float(xs[i])
            # parabolic refinement when both neighbours are usable
            if np.isfinite(left) and np.isfinite(right):
                denom = left - 2 * js[i] + right
                if denom > 0:
                    c0 += 0.5 * (left - right) / denom * gapstep
            dist_a = min(abs(c0 - a) for iv in nbhd for a in iv)
            lo, hi = rate.domain.hull
            eps = 0.5 * min(dist_a, c0 - lo, hi - c0)
            h = max(1e-4, eps / 64.0)
            second = rate.second_derivative(c0, h=h)
            q = _fit_exponent(rate, c0, eps)
            points.append(CriticalPoint(
                location=c0, second_derivative=second,
                local_exponent=q,
                beta_threshold=float(2.0 / q) if q and np.isfinite(q) else np.nan,
                value=float(js[i])))
    return CriticalityReport(points=tuple(points), neighborhood=nbhd,
                             tolerance=tol, plateaus=tuple(plateaus))
