"""Confining potentials on interval domains, and the critical-potential builder.

A potential is a piecewise object: each piece covers one closed interval
and is a sum of terms (polynomial, power well, log field of a measure).
Pieces must agree at shared boundaries, so the whole object is continuous.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryError, ConstructionError, DomainError, InvalidSpecError
from .measure import DiscreteMeasure

CONTINUITY_TOL = 1e-9
NODE_HIT_TOL = 1e-13
FD_STEP_REL = 1e-5
GROWTH_SAMPLE_FACTORS = (1e2, 1e3)
TRUNCATION_LEVEL = 50.0 / 512.0


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    """Union of finitely many disjoint closed intervals (ends may be infinite)."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        if not ivs:
            raise ValueError("domain needs at least one interval")
        for a, b in ivs:
            if not a <= b:
                raise ValueError(f"interval [{a}, {b}] is reversed")
        for (_, b0), (a1, _) in zip(ivs, ivs[1:]):
            if not b0 < a1:
                raise ValueError("intervals must be disjoint and ascending")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def interval(cls, lo: float, hi: float) -> "Domain":
        return cls(((lo, hi),))

    @classmethod
    def real_line(cls) -> "Domain":
        return cls(((-np.inf, np.inf),))

    @property
    def hull(self) -> tuple[float, float]:
        return self.intervals[0][0], self.intervals[-1][1]

    @property
    def is_unbounded(self) -> bool:
        return np.isinf(self.hull[0]) or np.isinf(self.hull[1])

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ok = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            ok |= (x >= a) & (x <= b)
        return ok

    def uniform(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Uniform draws over the (bounded) domain, by interval length."""
        lengths = np.array([b - a for a, b in self.intervals])
        if not np.all(np.isfinite(lengths)):
            raise DomainError("uniform sampling needs a bounded domain")
        idx = rng.choice(len(self.intervals), size=size, p=lengths / lengths.sum())
        u = rng.random(size)
        lo = np.array([iv[0] for iv in self.intervals])
        return lo[idx] + u * lengths[idx]


# ---------------------------------------------------------------------------
# piece terms
# ---------------------------------------------------------------------------

class PolynomialTerm:
    """sum_k c_k x^k, ascending coefficients."""

    def __init__(self, coefficients):
        self.coefficients = np.atleast_1d(np.asarray(coefficients, dtype=float))

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coefficients)

    def derivative(self, x, order):
        c = np.polynomial.polynomial.polyder(self.coefficients, order)
        return np.polynomial.polynomial.polyval(x, c)

    def describe(self):
        return {"kind": "polynomial", "coefficients": self.coefficients.tolist()}


class WellTerm:
    """depth * (x - center)**power; the vertex contributes zero."""

    def __init__(self, depth: float, center: float, power: int = 2):
        if power < 2 or power % 2:
            raise ValueError("well power must be an even integer >= 2")
        self.depth = float(depth)
        self.center = float(center)
        self.power = int(power)

    def __call__(self, x):
        return self.depth * (np.asarray(x, dtype=float) - self.center) ** self.power

    def derivative(self, x, order):
        p, d = self.power, self.depth
        if order > p:
            return np.zeros_like(np.asarray(x, dtype=float))
        fac = 1.0
        for k in range(order):
            fac *= p - k
        return d * fac * (np.asarray(x, dtype=float) - self.center) ** (p - order)

    def describe(self):
        return {"kind": "well", "depth": self.depth, "center": self.center,
                "power": self.power}


class LogFieldTerm:
    """2 * integral of log|x-y| against a measure, plus an explicit constant."""

    def __init__(self, measure: DiscreteMeasure, constant: float = 0.0):
        self.measure = measure
        self.constant = float(constant)

    def __call__(self, x):
        return log_potential_field(self.measure, x) + self.constant

    def derivative(self, x, order):
        # no closed form on a grid measure; central differences
        x = np.asarray(x, dtype=float)
        h = FD_STEP_REL * np.maximum(1.0, np.abs(x))
        up = log_potential_field(self.measure, x + h)
        dn = log_potential_field(self.measure, x - h)
        if order == 1:
            return (up - dn) / (2 * h)
        mid = log_potential_field(self.measure, x)
        return (up - 2 * mid + dn) / (h * h)

    def describe(self):
        return {"kind": "log_field", "constant": self.constant,
                "measure_nodes": self.measure.nodes.size}


def log_potential_field(measure: DiscreteMeasure, x):
    """Evaluate f(x) = 2 * integral of log|x-y| d(measure)(y) by quadrature.

    When x coincides with a grid node the singular node is integrated with
    the midpoint-cell average of the log, log(width/2) - 1, which keeps the
    quadrature O(width^2) accurate through the integrable singularity.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x)
    nodes, weights = measure.nodes, measure.weights
    widths = measure.cells
    diff = np.abs(xv[:, None] - nodes[None, :])
    hit = diff < NODE_HIT_TOL * np.maximum(1.0, np.abs(xv))[:, None]
    safe = np.where(hit, 1.0, diff)
    logs = np.log(safe)
    if hit.any():
        diag = np.log(widths / 2.0) - 1.0
        logs = np.where(hit, diag[None, :], logs)
    out = 2.0 * logs @ weights
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    terms: tuple

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for t in self.terms:
            out = out + t(x)
        return out

    def derivative(self, x, order):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for t in self.terms:
            out = out + t.derivative(x, order)
        return out


@dataclass(frozen=True)
class Potential:
    """Piecewise potential over a Domain; immutable and safe to share."""

    domain: Domain
    pieces: tuple[Piece, ...]
    critical_info: "CriticalInfo | None" = field(default=None, compare=False)

    def __post_init__(self):
        self._check_cover()
        self._check_continuity()

    def _check_cover(self):
        for a, b in self.domain.intervals:
            lo, hi = a, b
            covered = any(p.lo <= lo and p.hi >= hi for p in self.pieces)
            if not covered:
                # allow several pieces chained over one interval
                cur = lo
                for p in sorted(self.pieces, key=lambda q: q.lo):
                    if p.lo <= cur + CONTINUITY_TOL <= p.hi or (
                            cur == lo and p.lo <= lo <= p.hi):
                        cur = max(cur, p.hi)
                if cur < hi - CONTINUITY_TOL and np.isfinite(hi):
                    raise ValueError("pieces do not cover the domain")

    def _check_continuity(self):
        for p, q in zip(self.pieces, self.pieces[1:]):
            if abs(p.hi - q.lo) < CONTINUITY_TOL:
                b = p.hi
                va, vb = float(p(b)), float(q(b))
                if abs(va - vb) > CONTINUITY_TOL:
                    raise ValueError(
                        f"discontinuity {abs(va - vb):.3e} at piece boundary {b}")

    @classmethod
    def from_polynomial(cls, coefficients, domain: Domain) -> "Potential":
        pieces = tuple(Piece(a, b, (PolynomialTerm(coefficients),))
                       for a, b in domain.intervals)
        return cls(domain, pieces)

    @classmethod
    def zero(cls, domain: Domain) -> "Potential":
        return cls.from_polynomial([0.0], domain)

    def _piece_for(self, x: float) -> Piece:
        for p in self.pieces:
            if p.lo <= x <= p.hi:
                return p
        raise DomainError(f"x={x} outside every potential piece")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x)
        if not self.domain.contains(xv).all():
            bad = xv[~self.domain.contains(xv)][0]
            raise DomainError(f"x={bad} outside the potential domain")
        out = np.full(xv.shape, np.nan)
        remaining = np.ones(xv.shape, dtype=bool)
        for p in self.pieces:
            m = remaining & (xv >= p.lo) & (xv <= p.hi)
            if m.any():
                out[m] = p(xv[m])
                remaining &= ~m
        return float(out[0]) if scalar else out

    def derivative(self, x: float, order: int) -> float:
        """Analytic derivative where available, finite differences otherwise.

        Raises BoundaryError at interior piece boundaries, where one-sided
        values may disagree.
        """
        if order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        x = float(x)
        for b in self.piece_boundaries():
            if abs(x - b) < NODE_HIT_TOL * max(1.0, abs(x)):
                raise BoundaryError(f"x={x} sits on a piece boundary")
        return float(self._piece_for(x).derivative(np.asarray(x), order))

    def piece_boundaries(self) -> list[float]:
        """Interior boundaries shared by two pieces."""
        out = []
        for p, q in zip(self.pieces, self.pieces[1:]):
            if abs(p.hi - q.lo) < CONTINUITY_TOL:
                out.append(p.hi)
        return out

    def table(self, n: int = 8192) -> tuple[np.ndarray, np.ndarray]:
        """Dense lookup table over the domain hull, for sampler hot loops."""
        lo, hi = self.domain.hull
        if not np.isfinite(lo) or not np.isfinite(hi):
            raise DomainError("tabulation needs a bounded domain")
        xs = np.linspace(lo, hi, n)
        vals = np.empty(n)
        inside = self.domain.contains(xs)
        vals[inside] = self(xs[inside])
        if not inside.all():
            # gaps between intervals are never accepted by the sampler;
            # fill them by interpolation so the table stays finite
            vals[~inside] = np.interp(xs[~inside], xs[inside], vals[inside])
        return xs, vals

    def growth_margin(self, scale: float = 1.0) -> float:
        """min of V(x) / (2 log|x|) at far-out sample points (unbounded sides)."""
        lo, hi = self.domain.hull
        xs = []
        for f in GROWTH_SAMPLE_FACTORS:
            if np.isinf(hi):
                xs.append(f * scale)
            if np.isinf(lo):
                xs.append(-f * scale)
        if not xs:
            return np.inf
        xs = np.asarray(xs)
        return float(np.min(self(xs) / (2.0 * np.log(np.abs(xs)))))


def convexity_audit(potential: Potential, lo: float, hi: float, n: int = 201,
                    order: int = 2) -> float:
    """min V'' over an interior grid of (lo, hi); positive certifies convexity."""
    xs = np.linspace(lo, hi, n + 2)[1:-1]
    boundaries = potential.piece_boundaries()
    vals = []
    for x in xs:
        if any(abs(x - b) < 1e-9 for b in boundaries):
            continue
        vals.append(potential.derivative(x, order))
    return float(np.min(vals))


# ---------------------------------------------------------------------------
# critical construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalPotentialSpec:
    """Inputs for gluing a well onto a base landscape.

    measure        equilibrium measure of the base potential
    neighborhood   open intervals A = union (a_h-, a_h+) covering supp(measure)
    well_center    c0, strictly right of the last neighborhood interval
    well_depth     d > 0, or None to match the glue point exactly
    well_power     even exponent of the well (2 = quadratic)
    epsilon        half-width of the reporting window around c0
                   (default: half the distance from c0 to the neighborhood)
    """

    measure: DiscreteMeasure
    neighborhood: tuple[tuple[float, float], ...]
    well_center: float
    well_depth: float | None = None
    well_power: int = 2
    epsilon: float | None = None

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.neighborhood)
        for (_, b0), (a1, _) in zip(ivs, ivs[1:]):
            if not b0 < a1:
                raise InvalidSpecError("neighborhood intervals must be disjoint")
        object.__setattr__(self, "neighborhood", ivs)
        slo, shi = self.measure.support_hull()
        if not (ivs[0][0] < slo and ivs[-1][1] > shi):
            raise InvalidSpecError("neighborhood must contain the measure support")
        if self.well_center <= ivs[-1][1]:
            raise InvalidSpecError("well center must lie right of the neighborhood")

    @property
    def glue_point(self) -> float:
        return self.neighborhood[-1][1]

    def resolved_epsilon(self) -> float:
        if self.epsilon is not None:
            return float(self.epsilon)
        return 0.5 * (self.well_center - self.glue_point)


@dataclass(frozen=True)
class CriticalInfo:
    """What the builder knows exactly about its output."""

    measure: DiscreteMeasure
    support: tuple[tuple[float, float], ...]
    robin_constant: float
    neighborhood: tuple[tuple[float, float], ...]
    well_center: float
    well_depth: float
    well_power: int
    epsilon: float
    base_constant: float
    glue_value: float


def _support_runs(measure: DiscreteMeasure, rel_threshold: float = 1e-3):
    dens = measure.density
    mask = dens > rel_threshold * dens.max()
    runs = []
    start = None
    for i, m in enumerate(mask):
        if m and start is None:
            start = i
        elif not m and start is not None:
            runs.append((float(measure.nodes[start]), float(measure.nodes[i - 1])))
            start = None
    if start is not None:
        runs.append((float(measure.nodes[start]), float(measure.nodes[-1])))
    return tuple(runs)


def build_critical_potential(spec: CriticalPotentialSpec, base: Potential,
                             *, right_margin: float | None = None,
                             left_margin: float | None = None,
                             truncation_level: float = TRUNCATION_LEVEL) -> Potential:
    """Glue a power well at c0 onto the effective landscape of a base potential.

    The output equals base + C on the left of the glue point and
    f + depth*(x - c0)^power on the right, where f is the log field of the
    base equilibrium measure and C makes the two sides meet.  With the
    matched depth the gap cost falls continuously from the glue point to an
    exact zero at c0, so the spec measure stays the equilibrium measure of
    the output and its effective constant is exactly zero.
    """
    mu = spec.measure
    a_left = spec.neighborhood[0][0]
    a_glue = spec.glue_point
    c0 = spec.well_center
    power = spec.well_power

    # constant shift: median of (f - W) over the support of mu
    slo, shi = mu.support_hull()
    on = (mu.nodes >= slo) & (mu.nodes <= shi)
    f_on = log_potential_field(mu, mu.nodes[on])
    base_constant = float(np.median(f_on - base(mu.nodes[on])))

    glue_value = float(base(a_glue) + base_constant - log_potential_field(mu, a_glue))
    if glue_value <= 0:
        raise ConstructionError(
            f"gap cost at the glue point is {glue_value:.3e}; nothing to match")
    depth = spec.well_depth
    if depth is None:
        depth = glue_value / (a_glue - c0) ** power
    if depth <= 0:
        raise InvalidSpecError("well depth must be positive")

    eps = spec.resolved_epsilon()
    if right_margin is None:
        right_margin = max(1.25 * eps, (truncation_level / depth) ** (1.0 / power))
    if left_margin is None:
        left_margin = 0.05 * (a_glue - a_left)
    lo = a_left - left_margin
    hi = c0 + right_margin

    base_lo = base.domain.hull[0]
    lo = max(lo, base_lo) if np.isfinite(base_lo) else lo
    domain = Domain.interval(lo, hi)

    left_terms = []
    for p in base.pieces:
        if p.lo <= lo and p.hi >= a_glue:
            left_terms = list(p.terms)
            break
    if not left_terms:
        raise InvalidSpecError("base potential must cover the glued region "
                               "with a single piece")
    left = Piece(lo, a_glue, tuple(left_terms) + (PolynomialTerm([base_constant]),))
    right = Piece(a_glue, hi,
                  (LogFieldTerm(mu), WellTerm(depth, c0, power)))

    info = CriticalInfo(
        measure=mu,
        support=_support_runs(mu),
        robin_constant=0.0,
        neighborhood=spec.neighborhood,
        well_center=c0,
        well_depth=float(depth),
        well_power=power,
        epsilon=eps,
        base_constant=base_constant,
        glue_value=glue_value,
    )
    return Potential(domain, (left, right), critical_info=info)
