"""Escape-probability experiments, exponent fits, and diagnostics."""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import (ConfigError, PreconditionError, SaturationError,
                     UndersampleError)
from .potential import Potential
from .ratefn import RateFunction, scan_criticality
from .sampler import ChainConfig, ChainGroupResult, run_chain_group
from .stats import (integrated_autocorr_time, least_squares_line,
                    wilson_interval)

CERT_EXPONENT_TOL = 0.2


# ---------------------------------------------------------------------------
# escape tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainBudget:
    """Monte Carlo effort per table cell (one N value)."""

    chains: int = 16
    sweeps: int = 20000
    burn_in: int = 3000
    sweeps_by_n: tuple[tuple[int, int], ...] = ()

    def sweeps_for(self, n: int) -> int:
        for key, val in self.sweeps_by_n:
            if key == n:
                return val
        return self.sweeps


@dataclass(frozen=True)
class EscapeRow:
    n: int
    chains: int
    sweeps: int
    p_hat: float
    ci_low: float
    ci_high: float
    mean_count: float
    mean_near_count: float
    n_effective: float

    @property
    def z_ratio(self) -> float:
        # frequency of the complement event, by construction
        return 1.0 - self.p_hat

    def as_dict(self):
        d = {"n": self.n, "chains": self.chains, "sweeps": self.sweeps,
             "p_hat": self.p_hat, "ci_low": self.ci_low, "ci_high": self.ci_high,
             "mean_count": self.mean_count,
             "mean_near_count": self.mean_near_count,
             "n_effective": self.n_effective, "z_ratio": self.z_ratio}
        return d


@dataclass(frozen=True)
class EscapeTable:
    beta: float
    rows: tuple[EscapeRow, ...]
    seed: int

    def row_for(self, n: int) -> EscapeRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)

    def as_dict(self):
        return {"beta": self.beta, "seed": self.seed,
                "rows": [r.as_dict() for r in self.rows]}

    def to_json(self, path):
        from pathlib import Path
        Path(path).write_text(json.dumps(self.as_dict(), indent=2))

    def to_csv(self, path):
        lines = ["n,chains,sweeps,p_hat,ci_low,ci_high,mean_count,"
                 "mean_near_count,n_effective,z_ratio"]
        for r in self.rows:
            lines.append(f"{r.n},{r.chains},{r.sweeps},{r.p_hat!r},{r.ci_low!r},"
                         f"{r.ci_high!r},{r.mean_count!r},{r.mean_near_count!r},"
                         f"{r.n_effective!r},{r.z_ratio!r}")
        from pathlib import Path
        Path(path).write_text("\n".join(lines) + "\n")


def certify_critical(potential: Potential,
                     region_a: tuple[tuple[float, float], ...],
                     resolution: int = 2000):
    """Scan certificate: exactly one near-quadratic zero outside the region."""
    if potential.critical_info is None:
        raise PreconditionError("potential carries no construction info; "
                                "build it with build_critical_potential")
    rate = RateFunction.from_critical(potential)
    report = scan_criticality(rate, region_a, resolution=resolution)
    if len(report.points) != 1:
        raise PreconditionError(
            f"expected exactly one critical point, scan found "
            f"{len(report.points)}")
    point = report.points[0]
    if abs(point.local_exponent - 2.0) > CERT_EXPONENT_TOL:
        raise PreconditionError(
            f"critical point at {point.location:.4f} has exponent "
            f"{point.local_exponent:.3f}, not quadratic")
    return report


def _escape_cell(config: ChainConfig, chains: int) -> ChainGroupResult:
    return run_chain_group(config, chains)


def _indicator_stats(group: ChainGroupResult):
    ind = group.escape_indicator()  # [record, chain]
    p_hat = float(ind.mean())
    taus = [integrated_autocorr_time(ind[:, c]) for c in range(ind.shape[1])]
    n_eff = float(sum(ind.shape[0] / t for t in taus))
    lo, hi = wilson_interval(p_hat * n_eff, n_eff)
    return p_hat, lo, hi, n_eff


def escape_probability(potential: Potential,
                       region_a: tuple[tuple[float, float], ...],
                       well_center: float, epsilon: float, beta: float,
                       n_list: list[int], budget: ChainBudget,
                       seed: int = 0, workers: int = 1,
                       certify: bool = True,
                       teleport_prob: float = 0.25) -> EscapeTable:
    """Stationary frequency of the escape event {some particle outside A},
    per dimension N, with autocorrelation-corrected Wilson intervals."""
    if certify:
        certify_critical(potential, region_a)
    info = potential.critical_info
    init = info.measure if info is not None else None
    ss = np.random.SeedSequence(seed)
    children = ss.spawn(len(n_list))
    jobs = []
    for n, child in zip(n_list, children):
        cfg = ChainConfig(
            n_particles=n, beta=beta, potential=potential,
            sweeps=budget.sweeps_for(n), burn_in=budget.burn_in, thinning=1,
            seed=child.generate_state(1)[0], region_a=region_a,
            well_center=well_center, epsilon=epsilon,
            teleport_prob=teleport_prob, init_measure=init)
        jobs.append((cfg, budget.chains))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            groups = list(pool.map(_escape_cell, *zip(*jobs)))
    else:
        groups = [_escape_cell(cfg, ch) for cfg, ch in jobs]
    rows = []
    for (cfg, chains), group in zip(jobs, groups):
        p_hat, lo, hi, n_eff = _indicator_stats(group)
        rows.append(EscapeRow(
            n=cfg.n_particles, chains=chains, sweeps=cfg.sweeps,
            p_hat=p_hat, ci_low=lo, ci_high=hi,
            mean_count=float(group.escape_counts.mean()),
            mean_near_count=float(group.near_counts.mean()),
            n_effective=n_eff))
    return EscapeTable(beta=beta, rows=tuple(rows), seed=seed)


# ---------------------------------------------------------------------------
# exponent fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    stderr: float
    r_squared: float
    n_range: tuple[int, ...]
    kind: str            # 'probability' or 'count'
    theory_slope: float

    def as_dict(self):
        return {"slope": self.slope, "intercept": self.intercept,
                "stderr": self.stderr, "r_squared": self.r_squared,
                "n_range": list(self.n_range), "kind": self.kind,
                "theory_slope": self.theory_slope}


def fit_escape_exponent(table: EscapeTable) -> ExponentFit:
    """Least-squares slope of the escape statistics against dimension.

    Above the transition the frequency itself decays polynomially and is
    fitted directly; below it the frequency saturates toward one, so the
    expected escapee count carries the growth law instead.
    """
    if len(table.rows) < 3:
        raise ConfigError("exponent fit needs at least 3 dimensions")
    for r in table.rows:
        if not 0.0 < r.p_hat < 1.0:
            raise SaturationError(
                f"escape frequency saturated at N={r.n} (p_hat={r.p_hat})",
                n_values=[r.n])
    ns = np.array([r.n for r in table.rows], dtype=float)
    if table.beta > 1.0:
        ys = np.array([r.p_hat for r in table.rows])
        kind = "probability"
    else:
        ys = np.array([r.mean_count for r in table.rows])
        kind = "count"
    fit = least_squares_line(np.log(ns), np.log(ys))
    return ExponentFit(slope=fit.slope, intercept=fit.intercept,
                       stderr=fit.stderr, r_squared=fit.r_squared,
                       n_range=tuple(int(r.n) for r in table.rows), kind=kind,
                       theory_slope=(1.0 - table.beta) / 2.0)


# ---------------------------------------------------------------------------
# local Gaussian approximation quality
# ---------------------------------------------------------------------------

def laplace_ratio(rate, well_center: float, epsilon: float, n: float,
                  second_derivative: float | None = None) -> float:
    """Quadrature mass of exp(-n * cost) near the well over its Gaussian
    approximation sqrt(2 pi / (n * cost''(c0))); approaches one as n grows."""
    if second_derivative is None:
        h = 1e-3 * max(epsilon, 1e-3)
        vals = [float(rate(np.asarray(x)))
                for x in (well_center - h, well_center, well_center + h)]
        second_derivative = (vals[0] - 2 * vals[1] + vals[2]) / (h * h)
    if second_derivative <= 0:
        raise ConfigError("well curvature must be positive")

    def integrand(x):
        return np.exp(-n * float(rate(np.asarray(x))))

    mass, _ = quad(integrand, well_center - epsilon, well_center + epsilon,
                   epsabs=1e-15, epsrel=1e-13, limit=200,
                   points=(well_center,))
    return float(mass / np.sqrt(2.0 * np.pi / (n * second_derivative)))


# ---------------------------------------------------------------------------
# linear-statistics variance diagnostic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarianceRow:
    n: int
    variance: float
    n_effective: float


@dataclass(frozen=True)
class VarianceReport:
    rows: tuple[VarianceRow, ...]

    def ratio(self, n_small: int, n_large: int) -> float:
        by_n = {r.n: r.variance for r in self.rows}
        return by_n[n_large] / by_n[n_small]

    def as_dict(self):
        return {"rows": [{"n": r.n, "variance": r.variance,
                          "n_effective": r.n_effective} for r in self.rows]}


def concentration_diagnostic(samples_by_n: dict[int, np.ndarray], h,
                             min_effective: float = 100.0) -> VarianceReport:
    """Variance of the linear statistic sum_i h(lambda_i) per dimension.

    Boundedness of these variances across N (no linear growth) is the
    testable signature of concentration for smooth test functions.
    """
    rows = []
    for n, samples in sorted(samples_by_n.items()):
        samples = np.asarray(samples, dtype=float)
        if samples.ndim == 2:
            samples = samples[:, None, :]
        stat = h(samples).sum(axis=2)  # [record, chain]
        taus = [integrated_autocorr_time(stat[:, c])
                for c in range(stat.shape[1])]
        n_eff = float(sum(stat.shape[0] / t for t in taus))
        if n_eff < min_effective:
            raise UndersampleError(
                f"only {n_eff:.0f} effective samples at N={n}")
        rows.append(VarianceRow(n=int(n), variance=float(stat.var(ddof=1)),
                                n_effective=n_eff))
    return VarianceReport(rows=tuple(rows))


# ---------------------------------------------------------------------------
# phase-transition summary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseTransitionReport:
    n: int
    tables: tuple[EscapeTable, ...]
    transition_pass: bool
    notes: tuple[str, ...] = ()
    fits: tuple[ExponentFit, ...] = ()
    control_pass: bool | None = None

    def as_dict(self):
        return {"n": self.n,
                "tables": [t.as_dict() for t in self.tables],
                "transition_pass": self.transition_pass,
                "notes": list(self.notes),
                "fits": [f.as_dict() for f in self.fits],
                "control_pass": self.control_pass}

    def to_json(self, path):
        from pathlib import Path
        Path(path).write_text(json.dumps(self.as_dict(), indent=2))


def validate_beta_list(betas) -> None:
    for b in betas:
        if b == 1.0:
            raise ConfigError(
                "beta = 1 is the boundary of the escape alternative and is "
                "excluded; run beta < 1 or beta > 1")
    if betas and not (min(betas) < 1.0 < max(betas)):
        raise ConfigError("beta list should straddle 1 to exhibit the "
                          "transition")


def phase_transition_report(potential: Potential,
                            region_a: tuple[tuple[float, float], ...],
                            well_center: float, epsilon: float,
                            beta_list: list[float], n: int,
                            budget: ChainBudget, seed: int = 0,
                            workers: int = 1,
                            fits: tuple[ExponentFit, ...] = (),
                            teleport_prob: float = 0.25
                            ) -> PhaseTransitionReport:
    """Compare escape frequencies across beta at fixed N; PASS requires every
    subcritical row to dominate every supercritical row with disjoint
    confidence intervals."""
    if not beta_list:
        return PhaseTransitionReport(n=n, tables=(), transition_pass=False,
                                     notes=("empty beta list",))
    validate_beta_list(beta_list)
    certify_critical(potential, region_a)
    tables = []
    ss = np.random.SeedSequence(seed)
    for beta, child in zip(beta_list, ss.spawn(len(beta_list))):
        tables.append(escape_probability(
            potential, region_a, well_center, epsilon, beta, [n], budget,
            seed=int(child.generate_state(1)[0]), workers=workers,
            certify=False, teleport_prob=teleport_prob))
    low = [t.rows[0] for t in tables if t.beta < 1.0]
    high = [t.rows[0] for t in tables if t.beta > 1.0]
    ok = all(lo.ci_low > hi.ci_high
             for lo in low for hi in high) if low and high else False
    notes = []
    for t in tables:
        r = t.rows[0]
        notes.append(f"beta={t.beta}: p_hat={r.p_hat:.4f} "
                     f"[{r.ci_low:.4f}, {r.ci_high:.4f}]")
    return PhaseTransitionReport(n=n, tables=tuple(tables),
                                 transition_pass=ok, notes=tuple(notes),
                                 fits=tuple(fits))


def noncritical_control(potential: Potential,
                        region_a: tuple[tuple[float, float], ...],
                        n: int, budget: ChainBudget, beta: float = 2.0,
                        seed: int = 0, threshold: float = 0.01) -> dict:
    """Control run for a non-critical potential: the escape frequency must sit
    at the noise floor, and no exponent fit is attempted on it."""
    cfg = ChainConfig(
        n_particles=n, beta=beta, potential=potential,
        sweeps=budget.sweeps, burn_in=budget.burn_in, thinning=1,
        seed=seed, region_a=region_a, teleport_prob=0.25)
    group = run_chain_group(cfg, budget.chains)
    p_hat = float(group.escape_indicator().mean())
    return {"p_hat": p_hat, "threshold": threshold,
            "control_pass": bool(p_hat < threshold),
            "label": "non-critical control PASS" if p_hat < threshold
                     else "non-critical control FAIL"}
