"""Metropolis sampling of the log-gas and the tridiagonal oracle.

The chain state is the full vector of particle positions.  One sweep
proposes a move for every particle in turn: a Gaussian step by default,
or (free mode) a uniform teleport across the domain with a small
per-particle probability, which lets particles cross cost barriers whose
local crossing time would otherwise be exponential.  Both proposal types
are Metropolis-corrected, so the mixture kernel is exactly stationary.

Several chains are advanced together as rows of a (chains, particles)
array; the per-particle arithmetic is then vectorized across chains.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConfigError, MarginError
from .measure import DiscreteMeasure
from .potential import Domain, Potential
from .stats import integrated_autocorr_time

TABLE_SIZE = 8192
TUNE_INTERVAL = 50
TUNE_TARGET = 0.4
CACHE_AUDIT_TOL = 1e-8
DEFAULT_TELEPORT = 0.25


# ---------------------------------------------------------------------------
# configuration and state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainConfig:
    n_particles: int
    beta: float
    potential: Potential
    domain: Domain | None = None
    sweeps: int = 10000
    burn_in: int = 2000
    thinning: int = 10
    proposal_scale: float | None = None  # None: auto from density scale
    seed: int = 0
    mode: str = "free"  # 'free' | 'restricted'
    filling: tuple[int, ...] | None = None      # restricted: counts per box
    boxes: tuple[tuple[float, float], ...] | None = None
    teleport_prob: float = DEFAULT_TELEPORT     # per particle, free mode only
    region_a: tuple[tuple[float, float], ...] | None = None
    well_center: float | None = None
    epsilon: float | None = None
    histogram_edges: np.ndarray | None = None
    tune: bool = True
    init_measure: DiscreteMeasure | None = None
    table_size: int = TABLE_SIZE

    def __post_init__(self):
        if self.n_particles < 1:
            raise ConfigError("need at least one particle")
        if self.beta <= 0:
            raise ConfigError("beta must be positive")
        if self.sweeps <= 0:
            raise ConfigError("sweeps must be positive")
        if self.burn_in < 0 or self.thinning < 1:
            raise ConfigError("bad burn-in or thinning")
        if self.mode not in ("free", "restricted"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode == "restricted":
            if self.filling is None or self.boxes is None:
                raise ConfigError("restricted mode needs filling and boxes")
            if sum(self.filling) != self.n_particles:
                raise ConfigError("filling fractions must sum to the "
                                  "particle count")
            for (_, b0), (a1, _) in zip(self.boxes, self.boxes[1:]):
                if not b0 <= a1:
                    raise ConfigError("boxes must be disjoint")
        dom = self.domain or self.potential.domain
        if not all(np.isfinite(e) for iv in dom.intervals for e in iv):
            raise ConfigError("sampling needs a bounded domain")
        object.__setattr__(self, "domain", dom)

    def resolved_regions(self):
        if self.mode == "restricted":
            return self.boxes
        return self.domain.intervals


@dataclass
class EnsembleState:
    """Positions plus the cached per-particle interaction sums."""

    positions: np.ndarray
    pair_sums: np.ndarray | None = None
    seed_lineage: tuple[int, ...] = ()

    def with_fresh_sums(self) -> "EnsembleState":
        return EnsembleState(self.positions.copy(),
                             pair_log_sums(self.positions[None, :])[0],
                             self.seed_lineage)


@dataclass(frozen=True)
class ObservableRecord:
    sweep: int
    log_density: float
    escape_count: int
    near_count: int
    acceptance: float
    histogram: np.ndarray | None = None


def pair_log_sums(positions: np.ndarray) -> np.ndarray:
    """s[c, i] = sum_{j != i} log|x_i - x_j| for a (chains, N) array."""
    diff = np.abs(positions[:, :, None] - positions[:, None, :])
    n = positions.shape[1]
    diff[:, np.arange(n), np.arange(n)] = 1.0
    return np.log(diff).sum(axis=2)


def log_density(positions: np.ndarray, potential: Potential, beta: float,
                domain: Domain | None = None) -> float:
    """Log of the unnormalized joint density at one configuration.

    Returns -inf (rejection semantics, not an exception) when a position
    leaves the domain or two positions coincide.
    """
    positions = np.asarray(positions, dtype=float)
    dom = domain or potential.domain
    if not dom.contains(positions).all():
        return -np.inf
    n = positions.size
    diff = np.abs(positions[:, None] - positions[None, :])
    iu = np.triu_indices(n, k=1)
    gaps = diff[iu]
    if np.any(gaps == 0.0):
        return -np.inf
    inter = beta * np.log(gaps).sum()
    conf = -(n * beta / 2.0) * potential(positions).sum()
    return float(inter + conf)


# ---------------------------------------------------------------------------
# batched kernel
# ---------------------------------------------------------------------------

class _Kernel:
    """Vectorized per-particle Metropolis pass over a block of chains."""

    def __init__(self, config: ChainConfig, n_chains: int,
                 rng: np.random.Generator):
        self.cfg = config
        self.n_chains = n_chains
        self.rng = rng
        self.table_x, self.table_v = config.potential.table(config.table_size)
        dom = config.domain
        self.dom_intervals = np.asarray(dom.intervals, dtype=float)
        n = config.n_particles
        if config.mode == "restricted":
            lo, hi = [], []
            for count, (a, b) in zip(config.filling, config.boxes):
                lo += [a] * count
                hi += [b] * count
            self.box_lo = np.asarray(lo)
            self.box_hi = np.asarray(hi)
        else:
            self.box_lo = self.box_hi = None
        self.positions = self._init_positions()
        self.pair_sums = pair_log_sums(self.positions)
        self.pot_vals = self._interp(self.positions)
        span = dom.hull[1] - dom.hull[0]
        scale0 = config.proposal_scale
        if scale0 is None:
            scale0 = min(1.0, 2.0 * span / max(n, 8))
        self.scales = np.full(n_chains, float(scale0))
        self.gauss_proposed = np.zeros(n_chains)
        self.gauss_accepted = np.zeros(n_chains)
        self.chain_idx = np.arange(n_chains)

    def _interp(self, x):
        return np.interp(x, self.table_x, self.table_v)

    def _contains(self, y: np.ndarray) -> np.ndarray:
        ok = np.zeros(y.shape, dtype=bool)
        for a, b in self.dom_intervals:
            ok |= (y > a) & (y < b)
        return ok

    def _init_positions(self) -> np.ndarray:
        cfg, rng = self.cfg, self.rng
        c, n = self.n_chains, cfg.n_particles
        if cfg.mode == "restricted":
            width = self.box_hi - self.box_lo
            return self.box_lo + (0.02 + 0.96 * rng.random((c, n))) * width
        if cfg.init_measure is not None:
            pos = cfg.init_measure.sample(rng, c * n).reshape(c, n)
            lo, hi = cfg.domain.hull
            return np.clip(pos, lo + 1e-9, hi - 1e-9)
        return cfg.domain.uniform(rng, c * n).reshape(c, n)

    def sweep(self) -> None:
        cfg = self.cfg
        c, n = self.n_chains, cfg.n_particles
        rng = self.rng
        pos, s, vp = self.positions, self.pair_sums, self.pot_vals
        half_nb = 0.5 * n * cfg.beta
        zs = rng.standard_normal((n, c))
        log_us = np.log(rng.random((n, c)))
        free = cfg.mode == "free"
        if free and cfg.teleport_prob > 0:
            tel_gate = rng.random((n, c)) < cfg.teleport_prob
            tel_pos = cfg.domain.uniform(rng, n * c).reshape(n, c)
        else:
            tel_gate = None
        for i in range(n):
            x = pos[:, i].copy()
            y = x + self.scales * zs[i]
            if tel_gate is not None:
                gate = tel_gate[i]
                y = np.where(gate, tel_pos[i], y)
                gauss = ~gate
            else:
                gauss = np.ones(c, dtype=bool)
            if self.box_lo is not None:
                ok = (y > self.box_lo[i]) & (y < self.box_hi[i])
            else:
                ok = self._contains(y)
            diff = y[:, None] - pos
            diff[:, i] = 1.0
            log_new = np.log(np.abs(diff))
            log_new[:, i] = 0.0
            t_new = log_new.sum(axis=1)
            v_new = self._interp(y)
            dlog = cfg.beta * (t_new - s[:, i]) - half_nb * (v_new - vp[:, i])
            with np.errstate(invalid="ignore"):
                accept = ok & (log_us[i] < dlog)
            self.gauss_proposed += gauss
            self.gauss_accepted += accept & gauss
            if accept.any():
                rows = self.chain_idx[accept]
                old = np.abs(x[accept, None] - pos[rows])
                old[:, i] = 1.0
                log_old = np.log(old)
                log_old[:, i] = 0.0
                s[rows] += log_new[rows] - log_old
                s[rows, i] = t_new[rows]
                pos[rows, i] = y[rows]
                vp[rows, i] = v_new[rows]

    def tune_step(self) -> None:
        rates = self.gauss_accepted / np.maximum(self.gauss_proposed, 1.0)
        self.scales *= np.exp(1.2 * (rates - TUNE_TARGET))
        span = self.dom_intervals[-1, 1] - self.dom_intervals[0, 0]
        np.clip(self.scales, 1e-5 * span, span, out=self.scales)
        self.gauss_proposed[:] = 0.0
        self.gauss_accepted[:] = 0.0

    def acceptance_rates(self) -> np.ndarray:
        return self.gauss_accepted / np.maximum(self.gauss_proposed, 1.0)

    def audit_cache(self) -> float:
        fresh = pair_log_sums(self.positions)
        return float(np.abs(fresh - self.pair_sums).max())

    def log_densities(self) -> np.ndarray:
        cfg = self.cfg
        inter = 0.5 * cfg.beta * self.pair_sums.sum(axis=1)
        conf = -(cfg.n_particles * cfg.beta / 2.0) * self.pot_vals.sum(axis=1)
        return inter + conf


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------

@dataclass
class ChainGroupResult:
    """Thinned observables for a block of chains (arrays indexed [record, chain])."""

    config: ChainConfig
    n_chains: int
    sweeps_recorded: np.ndarray
    log_densities: np.ndarray
    escape_counts: np.ndarray
    near_counts: np.ndarray
    acceptance: np.ndarray
    tuned_scales: np.ndarray
    cache_error: float
    positions: np.ndarray | None = None   # [record, chain, particle] if kept
    histograms: np.ndarray | None = None
    final_state: np.ndarray | None = None
    final_rng_state: dict | None = None

    def escape_indicator(self) -> np.ndarray:
        return (self.escape_counts > 0).astype(float)


def _count_in(pos: np.ndarray, intervals) -> np.ndarray:
    inside = np.zeros(pos.shape, dtype=bool)
    for a, b in intervals:
        inside |= (pos > a) & (pos < b)
    return inside.sum(axis=1)


def run_chain_group(config: ChainConfig, n_chains: int,
                    keep_positions: bool = False,
                    resume: dict | None = None) -> ChainGroupResult:
    """Advance n_chains chains under one config; fully deterministic in the
    config seed.  Burn-in sweeps tune the proposal scale, which is then
    frozen so the recorded stretch is exactly stationary.

    Passing a loaded checkpoint as `resume` restores positions, proposal
    scales, and the generator state; burn-in and tuning are then skipped.
    """
    if resume is not None:
        # the kernel constructor draws initial positions; feed it a throwaway
        # generator so the restored stream stays aligned sweep for sweep
        kern = _Kernel(config, n_chains, np.random.default_rng(0))
        pos = np.atleast_2d(np.asarray(resume["positions"], dtype=float))
        if pos.shape != (n_chains, config.n_particles):
            raise ConfigError(f"checkpoint shape {pos.shape} does not match "
                              f"({n_chains}, {config.n_particles})")
        kern.positions = pos.copy()
        kern.pair_sums = pair_log_sums(kern.positions)
        kern.pot_vals = kern._interp(kern.positions)
        kern.scales[:] = np.asarray(resume["scale"], dtype=float)
        rng = np.random.default_rng(np.random.SeedSequence(config.seed))
        rng.bit_generator.state = resume["rng"].bit_generator.state
        kern.rng = rng
    else:
        rng = np.random.default_rng(np.random.SeedSequence(config.seed))
        kern = _Kernel(config, n_chains, rng)
    cfg = config
    region = cfg.region_a
    near = (cfg.well_center is not None and cfg.epsilon is not None)
    n_records = cfg.sweeps // cfg.thinning
    shape = (n_records, n_chains)
    rec_sweep = np.zeros(n_records, dtype=int)
    rec_logd = np.zeros(shape)
    rec_escape = np.zeros(shape, dtype=int)
    rec_near = np.zeros(shape, dtype=int)
    rec_pos = np.zeros((n_records, n_chains, cfg.n_particles)) \
        if keep_positions else None
    rec_hist = None
    if cfg.histogram_edges is not None:
        rec_hist = np.zeros((n_records, len(cfg.histogram_edges) - 1))

    if resume is None:
        for sweep in range(cfg.burn_in):
            kern.sweep()
            if cfg.tune and (sweep + 1) % TUNE_INTERVAL == 0:
                kern.tune_step()
    kern.gauss_proposed[:] = 0.0
    kern.gauss_accepted[:] = 0.0

    r = 0
    for sweep in range(cfg.sweeps):
        kern.sweep()
        if (sweep + 1) % cfg.thinning == 0 and r < n_records:
            rec_sweep[r] = sweep + 1
            rec_logd[r] = kern.log_densities()
            if region is not None:
                rec_escape[r] = cfg.n_particles - _count_in(kern.positions, region)
            if near:
                lo = cfg.well_center - cfg.epsilon
                hi = cfg.well_center + cfg.epsilon
                rec_near[r] = _count_in(kern.positions, [(lo, hi)])
            if rec_pos is not None:
                rec_pos[r] = kern.positions
            if rec_hist is not None:
                rec_hist[r] = np.histogram(kern.positions,
                                           bins=cfg.histogram_edges)[0]
            r += 1
    return ChainGroupResult(
        config=cfg, n_chains=n_chains, sweeps_recorded=rec_sweep,
        log_densities=rec_logd, escape_counts=rec_escape, near_counts=rec_near,
        acceptance=kern.acceptance_rates(), tuned_scales=kern.scales.copy(),
        cache_error=kern.audit_cache(), positions=rec_pos,
        histograms=rec_hist, final_state=kern.positions.copy(),
        final_rng_state=rng.bit_generator.state)


def run_chain(config: ChainConfig) -> list[ObservableRecord]:
    """Single chain; burn-in discarded, records at the thinning interval."""
    group = run_chain_group(config, 1)
    out = []
    for r in range(group.sweeps_recorded.size):
        hist = None if group.histograms is None else group.histograms[r]
        out.append(ObservableRecord(
            sweep=int(group.sweeps_recorded[r]),
            log_density=float(group.log_densities[r, 0]),
            escape_count=int(group.escape_counts[r, 0]),
            near_count=int(group.near_counts[r, 0]),
            acceptance=float(group.acceptance[0]),
            histogram=hist))
    return out


def mcmc_sweep(state: EnsembleState, config: ChainConfig,
               rng: np.random.Generator) -> tuple[EnsembleState, dict]:
    """One Metropolis pass over all particles of a single chain.

    A zero proposal scale is the identity kernel: the state is returned
    unchanged with acceptance one.
    """
    if config.proposal_scale == 0.0 and config.teleport_prob == 0.0:
        return state, {"acceptance": 1.0, "moves": 0}
    kern = _Kernel(config, 1, rng)
    kern.positions = state.positions[None, :].astype(float).copy()
    kern.pair_sums = pair_log_sums(kern.positions)
    kern.pot_vals = kern._interp(kern.positions)
    if config.proposal_scale is not None:
        kern.scales[:] = config.proposal_scale
    kern.sweep()
    new = EnsembleState(kern.positions[0].copy(), kern.pair_sums[0].copy(),
                        state.seed_lineage)
    stats = {"acceptance": float(kern.acceptance_rates()[0]),
             "moves": int(config.n_particles)}
    return new, stats


# ---------------------------------------------------------------------------
# quadratic-potential oracle
# ---------------------------------------------------------------------------

def tridiagonal_sample(n: int, beta: float,
                       rng: np.random.Generator) -> np.ndarray:
    """Exact draw of the quadratic-confinement ensemble at any beta.

    The symmetric tridiagonal matrix with independent standard normal
    diagonal and chi-distributed off-diagonals (dof beta*(n-1) ... beta)
    has eigenvalue density |Delta|^beta exp(-sum x^2 / 2); rescaling by
    1/sqrt(n*beta) matches the confinement exp(-(n*beta/2) sum V) with
    V(x) = x^2, which puts the limiting spectrum on [-sqrt(2), sqrt(2)].
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    diag = rng.standard_normal(n)
    if n == 1:
        return diag / np.sqrt(beta)
    dof = beta * np.arange(n - 1, 0, -1)
    off = np.sqrt(rng.chisquare(dof)) / np.sqrt(2.0)
    eigs = eigh_tridiagonal(diag, off, eigvals_only=True,
                            lapack_driver="stev")
    return eigs / np.sqrt(n * beta)


# ---------------------------------------------------------------------------
# correlator estimation
# ---------------------------------------------------------------------------

def estimate_correlator(samples: np.ndarray, x: float,
                        region: tuple[tuple[float, float], ...] | None = None,
                        margin: float = 0.05) -> tuple[float, float]:
    """Monte Carlo mean and standard error of sum_i 1/(x - lambda_i).

    samples: a list of EnsembleState (or position vectors), an array
    [draw, particle], or an array [draw, chain, particle].  The standard
    error is inflated by the integrated autocorrelation time of the
    per-draw series.  If a particle region is given, x must clear it by
    the margin, where the estimator turns unstable.
    """
    if isinstance(samples, (list, tuple)):
        samples = np.stack([np.asarray(getattr(s, "positions", s), dtype=float)
                            for s in samples])
    samples = np.asarray(samples, dtype=float)
    if region is not None:
        for a, b in region:
            if a - margin <= x <= b + margin:
                raise MarginError(f"x={x} is within {margin} of the particle "
                                  f"region [{a}, {b}]")
    if samples.ndim == 2:
        samples = samples[:, None, :]
    vals = (1.0 / (x - samples)).sum(axis=2)  # [draw, chain]
    mean = float(vals.mean())
    n_draw, n_chain = vals.shape
    per_chain_var = vals.var(axis=0, ddof=1) if n_draw > 1 else np.zeros(n_chain)
    tau = np.mean([integrated_autocorr_time(vals[:, c]) for c in range(n_chain)])
    n_eff = max(n_draw * n_chain / tau, 1.0)
    stderr = float(np.sqrt(per_chain_var.mean() / n_eff))
    return mean, stderr


def correlator_prediction(measure: DiscreteMeasure, x: float) -> float:
    """Quadrature of 1/(x - s) against a measure (per-particle limit)."""
    return float(np.sum(measure.weights / (x - measure.nodes)))


# ---------------------------------------------------------------------------
# checkpoints (textual, resumable)
# ---------------------------------------------------------------------------

def save_checkpoint(path, positions: np.ndarray, rng, sweep: int,
                    scale) -> None:
    """rng may be a Generator or a raw bit-generator state dict."""
    rng_state = rng if isinstance(rng, dict) else rng.bit_generator.state
    state = {
        "positions": [float(p) for p in np.asarray(positions).ravel()],
        "shape": list(np.asarray(positions).shape),
        "rng_state": rng_state,
        "sweep": int(sweep),
        "scale": np.asarray(scale, dtype=float).tolist(),
    }
    from pathlib import Path
    Path(path).write_text(json.dumps(state))


def load_checkpoint(path) -> dict:
    from pathlib import Path
    state = json.loads(Path(path).read_text())
    pos = np.asarray(state["positions"], dtype=float).reshape(state["shape"])
    rng = np.random.default_rng()
    rng.bit_generator.state = state["rng_state"]
    return {"positions": pos, "rng": rng, "sweep": state["sweep"],
            "scale": np.asarray(state["scale"])}
