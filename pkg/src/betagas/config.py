"""TOML run configuration: parsing, object construction, output manifests.

Physical parameters (beta, particle count, window half-width) are required
explicitly; silent defaults on those corrupt exponent fits.
"""
from __future__ import annotations

import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .equilibrium import GridConfig, solve_equilibrium
from .errors import ConfigError
from .measure import DiscreteMeasure
from .potential import (CriticalPotentialSpec, Domain, Potential,
                        build_critical_potential)
from .sampler import ChainConfig


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _domain(raw) -> Domain:
    return Domain(tuple((float(a), float(b)) for a, b in raw))


def build_potential(cfg: dict, base_dir: Path | None = None) -> Potential:
    """Construct the potential described by the [potential] table."""
    try:
        pot = cfg["potential"]
        kind = pot["kind"]
    except KeyError as exc:
        raise ConfigError(f"missing potential key: {exc}") from exc
    if kind == "polynomial":
        return Potential.from_polynomial(pot["coefficients"],
                                         _domain(pot["domain"]))
    if kind == "zero":
        return Potential.zero(_domain(pot["domain"]))
    if kind == "critical":
        base_cfg = pot["base"]
        base = Potential.from_polynomial(base_cfg["coefficients"],
                                         _domain(base_cfg["domain"]))
        if "measure_file" in base_cfg:
            mpath = Path(base_cfg["measure_file"])
            if base_dir is not None and not mpath.is_absolute():
                mpath = base_dir / mpath
            measure = DiscreteMeasure.from_csv(mpath)
        else:
            grid = GridConfig(int(base_cfg.get("grid_nodes", 1024)))
            measure = solve_equilibrium(base, grid=grid).measure
        well = pot["well"]
        spec = CriticalPotentialSpec(
            measure=measure,
            neighborhood=tuple(tuple(iv) for iv in well["neighborhood"]),
            well_center=float(well["center"]),
            well_depth=well.get("depth"),
            well_power=int(well.get("power", 2)),
            epsilon=well.get("epsilon"))
        kwargs = {}
        if "right_margin" in well:
            kwargs["right_margin"] = float(well["right_margin"])
        return build_critical_potential(spec, base, **kwargs)
    raise ConfigError(f"unknown potential kind {kind!r}")


def build_chain_config(cfg: dict, potential: Potential,
                       seed_override: int | None = None) -> ChainConfig:
    try:
        s = cfg["sample"]
        n = int(s["n"])
        beta = float(s["beta"])
    except KeyError as exc:
        raise ConfigError(f"missing sample key: {exc}") from exc
    seed = seed_override if seed_override is not None else int(s.get("seed", 0))
    info = potential.critical_info
    region = None
    if "region_a" in s:
        region = tuple(tuple(iv) for iv in s["region_a"])
    elif info is not None:
        region = info.neighborhood
    kwargs = dict(
        n_particles=n, beta=beta, potential=potential,
        sweeps=int(s.get("sweeps", 10000)),
        burn_in=int(s.get("burn_in", 2000)),
        thinning=int(s.get("thinning", 10)),
        seed=seed,
        teleport_prob=float(s.get("teleport_prob", 0.25)),
        mode=s.get("mode", "free"),
        region_a=region)
    if "proposal_scale" in s:
        kwargs["proposal_scale"] = float(s["proposal_scale"])
    if kwargs["mode"] == "restricted":
        kwargs["filling"] = tuple(int(k) for k in s["filling"])
        kwargs["boxes"] = tuple(tuple(iv) for iv in s["boxes"])
    if info is not None:
        kwargs["well_center"] = info.well_center
        kwargs["epsilon"] = info.epsilon
        kwargs["init_measure"] = info.measure
    return ChainConfig(**kwargs)


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class Manifest:
    """Reproducibility record written beside every output directory."""

    def __init__(self, config_path, seed):
        self.t0 = time.time()
        self.config_path = Path(config_path) if config_path else None
        self.seed = seed

    def write(self, outdir: Path, extra: dict | None = None) -> Path:
        outdir = Path(outdir)
        files = {}
        for p in sorted(outdir.rglob("*")):
            if p.is_file() and p.name != "manifest.json":
                files[str(p.relative_to(outdir))] = file_sha256(p)
        data = {
            "config_sha256": (file_sha256(self.config_path)
                              if self.config_path else None),
            "seed": self.seed,
            "versions": {
                "betagas": __version__,
                "numpy": np.__version__,
                "python": sys.version.split()[0],
            },
            "wall_time_s": round(time.time() - self.t0, 3),
            "files": files,
        }
        try:
            import scipy
            data["versions"]["scipy"] = scipy.__version__
        except ImportError:
            pass
        if extra:
            data.update(extra)
        path = outdir / "manifest.json"
        path.write_text(json.dumps(data, indent=2))
        return path
