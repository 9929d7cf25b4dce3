"""Command-line entry points: equilibrium, scan, sample, experiment, report."""
from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

import numpy as np

from .config import (Manifest, build_chain_config, build_potential,
                     load_config)
from .equilibrium import GridConfig, solve_equilibrium
from .errors import BetagasError, ConfigError, InvalidSpecError
from .experiments import (ChainBudget, escape_probability,
                          fit_escape_exponent, noncritical_control,
                          phase_transition_report, validate_beta_list)
from .errors import SaturationError
from .measure import DiscreteMeasure
from .potential import Potential
from .ratefn import RateFunction, scan_criticality
from .sampler import run_chain_group, save_checkpoint


def _say(args, *msg):
    if not args.quiet:
        print(*msg)


def _copy_config(config_path, outdir: Path):
    dest = outdir / "config.toml"
    if Path(config_path).resolve() != dest.resolve():
        shutil.copyfile(config_path, dest)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_equilibrium(args) -> int:
    cfg = load_config(args.config)
    manifest = Manifest(args.config, args.seed)
    potential = build_potential(cfg, base_dir=Path(args.config).parent)
    nodes = int(cfg.get("equilibrium", {}).get("nodes", 512))
    threshold = float(cfg.get("equilibrium", {}).get("threshold", 1e-3))
    solution = solve_equilibrium(potential, grid=GridConfig(nodes),
                                 threshold=threshold)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    solution.save(outdir)
    _copy_config(args.config, outdir)
    manifest.write(outdir, {"nodes": nodes})
    _say(args, f"equilibrium: {len(solution.support)} support interval(s), "
               f"constant {solution.robin_constant:.6f}, "
               f"residuals {solution.residuals.as_dict()}")
    return 0


def cmd_scan(args) -> int:
    eqdir = Path(args.equilibrium)
    config_path = eqdir / "config.toml"
    cfg = load_config(config_path)
    manifest = Manifest(config_path, args.seed)
    potential = build_potential(cfg, base_dir=eqdir)
    if potential.critical_info is not None:
        rate = RateFunction.from_critical(potential)
        neighborhood = potential.critical_info.neighborhood
    else:
        measure = DiscreteMeasure.from_csv(eqdir / "measure.csv")
        summary = json.loads((eqdir / "summary.json").read_text())
        rate = RateFunction(
            measure=measure, potential=potential,
            support=tuple(tuple(iv) for iv in summary["support"]),
            robin_constant=float(summary["robin_constant"]))
        scan_cfg = cfg.get("scan", {})
        if "neighborhood" in scan_cfg:
            neighborhood = tuple(tuple(iv) for iv in scan_cfg["neighborhood"])
        else:
            pad = 0.05 * (rate.support[-1][1] - rate.support[0][0])
            neighborhood = tuple((lo - pad, hi + pad)
                                 for lo, hi in rate.support)
    resolution = int(cfg.get("scan", {}).get("resolution", 2000))
    report = scan_criticality(rate, neighborhood, resolution=resolution)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    report.to_json(out)
    manifest.write(out.parent)
    _say(args, f"scan: {len(report.points)} critical point(s); "
               + "; ".join(f"c0={p.location:.4f} q={p.local_exponent:.3f} "
                           f"beta_q={p.beta_threshold:.3f}"
                           for p in report.points))
    return 0


def cmd_sample(args) -> int:
    cfg = load_config(args.config)
    manifest = Manifest(args.config, args.seed)
    potential = build_potential(cfg, base_dir=Path(args.config).parent)
    chain_cfg = build_chain_config(cfg, potential, seed_override=args.seed)
    group = run_chain_group(chain_cfg, 1)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    fmt = cfg.get("sample", {}).get("format", "csv")
    n_rec = group.sweeps_recorded.size
    rows = [{"sweep": int(group.sweeps_recorded[r]),
             "log_density": float(group.log_densities[r, 0]),
             "escape_count": int(group.escape_counts[r, 0]),
             "near_count": int(group.near_counts[r, 0]),
             "acceptance": float(group.acceptance[0])}
            for r in range(n_rec)]
    if fmt == "jsonl":
        with open(outdir / "records.jsonl", "w") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
    else:
        lines = ["sweep,log_density,escape_count,near_count,acceptance"]
        lines += [f"{r['sweep']},{r['log_density']!r},{r['escape_count']},"
                  f"{r['near_count']},{r['acceptance']!r}" for r in rows]
        (outdir / "records.csv").write_text("\n".join(lines) + "\n")
    save_checkpoint(outdir / "checkpoint.json", group.final_state[0],
                    group.final_rng_state,
                    int(group.sweeps_recorded[-1]) if n_rec else 0,
                    group.tuned_scales)
    _copy_config(args.config, outdir)
    manifest.write(outdir, {"chain_seed": int(chain_cfg.seed)})
    _say(args, f"sample: {n_rec} records, "
               f"acceptance {group.acceptance[0]:.3f}")
    return 0


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    manifest = Manifest(args.config, args.seed)
    exp = cfg.get("experiment")
    if exp is None:
        raise ConfigError("config has no [experiment] table")
    try:
        betas = [float(b) for b in exp["betas"]]
        n_list = [int(n) for n in exp["n_list"]]
        epsilon = float(exp["epsilon"])
    except KeyError as exc:
        raise ConfigError(f"missing experiment key: {exc}") from exc
    validate_beta_list(betas)
    potential = build_potential(cfg, base_dir=Path(args.config).parent)
    info = potential.critical_info
    if info is None:
        raise ConfigError("experiment needs a critical-kind potential")
    budget = ChainBudget(chains=int(exp.get("chains", 8)),
                         sweeps=int(exp.get("sweeps", 20000)),
                         burn_in=int(exp.get("burn_in", 3000)))
    seed = args.seed if args.seed is not None else int(exp.get("seed", 0))
    import os
    workers = args.workers or int(exp.get("workers", os.cpu_count() or 1))
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    tables, fits, notes = [], [], []
    ss = np.random.SeedSequence(seed)
    for beta, child in zip(betas, ss.spawn(len(betas))):
        _say(args, f"escape table: beta={beta} over N={n_list}")
        table = escape_probability(
            potential, info.neighborhood, info.well_center, epsilon, beta,
            n_list, budget, seed=int(child.generate_state(1)[0]),
            workers=workers)
        tables.append(table)
        tag = str(beta).replace(".", "p")
        table.to_json(outdir / f"escape_beta_{tag}.json")
        table.to_csv(outdir / f"escape_beta_{tag}.csv")
        rows = "\n".join(f"{r.n} {r.p_hat!r}" for r in table.rows)
        (outdir / f"escape_beta_{tag}.dat").write_text(rows + "\n")
        try:
            fits.append(fit_escape_exponent(table))
        except (SaturationError, ConfigError) as exc:
            notes.append(f"beta={beta}: fit skipped ({exc})")

    report = phase_transition_report(
        potential, info.neighborhood, info.well_center, epsilon, betas,
        max(n_list), budget, seed=seed + 1, workers=workers,
        fits=tuple(fits))
    all_pass = report.transition_pass
    control = None
    if "control" in cfg.get("experiment", {}) and exp["control"]:
        ctrl_pot = Potential.from_polynomial([0.0, 0.0, 1.0],
                                             potential.domain)
        control = noncritical_control(ctrl_pot, info.neighborhood,
                                      n=max(n_list), budget=budget,
                                      seed=seed + 2)
        all_pass = all_pass and control["control_pass"]
        (outdir / "control.json").write_text(json.dumps(control, indent=2))
        notes.append(control["label"])

    report.to_json(outdir / "phase_report.json")
    (outdir / "fits.json").write_text(json.dumps(
        [f.as_dict() for f in fits], indent=2))
    _copy_config(args.config, outdir)
    manifest.write(outdir, {"all_pass": bool(all_pass), "notes": notes})
    for line in report.notes:
        _say(args, line)
    _say(args, f"experiment {'PASS' if all_pass else 'FAIL'}")
    return 0 if all_pass else 2


def cmd_report(args) -> int:
    d = Path(args.dir)
    report = json.loads((d / "phase_report.json").read_text())
    lines = [f"phase transition at N={report['n']}: "
             f"{'PASS' if report['transition_pass'] else 'FAIL'}"]
    lines += list(report["notes"])
    for f in report.get("fits", []):
        lines.append(f"fit ({f['kind']}, N={f['n_range']}): slope "
                     f"{f['slope']:.3f} vs theory {f['theory_slope']:.3f} "
                     f"(stderr {f['stderr']:.3f}, R2 {f['r_squared']:.3f})")
    text = "\n".join(lines)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="betagas",
        description="equilibrium measures, escape costs, and log-gas "
                    "Monte Carlo experiments")
    sub = parser.add_subparsers(dest="command")

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--quiet", action="store_true")

    common(sub.add_parser("equilibrium", help="solve an equilibrium measure"))
    p_scan = sub.add_parser("scan", help="scan the escape cost for zeros")
    p_scan.add_argument("--equilibrium", required=True,
                        help="output directory of `betagas equilibrium`")
    common(p_scan, config=False)
    common(sub.add_parser("sample", help="run one Monte Carlo chain"))
    common(sub.add_parser("experiment", help="escape-probability experiment"))
    p_rep = sub.add_parser("report", help="summarize an experiment directory")
    p_rep.add_argument("--dir", required=True)
    p_rep.add_argument("--out", default=None)
    p_rep.add_argument("--quiet", action="store_true")
    return parser


COMMANDS = {
    "equilibrium": cmd_equilibrium,
    "scan": cmd_scan,
    "sample": cmd_sample,
    "experiment": cmd_experiment,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage()
        return 1
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, InvalidSpecError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BetagasError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
