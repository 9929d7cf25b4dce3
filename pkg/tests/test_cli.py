import json

import numpy as np
import pytest

from betagas.cli import main

QUAD_TOML = """\
[potential]
kind = "polynomial"
coefficients = [0.0, 0.0, 1.0]
domain = [[-3.0, 3.0]]

[equilibrium]
nodes = 256

[sample]
n = 8
beta = 2.0
sweeps = 300
burn_in = 100
thinning = 10
seed = 4242
"""

CRITICAL_TOML = """\
[potential]
kind = "critical"

[potential.base]
coefficients = [0.0, 0.0, 1.0]
domain = [[-3.0, 3.0]]
grid_nodes = 512

[potential.well]
neighborhood = [[-2.0, 1.7]]
center = 1.85
right_margin = 0.27

[equilibrium]
nodes = 256

[sample]
n = 8
beta = 0.5
sweeps = 300
burn_in = 100
thinning = 10
seed = 7

[experiment]
betas = [0.5, 2.0]
n_list = [6, 8]
chains = 2
sweeps = 250
burn_in = 80
seed = 11
epsilon = 0.075
"""


@pytest.fixture()
def quad_config(tmp_path):
    p = tmp_path / "quad.toml"
    p.write_text(QUAD_TOML)
    return p


@pytest.fixture()
def critical_config(tmp_path):
    p = tmp_path / "crit.toml"
    p.write_text(CRITICAL_TOML)
    return p


def test_equilibrium_subcommand(quad_config, tmp_path):
    out = tmp_path / "eq"
    rc = main(["equilibrium", "--config", str(quad_config),
               "--out", str(out), "--quiet"])
    assert rc == 0
    assert (out / "measure.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert abs(summary["robin_constant"] + 1 + np.log(2)) < 2e-2
    manifest = json.loads((out / "manifest.json").read_text())
    assert "measure.csv" in manifest["files"]
    assert manifest["config_sha256"]


def test_equilibrium_determinism(quad_config, tmp_path):
    rc1 = main(["equilibrium", "--config", str(quad_config),
                "--out", str(tmp_path / "a"), "--quiet"])
    rc2 = main(["equilibrium", "--config", str(quad_config),
                "--out", str(tmp_path / "b"), "--quiet"])
    assert rc1 == rc2 == 0
    ma = json.loads((tmp_path / "a" / "manifest.json").read_text())["files"]
    mb = json.loads((tmp_path / "b" / "manifest.json").read_text())["files"]
    assert ma == mb  # identical data-file hashes


def test_scan_noncritical(quad_config, tmp_path, capsys):
    out = tmp_path / "eq"
    main(["equilibrium", "--config", str(quad_config), "--out", str(out),
          "--quiet"])
    rc = main(["scan", "--equilibrium", str(out),
               "--out", str(tmp_path / "scan" / "report.json"), "--quiet"])
    assert rc == 0
    report = json.loads((tmp_path / "scan" / "report.json").read_text())
    assert report["points"] == []


def test_scan_critical(critical_config, tmp_path):
    out = tmp_path / "eq"
    main(["equilibrium", "--config", str(critical_config), "--out", str(out),
          "--quiet"])
    rc = main(["scan", "--equilibrium", str(out),
               "--out", str(tmp_path / "report.json"), "--quiet"])
    assert rc == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert len(report["points"]) == 1
    assert abs(report["points"][0]["location"] - 1.85) < 0.01


def test_sample_subcommand(critical_config, tmp_path):
    out = tmp_path / "run"
    rc = main(["sample", "--config", str(critical_config),
               "--out", str(out), "--quiet"])
    assert rc == 0
    lines = (out / "records.csv").read_text().strip().splitlines()
    assert lines[0].startswith("sweep,log_density")
    assert len(lines) == 31  # 300 sweeps / thinning 10, plus header
    assert (out / "checkpoint.json").exists()


def test_unknown_subcommand_usage():
    with pytest.raises(SystemExit):
        main(["frobnicate", "--out", "x"])


def test_no_subcommand_returns_one(capsys):
    assert main([]) == 1


def test_experiment_rejects_beta_one(critical_config, tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text(CRITICAL_TOML.replace("betas = [0.5, 2.0]",
                                         "betas = [1.0, 2.0]"))
    rc = main(["experiment", "--config", str(bad),
               "--out", str(tmp_path / "exp"), "--quiet"])
    assert rc == 1
    err = capsys.readouterr().err
    assert "beta = 1" in err


def test_experiment_smoke(critical_config, tmp_path):
    out = tmp_path / "exp"
    rc = main(["experiment", "--config", str(critical_config),
               "--out", str(out), "--quiet"])
    # tiny budget: PASS is not guaranteed, but the artifacts must be complete
    assert rc in (0, 2)
    for name in ("phase_report.json", "fits.json", "manifest.json",
                 "escape_beta_0p5.json", "escape_beta_0p5.csv",
                 "escape_beta_0p5.dat", "escape_beta_2p0.json"):
        assert (out / name).exists(), name
    report = json.loads((out / "phase_report.json").read_text())
    assert report["n"] == 8
    rc2 = main(["report", "--dir", str(out)])
    assert rc2 == 0


def test_measure_file_reference(tmp_path):
    """A critical potential can be built from a pre-solved measure CSV."""
    import betagas as bg
    pot = bg.Potential.from_polynomial([0, 0, 1], bg.Domain.interval(-3, 3))
    eq = bg.solve_equilibrium(pot, grid=bg.GridConfig(256))
    eq.measure.to_csv(tmp_path / "mu.csv")
    cfg = tmp_path / "from_measure.toml"
    cfg.write_text(
        CRITICAL_TOML.replace('grid_nodes = 512',
                              'measure_file = "mu.csv"'))
    out = tmp_path / "eq2"
    rc = main(["equilibrium", "--config", str(cfg), "--out", str(out),
               "--quiet"])
    assert rc == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["support"]
