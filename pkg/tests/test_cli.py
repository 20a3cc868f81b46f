import json
from pathlib import Path

import numpy as np
import pytest

from phi43.cli import main
from phi43.fourier_core import load_field


def test_identity_suite_smoke(tmp_path):
    out = tmp_path / "ident"
    rc = main([
        "identity-suite", "--seed", "0", "--N", "2", "--inputs", "1",
        "--out", str(out),
    ])
    assert rc == 0
    assert (out / "identity_suite.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "identity-suite"
    assert manifest["passed"] is True
    header = (out / "identity_suite.csv").read_text().splitlines()[0]
    assert header.split(",") == [
        "identity_id", "N", "decay_rate", "epsilon", "residual", "tolerance", "pass"
    ]


def test_renorm_table_smoke(tmp_path, capsys):
    out = tmp_path / "renorm"
    rc = main([
        "renorm-table", "--eps-list", "0.5,0.1", "--nsum", "2", "--out", str(out),
    ])
    assert rc == 0
    lines = (out / "renorm_table.csv").read_text().splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("eps,n_sum,a,b,c")


def test_sample_driver_dumps(tmp_path):
    out = tmp_path / "driver"
    rc = main([
        "sample-driver", "--seed", "1", "--eps", "0.2", "--N", "2",
        "--T", "0.01", "--dt", "2e-3", "--max-slices", "2", "--out", str(out),
    ])
    assert rc == 0
    dumps = sorted(out.glob("*.phi3"))
    assert (out / "i0.phi3").exists()
    f = load_field(out / "i0.phi3")
    assert f.lattice.n_modes == 2
    assert (out / "norms.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert "constants" in manifest


def test_solve_from_toml(tmp_path):
    conf = tmp_path / "run.toml"
    out = tmp_path / "solve"
    conf.write_text(
        "[run]\n"
        "seed = 3\n"
        "eps = 0.2\n"
        "N = 2\n"
        "T = 0.01\n"
        "dt = 2e-3\n"
        "kappa = 0.1\n"
        f'out = "{out}"\n'
    )
    rc = main(["solve", "--config", str(conf)])
    assert rc == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["converged"] is True
    iters = (out / "iterations.csv").read_text().splitlines()
    assert iters[0] == "iter,residual,horizon"
    assert len(list(out.glob("u_*.phi3"))) >= 1


def test_malformed_config_is_usage_error(tmp_path):
    conf = tmp_path / "bad.toml"
    conf.write_text("[run\nnot toml")
    with pytest.raises(Exception):
        main(["solve", "--config", str(conf)])


def test_unknown_subcommand_exits_nonzero():
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_crosscheck_deterministic_smoke(tmp_path):
    out = tmp_path / "xchk"
    rc = main([
        "crosscheck", "--deterministic", "--N", "2", "--T", "0.01",
        "--dt", "5e-4", "--eps", "0.2", "--out", str(out),
    ])
    assert rc == 0
    row = (out / "crosscheck.csv").read_text().splitlines()[1]
    assert row.startswith("True,")
