import json

import numpy as np
import pytest

from gasketlab.cli import main, parse_distribution
from gasketlab.errors import ValidationError


def run(args, cwd):
    import os

    old = os.getcwd()
    os.chdir(cwd)
    try:
        return main(args)
    finally:
        os.chdir(old)


def test_lattice_command(tmp_path):
    assert run(["lattice", "--level", "3", "--out", "t"], tmp_path) == 0
    stats = json.loads((tmp_path / "t.stats.json").read_text())
    assert stats["vertex_count"] == 42
    header = (tmp_path / "t.edges").read_text().splitlines()[0]
    assert header == "# gasket level=3 truncated=False mirrored=False"
    assert (tmp_path / "t.config").exists()


def test_lattice_truncated(tmp_path):
    assert run(["lattice", "--level", "2", "--truncated", "--out", "t"],
               tmp_path) == 0
    stats = json.loads((tmp_path / "t.stats.json").read_text())
    assert stats["vertex_count"] == 12


def test_lattice_usage_error(tmp_path):
    assert run(["lattice", "--level", "-1", "--out", "t"], tmp_path) == 2
    assert run(["lattice", "--level", "2", "--ball", "--truncated",
                "--out", "t"], tmp_path) == 2


def test_spectrum_eigenvalues(tmp_path):
    rc = run(["spectrum", "--level", "0", "--bc", "neumann",
              "--dist", "const:0", "--out", "s"], tmp_path)
    assert rc == 0
    values = np.loadtxt(tmp_path / "s.eigs.csv", skiprows=1)
    assert np.allclose(values, [0.0, 3.0, 3.0], atol=1e-12)


def test_spectrum_capacity_without_inertia(tmp_path):
    rc = run(["spectrum", "--level", "8", "--dist", "const:0", "--out", "s"],
             tmp_path)
    assert rc == 3


def test_spectrum_counting_with_inertia(tmp_path):
    rc = run(["spectrum", "--level", "3", "--dist", "const:0", "--inertia",
              "--grid-kind", "lin", "--grid-lo", "0", "--grid-hi", "9",
              "--grid-n", "10", "--out", "s"], tmp_path)
    assert rc == 0
    rows = np.loadtxt(tmp_path / "s.counts.csv", delimiter=",", skiprows=1)
    assert rows[-1, 1] == 42


def test_decimate_compare_dense(tmp_path):
    rc = run(["decimate", "--neumann", "--level", "3", "--compare-dense",
              "--out", "d"], tmp_path)
    assert rc == 0
    report = json.loads((tmp_path / "d.compare.json").read_text())
    assert report["set_distance"] <= 1e-9


def test_decimate_free_band(tmp_path):
    rc = run(["decimate", "--free", "--depth", "3", "--scale", "comb",
              "--out", "d"], tmp_path)
    assert rc == 0
    rows = (tmp_path / "d.spectrum.csv").read_text().splitlines()[1:]
    values = np.array([float(r.split(",")[0]) for r in rows])
    assert values.min() >= -1e-12 and values.max() <= 6.0 + 1e-12


def test_decimate_level_zero_usage_error(tmp_path):
    assert run(["decimate", "--neumann", "--level", "0", "--out", "d"],
               tmp_path) == 2


def test_verify_psd(tmp_path):
    rc = run(["verify", "--suite", "psd", "--dim", "40", "--trials", "25",
              "--out", "r.json"], tmp_path)
    assert rc == 0
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["passed"] and report["failed"] == 0


def test_verify_branch(tmp_path):
    rc = run(["verify", "--suite", "branch", "--n", "30", "--out", "r.json"],
             tmp_path)
    assert rc == 0


def test_verify_counting_small(tmp_path):
    rc = run(["verify", "--suite", "counting", "--levels", "2", "--seeds", "2",
              "--grid-n", "16", "--out", "r.json"], tmp_path)
    assert rc == 0


def test_ids_with_power_fit(tmp_path):
    rc = run(["ids", "--level", "5", "--dist", "const:0", "--trials", "1",
              "--grid-n", "24", "--grid-lo", "1e-3", "--grid-hi", "0.5",
              "--fit", "power", "--window", "1e-2,0.5", "--out", "i"],
             tmp_path)
    assert rc == 0
    fit = json.loads((tmp_path / "i.fit.json").read_text())
    assert fit["kind"] == "power"
    assert 0.3 <= fit["slope"] <= 1.1


def test_ids_missing_distribution(tmp_path):
    with pytest.raises(SystemExit) as err:
        run(["ids", "--level", "3", "--trials", "2", "--out", "i"], tmp_path)
    assert err.value.code == 2


def test_ids_insufficient_data_exit(tmp_path):
    rc = run(["ids", "--level", "3", "--dist", "bernoulli:0,10,0.5",
              "--trials", "2", "--grid-lo", "1e-4", "--grid-hi", "1e-3",
              "--grid-n", "8", "--fit", "lifshitz", "--window", "1e-4,1e-3",
              "--out", "i"], tmp_path)
    assert rc == 1


def test_fit_command_roundtrip(tmp_path):
    rc = run(["ids", "--level", "4", "--dist", "const:0", "--trials", "1",
              "--grid-n", "30", "--grid-lo", "1e-3", "--grid-hi", "1.0",
              "--out", "i"], tmp_path)
    assert rc == 0
    rc = run(["fit", "--curve", "i.curve.csv", "--kind", "power",
              "--window", "1e-2,1.0", "--out", "f.json"], tmp_path)
    assert rc == 0
    assert json.loads((tmp_path / "f.json").read_text())["n_points"] >= 5


def test_config_file_with_override(tmp_path):
    (tmp_path / "run.cfg").write_text("level=3\nout=fromcfg\n")
    rc = run(["lattice", "--config", "run.cfg"], tmp_path)
    assert rc == 0
    assert (tmp_path / "fromcfg.stats.json").exists()
    rc = run(["lattice", "--config", "run.cfg", "--out", "cli_wins"], tmp_path)
    assert rc == 0
    assert (tmp_path / "cli_wins.stats.json").exists()


def test_parse_distribution_errors():
    with pytest.raises(ValidationError):
        parse_distribution("bernoulli:1,2", 0, 1.0)
    with pytest.raises(ValidationError):
        parse_distribution("weird:1", 0, 1.0)
    spec = parse_distribution("table:0:0.5,10:1", 0, 1.0)
    assert spec.distribution[0] == "table"


def test_env_threads_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("GASKET_THREADS", "2")
    rc = run(["ids", "--level", "2", "--dist", "const:0", "--trials", "1",
              "--grid-n", "8", "--threads", "7", "--out", "i"], tmp_path)
    assert rc == 0
    cfg = dict(line.split("=", 1)
               for line in (tmp_path / "i.config").read_text().splitlines())
    assert cfg["threads"] == "2"


def test_repeated_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    args = ["ids", "--level", "3", "--dist", "bernoulli:0,10,0.5",
            "--trials", "4", "--grid-kind", "global", "--grid-n", "16",
            "--out", "run"]
    assert run(args, a) == 0
    assert run(args, b) == 0
    assert (a / "run.curve.csv").read_bytes() == (b / "run.curve.csv").read_bytes()
    assert (a / "run.config").read_bytes() == (b / "run.config").read_bytes()
