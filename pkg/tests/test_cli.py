import json
import subprocess
import sys

import numpy as np
import pytest

from blaschke.cli import main
from blaschke.exceptional import read_arcs, read_intervals
from blaschke.zeros import gen_geometric, ingest

GEO = ["--family", "geometric", "--c", "0.5", "--count", "25", "--angles", "golden"]


def test_gen_writes_zero_file(tmp_path):
    assert main(["gen", "--c", "0.5", "--count", "3", "--out", str(tmp_path)]) == 0
    seq = ingest(tmp_path / "zeros.txt")
    np.testing.assert_array_equal(seq.radii, [0.5, 0.75, 0.875])
    assert seq == gen_geometric(0.5, 3)


def test_gen_stdout(capsys):
    assert main(["gen", "--c", "0.5", "--count", "2"]) == 0
    assert capsys.readouterr().out == "0.5 0\n0.75 0\n"


def test_single_zero_verify_circular(tmp_path):
    (tmp_path / "z.txt").write_text("0.5 0.0\n")
    cfg = {"sequence": {"family": "file", "path": str(tmp_path / "z.txt")},
           "weight": {"alpha": 1.0}, "beta": 1.0, "ladder": {"kmin": 5, "kmax": 16}}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    out = tmp_path / "run"
    assert main(["verify-circular", "--config", str(tmp_path / "cfg.json"), "--out", str(out)]) == 0
    rows = (out / "report.tsv").read_text().splitlines()
    assert len(rows) == 1 + 12
    summary = json.loads((out / "summary.json").read_text())
    assert summary["verdict"] == "pass" and summary["samples"] == 12


def test_beta_below_one_is_usage_error(capsys):
    assert main(["verify-circular", *GEO, "--beta", "0.5"]) == 2
    err = capsys.readouterr().err
    assert "beta" in err and "beta >= 1" in err


@pytest.mark.parametrize("argv, field", [
    (["verify-circular", "--family", "geometric", "--count", "5"], "sequence.c"),
    (["verify-radial", *GEO, "--aperture", "1.0"], "aperture"),
    (["verify-circular", *GEO, "--kmin", "9", "--kmax", "3"], "ladder"),
    (["verify-circular", *GEO, "--alpha", "1.5"], "weight"),
    (["eval", *GEO], "z"),
    (["verify-circular", *GEO, "--workers", "0"], "workers"),
])
def test_usage_errors_name_field(capsys, argv, field):
    assert main(argv) == 2
    assert field in capsys.readouterr().err


def test_unknown_command_and_bad_config(tmp_path, capsys):
    assert main(["frobnicate"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["gen", "--config", str(bad)]) == 2
    assert "config" in capsys.readouterr().err


def test_flags_override_config(tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps({"sequence": {"family": "geometric", "c": 0.9, "count": 2}}))
    main(["gen", "--config", str(tmp_path / "cfg.json"), "--c", "0.5", "--out", str(tmp_path)])
    np.testing.assert_array_equal(ingest(tmp_path / "zeros.txt").radii, [0.5, 0.75])


def test_verification_failure_exit_one(tmp_path):
    # the circular set of this family swallows the whole ladder
    argv = ["verify-remark1", "--family", "power_law", "--p", "2", "--count", "600", "--alpha", "0.5",
            "--kmin", "4", "--kmax", "16"]
    assert main(argv) == 1


def test_eval_and_logderiv(tmp_path):
    assert main(["eval", "--c", "0.5", "--count", "1", "--z", "0", "--out", str(tmp_path / "e")]) == 0
    row = (tmp_path / "e" / "report.tsv").read_text().splitlines()[1].split("\t")
    assert float(row[2]) == pytest.approx(0.5)
    assert main(["logderiv", "--c", "0.5", "--count", "1", "--z", "0.25", "--out", str(tmp_path / "l")]) == 0
    row = (tmp_path / "l" / "report.tsv").read_text().splitlines()[1].split("\t")
    assert float(row[2]) == pytest.approx(-24 / 7)


def test_pole_is_usage_error():
    assert main(["logderiv", "--c", "0.5", "--count", "1", "--z", "0.5"]) == 2


def test_check_exit_codes():
    assert main(["check", "--alpha", "0.5"]) == 0
    assert main(["check", "--alpha", "0.5", "--family", "geometric", "--c", "0.5", "--count", "30"]) == 0
    assert main(["check", "--alpha", "0.5", "--family", "power_law", "--p", "2", "--count", "100"]) == 1


def test_exset_files(tmp_path):
    assert main(["exset-circular", *GEO, "--out", str(tmp_path / "c")]) == 0
    E = read_intervals(tmp_path / "c" / "intervals.txt")
    assert E.beta == 1.0 and len(E) > 0
    assert main(["exset-radial", *GEO, "--N", "5", "--out", str(tmp_path / "r")]) == 0
    arcs = read_arcs(tmp_path / "r" / "arcs.txt")
    assert arcs.aperture == 2.0 and len(arcs) == 25
    summary = json.loads((tmp_path / "r" / "summary.json").read_text())
    assert isinstance(summary["free_angle"], float)


def test_verify_radial_and_sweep(tmp_path):
    assert main(["verify-radial", *GEO, "--kmax", "18", "--out", str(tmp_path / "r")]) == 0
    cfg = {"families": [{"family": "geometric", "c": 0.5, "count": 25, "angles": "golden"}],
           "weights": [{"alpha": 0.5}], "betas": [1.0, 2.0]}
    (tmp_path / "sweep.json").write_text(json.dumps(cfg))
    assert main(["sweep", "--config", str(tmp_path / "sweep.json"), "--out", str(tmp_path / "s")]) == 0
    assert len((tmp_path / "s" / "sweep.csv").read_text().splitlines()) == 3


def test_random_angles_reproducible(tmp_path):
    args = ["gen", "--c", "0.5", "--count", "20", "--angles", "random", "--seed", "12"]
    main([*args, "--out", str(tmp_path / "a")])
    main([*args, "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "zeros.txt").read_bytes() == (tmp_path / "b" / "zeros.txt").read_bytes()


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "blaschke", "gen", "--c", "0.5", "--count", "3"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.splitlines()[0] == "0.5 0"
    res = subprocess.run([sys.executable, "-m", "blaschke", "verify-circular", *GEO, "--beta", "0.5"],
                         capture_output=True, text=True)
    assert res.returncode == 2 and "beta" in res.stderr
