import json
from pathlib import Path

import pytest

from stringnet import cli


def _write(tmp_path, name, cfg):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_path_scan_and_reproducibility(tmp_path):
    out = tmp_path / "scan.csv"
    cfg = _write(tmp_path, "c.json", {
        "experiment": "path-scan", "path": "tc-ds", "L": 4, "points": 5,
        "seed": 3, "out": str(out),
    })
    assert cli.main(["path-scan", "--config", cfg]) == 0
    first = out.read_bytes()
    manifest = json.loads((tmp_path / "scan.csv.manifest.json").read_text())
    assert manifest["config"]["path"] == "tc-ds"
    assert "version" in manifest and "wall_clock_s" in manifest
    assert cli.main(["path-scan", "--config", cfg]) == 0
    assert out.read_bytes() == first  # bit-for-bit reproducible
    header = out.read_text().splitlines()[0]
    assert header == "path,g,L,eta2_abs,xi,mode,residual"


def test_correlator_fit_chain(tmp_path):
    cout = tmp_path / "c.csv"
    ccfg = _write(tmp_path, "corr.json", {
        "experiment": "correlator", "rule": "wq", "k": 3, "x": 8, "width": 64,
        "rmax": 8, "samples": 2000, "seed": 9, "t0": 4, "nref": 8, "out": str(cout),
    })
    assert cli.main(["correlator", "--config", ccfg]) == 0
    assert cout.read_text().startswith("# rule=wq k=3")
    fout = tmp_path / "fit.csv"
    fcfg = _write(tmp_path, "fit.json", {
        "experiment": "fit", "input": str(cout), "out": str(fout),
        "window_lo": 1, "window_hi": 8,
    })
    assert cli.main(["fit", "--config", fcfg]) == 0
    line = fout.read_text().splitlines()[1]
    exponent = float(line.split(",")[0])
    assert -1.5 < exponent < 0.5
    # appending with different parameters is refused
    bad = _write(tmp_path, "corr2.json", {
        "experiment": "correlator", "rule": "wq", "k": 3, "x": 8, "width": 64,
        "rmax": 8, "samples": 2000, "seed": 10, "t0": 4, "nref": 8, "out": str(cout),
    })
    assert cli.main(["correlator", "--config", bad]) == cli.EXIT_SCHEMA


def test_sample_subcommand(tmp_path):
    out = tmp_path / "s.csv"
    cfg = _write(tmp_path, "s.json", {
        "experiment": "sample", "path": "z22-z4-seg1", "g": 1.0, "width": 4,
        "depth": 2, "samples": 4000, "seed": 2,
        "observable": {"0": [2, 0]}, "out": str(out),
    })
    assert cli.main(["sample", "--config", cfg]) == 0
    re, im, err, samples, seed = out.read_text().splitlines()[1].split(",")
    assert int(samples) == 4000
    assert abs(float(re)) <= 4 * float(err) + 1e-12  # <Z^2> = 0 at the fixed point


def test_validate_and_oracle_check(tmp_path):
    vcfg = _write(tmp_path, "v.json", {
        "experiment": "validate", "paths": "tc-ds", "points": 11,
        "out": str(tmp_path / "v.txt"),
    })
    assert cli.main(["validate", "--config", vcfg]) == 0
    ocfg = _write(tmp_path, "o.json", {
        "experiment": "oracle-check", "cases": 5, "seed": 1,
        "out": str(tmp_path / "o.txt"),
    })
    assert cli.main(["oracle-check", "--config", ocfg]) == 0
    assert "all checks passed" in (tmp_path / "o.txt").read_text()


def test_schema_violations_exit_2(tmp_path):
    cfg = _write(tmp_path, "bad.json", {"experiment": "path-scan", "path": "tc-ds"})
    assert cli.main(["path-scan", "--config", cfg]) == cli.EXIT_SCHEMA
    cfg = _write(tmp_path, "bad2.json", {
        "experiment": "path-scan", "path": "nope", "L": 4, "seed": 1,
        "out": str(tmp_path / "x.csv"),
    })
    assert cli.main(["path-scan", "--config", cfg]) == cli.EXIT_SCHEMA
    nested = _write(tmp_path, "bad3.json", {
        "experiment": "path-scan", "path": "tc-ds", "L": 4, "seed": 1,
        "out": str(tmp_path / "x.csv"), "extra": [1, 2, 3],
    })
    assert cli.main(["path-scan", "--config", nested]) == cli.EXIT_SCHEMA


def test_sample_oracle_check_and_cap_exit_3(tmp_path):
    cfg = _write(tmp_path, "okcap.json", {
        "experiment": "sample", "path": "z22-z4-seg1", "g": 0.5, "width": 4,
        "depth": 1, "samples": 50000, "seed": 7, "check_oracle": True,
        "observable": {"0": [2, 0], "4": [2, 0]}, "out": str(tmp_path / "ok.csv"),
    })
    assert cli.main(["sample", "--config", cfg]) == 0
    row = (tmp_path / "ok.csv").read_text().splitlines()[1].split(",")
    re, err, exact_re = float(row[0]), float(row[2]), float(row[5])
    assert abs(re - exact_re) <= 4 * err + 1e-12
    cfg = _write(tmp_path, "cap.json", {
        "experiment": "sample", "path": "z22-z4-seg1", "g": 0.5, "width": 8,
        "depth": 4, "samples": 10, "seed": 1, "check_oracle": True,
        "observable": {"0": [2, 0]}, "out": str(tmp_path / "x.csv"),
    })
    assert cli.main(["sample", "--config", cfg]) == cli.EXIT_CAP


def test_fit_insufficient_points_exit_1(tmp_path):
    cout = tmp_path / "c.csv"
    cout.write_text(
        "# rule=wq k=3 samples=10 seed=1\nr,re,im,stderr\n"
        + "\n".join(f"{r},0.0001,0.0,1.0" for r in range(1, 17))
        + "\n"
    )
    cfg = _write(tmp_path, "f.json", {
        "experiment": "fit", "input": str(cout), "out": str(tmp_path / "f.csv"),
    })
    assert cli.main(["fit", "--config", cfg]) == cli.EXIT_GENERIC
