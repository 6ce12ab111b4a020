import json
import os
import subprocess
import sys

import pytest

from gpfq.cli import main
from gpfq.lab import read_csv


def run(args, capsys=None):
    code = main(args)
    out = capsys.readouterr() if capsys else None
    return code, out


def test_spectra(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["spectra", "--q", "3", "--d", "2", "--out", str(out)]) == 0
    row = read_csv(str(out))[0]
    assert row["identity_ok"] == "1"
    assert float(row["lambda2_numeric"]) == pytest.approx(3 ** 0.5, rel=1e-6)
    for col in ("q", "d", "delta1", "delta2", "lambda2_closed", "lambda2_numeric", "identity_ok"):
        assert col in row


@pytest.mark.parametrize("mode", ["triples", "coplanar", "critical", "bounded"])
def test_supersat_modes(tmp_path, mode):
    out = tmp_path / "x.csv"
    assert main(["supersat", "--q", "7", "--d", "2", "--mode", mode, "--size", "30",
                 "--trials", "3", "--seed", "2", "--out", str(out)]) == 0
    rows = read_csv(str(out))
    assert len(rows) == 3
    if mode in ("triples", "coplanar", "critical"):
        assert all(r["ok"] == "1" for r in rows)


def test_containers_outputs(tmp_path):
    d = tmp_path / "fam"
    assert main(["containers", "--q", "5", "--d", "2", "--strategy", "coplanar", "--threshold", "10",
                 "--audit-samples", "30", "--seed", "1", "--out", str(d)]) == 0
    audit = json.loads((d / "audit.json").read_text())
    assert audit["covered_fraction"] == 1.0
    assert (d / "containers.txt").read_text().startswith("5 2\n")
    assert all(json.loads(line) for line in (d / "log.jsonl").read_text().splitlines())


def test_containers_budget_exit(tmp_path):
    d = tmp_path / "fam"
    code = main(["containers", "--q", "7", "--d", "2", "--strategy", "coplanar", "--threshold", "14",
                 "--max-leaves", "5", "--audit-samples", "0", "--out", str(d)])
    assert code == 3
    assert (d / "containers.txt").exists()


def test_simulate_and_plot(tmp_path):
    csv = tmp_path / "sweep.csv"
    slopes = tmp_path / "slopes.csv"
    assert main(["simulate", "--q", "7", "--d", "2", "--p-grid", "0,qexp:-2:0:5", "--trials", "3",
                 "--seed", "4", "--out", str(csv), "--slopes", str(slopes)]) == 0
    rows = read_csv(str(csv))
    assert len(rows) == 6 * 3
    assert read_csv(str(slopes))
    svg = tmp_path / "p.svg"
    assert main(["plot", "--in", str(csv), "--out", str(svg)]) == 0
    text = svg.read_text()
    assert text.lstrip().startswith("<?xml") and "<svg" in text
    svg2 = tmp_path / "p2.svg"
    main(["plot", "--in", str(csv), "--out", str(svg2)])
    assert svg2.read_text() == text
    png = tmp_path / "p.png"
    assert main(["plot", "--in", str(csv), "--out", str(png)]) == 0
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_simulate_budget_exit(tmp_path):
    csv = tmp_path / "sweep.csv"
    code = main(["simulate", "--q", "13", "--d", "2", "--p-grid", "0.5", "--budget", "2",
                 "--out", str(csv)])
    assert code == 3
    assert read_csv(str(csv))[0]["alpha_exact_flag"] == "0"


def test_count(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["count", "--q", "3", "--d", "2", "--by-size", "--out", str(out)]) == 0
    assert [int(r["count"]) for r in read_csv(str(out))] == [1, 9, 36, 72, 54, 0]
    assert main(["count", "--q", "2", "--d", "2", "--out", str(out)]) == 0
    assert read_csv(str(out))[0]["count"] == "16"
    assert main(["count", "--q", "7", "--d", "2", "--budget", "50", "--out", str(out)]) == 3
    assert read_csv(str(out))[0]["complete"] == "0"
    assert main(["count", "--q", "3", "--d", "2", "--budget", "0", "--out", str(out)]) == 0
    assert read_csv(str(out))[0]["count"] == "172"


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep settings\nq = 5\nd = 2\np-grid = 0,0.5,1\ntrials = 4\nseed = 3\n")
    out = tmp_path / "a.csv"
    assert main(["--config", str(cfg), "simulate", "--out", str(out)]) == 0
    assert len(read_csv(str(out))) == 3 * 4
    assert main(["--config", str(cfg), "simulate", "--trials", "2", "--out", str(out)]) == 0
    assert len(read_csv(str(out))) == 3 * 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert main(["--config", str(bad), "simulate"]) == 2
    bad.write_text("q = eleven\n")
    assert main(["--config", str(bad), "simulate", "--d", "2"]) == 2
    bad.write_text("by_size = true\nq = 2\nd = 2\n")
    assert main(["--config", str(bad), "count", "--out", str(out)]) == 0
    assert len(read_csv(str(out))) > 1


@pytest.mark.parametrize("argv", [
    [], ["bogus"], ["simulate", "--d", "2"], ["simulate", "--q", "6", "--d", "2"],
    ["simulate", "--q", "5", "--d", "2", "--p-grid", "2"], ["simulate", "--q", "5", "--d", "2", "--trials", "0"],
    ["supersat", "--q", "5", "--d", "3", "--mode", "triples", "--size", "10"],
    ["spectra", "--q", "x", "--d", "2"], ["plot", "--out", "x.svg"], ["--config", "/nonexistent", "count"],
    ["count", "--q", "3", "--d", "2", "--budget", "-1"],
])
def test_invalid_arguments_exit_2(argv):
    assert main(argv) == 2


def test_thread_cap_env(tmp_path, monkeypatch):
    monkeypatch.setenv("GPFQ_THREADS", "zero")
    assert main(["count", "--q", "2", "--d", "2"]) == 2
    monkeypatch.setenv("GPFQ_THREADS", "1")
    out1, out2 = tmp_path / "1.csv", tmp_path / "2.csv"
    args = ["simulate", "--q", "7", "--d", "2", "--p-grid", "0.2,0.7", "--trials", "4", "--seed", "8"]
    assert main(args + ["--threads", "4", "--out", str(out1)]) == 0
    monkeypatch.setenv("GPFQ_THREADS", "4")
    assert main(args + ["--threads", "4", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_console_script_exit_codes(tmp_path):
    exe = [sys.executable, "-m", "gpfq"]
    r = subprocess.run(exe + ["count", "--q", "2", "--d", "2"], capture_output=True, text=True)
    assert r.returncode == 0 and "16" in r.stdout
    r = subprocess.run(exe + ["count", "--q", "4", "--d", "0"], capture_output=True, text=True)
    assert r.returncode == 2
