import csv
import json

import pytest

from kkwave import __version__
from kkwave.cli import main

SMALL = """
grid.x_min = -51.2
grid.x_max = 51.2
grid.n = 512
packet.d = 10
packet.w = 2
packet.p0 = 1
solver.dt = 0.01
solver.t_final = 2
solver.strobe = 0.5
"""


def write(tmp_path, text, name="run.txt"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_run_writes_manifest_and_trajectory(tmp_path, capsys):
    cfg = write(tmp_path, SMALL + "potential.variant = gaussian\npotential.V0 = 1\n"
                "potential.alpha = 0.5\nforce.variant = cosine\nforce.F0 = 0.05\n"
                "force.T = 2\noutput.field_csv = true\n")
    out = tmp_path / "out"
    assert main(["run", cfg, "--out", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    for key in ("version", "python", "numpy", "scipy", "threads", "config"):
        assert key in man
    assert man["config"]["grid.n"] == 512
    rows = list(csv.DictReader(open(out / "trajectory" / "index.csv")))
    assert [float(r["t"]) for r in rows] == [0.5, 1.0, 1.5, 2.0]
    assert (out / "final_field.csv").exists() and (out / "force.csv").exists()
    assert "final_norm" in capsys.readouterr().out


def test_run_with_diagnostics(tmp_path):
    big = SMALL.replace("51.2", "102.4").replace("512", "1024")
    cfg = write(tmp_path, big.replace("solver.t_final = 2", "solver.t_final = 6") +
                "potential.variant = single_pole\npotential.V0 = 1\npotential.alpha = 1\n"
                "potential.envelope_b = 10\nforce.variant = cosine\nforce.F0 = 0.05\n"
                "force.T = 2\ndiagnostics.enabled = true\ndiagnostics.x_w = 5\ndiagnostics.t_w = 3\n"
                "output.snapshots = false\n")
    out = tmp_path / "diag"
    assert main(["run", cfg, "--out", str(out)]) == 0
    report = (out / "report.txt").read_text()
    assert "delta_max" in report and "verdict" in report
    assert (out / "index.csv").exists()


def test_sweep_second_order(tmp_path, capsys):
    cfg = write(tmp_path, SMALL + "force.variant = cosine\nforce.F0 = 0.05\nforce.T = 2\n")
    assert main(["sweep", cfg, "--dt-factors", "1", "0.5", "--out", str(tmp_path / "sw")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "dt,n,dx,error,resolved,order"
    order = float(lines[-1].split(",")[-1])
    assert order == pytest.approx(2.0, abs=0.05)
    assert (tmp_path / "sw" / "convergence.csv").exists()


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["run", write(tmp_path, "grid.n = 100\n")]) == 2
    assert "grid.n" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.txt")]) == 2
    assert main(["scenario", "nope"]) == 2
    assert main(["scenario", "fig1", "--set", "bogus.key=1"]) == 2
    assert main([]) == 2


def test_convergence_failure_exit_3(tmp_path):
    cfg = write(tmp_path, SMALL.replace("packet.w = 2", "packet.w = 0.5"))
    assert main(["sweep", cfg, "--n-factors", "0.5", "1", "--out", str(tmp_path / "s")]) == 3


def test_domain_guard_exit_4(tmp_path, capsys):
    cfg = write(tmp_path, SMALL.replace("packet.p0 = 1", "packet.p0 = -8"))
    assert main(["run", cfg, "--out", str(tmp_path / "g")]) == 4
    assert "DomainGuardError" in capsys.readouterr().err


def test_version(capsys):
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out
