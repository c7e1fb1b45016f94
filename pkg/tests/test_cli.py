"""End-to-end command checks through cli.main (no subprocesses)."""
from __future__ import annotations

import json

import pytest

from chemowave.cli import main
from conftest import preset_doc


@pytest.fixture()
def quick_doc(tmp_path):
    """Linear preset shrunk to a fast grid, written to disk."""
    doc = preset_doc("linear")
    doc["solver"]["n"] = 256
    path = tmp_path / "linear_quick.json"
    path.write_text(json.dumps(doc))
    return doc, path


@pytest.fixture()
def blowup_doc(tmp_path):
    doc = preset_doc("device_gradient")
    doc["spec"]["device"]["pi2"] = 40.0
    doc["spec"]["device"]["t_end"] = 2.0
    doc["times"] = [1.5]
    path = tmp_path / "blowup.json"
    path.write_text(json.dumps(doc))
    return path


def test_compare_quick_config(quick_doc, tmp_path, capsys):
    _, path = quick_doc
    assert main(["compare", "--config", str(path),
                 "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "summary.csv").exists()
    assert "front_err=" in capsys.readouterr().out


def test_solve_analytic_preset(tmp_path):
    out = tmp_path / "an"
    assert main(["solve-analytic", "--preset", "quad_pos",
                 "--out", str(out)]) == 0
    lines = (out / "analytic.csv").read_text().splitlines()
    assert lines[0] == "t,x,u"
    assert len(lines) > 1


def test_front_preset(tmp_path):
    out = tmp_path / "front"
    assert main(["front", "--preset", "exponential", "--out", str(out)]) == 0
    lines = (out / "front.csv").read_text().splitlines()
    assert lines[0] == "t,xstar"
    xs = [float(line.split(",")[1]) for line in lines[1:]]
    assert all(b >= a - 1e-12 for a, b in zip(xs, xs[1:]))


def test_oscillatory_flags(tmp_path, capsys):
    out = tmp_path / "osc"
    assert main(["oscillatory", "--a", "2", "--beta", "3", "--omega", "20",
                 "--t-end", "1", "--out", str(out)]) == 0
    lines = (out / "oscillatory.csv").read_text().splitlines()
    assert lines[0] == "t,r_regime,r_reference,error"
    assert len(lines) == 202  # default 201 sample points
    assert "regime fast" in capsys.readouterr().out


def test_oscillatory_regime_override(tmp_path):
    out = tmp_path / "osc2"
    assert main(["oscillatory", "--a", "0.5", "--beta", "3", "--omega", "0.1",
                 "--regime", "slow", "--format", "json",
                 "--out", str(out)]) == 0
    doc = json.loads((out / "oscillatory.json").read_text())
    assert {"t", "r_regime", "r_reference", "error"} <= set(doc[0])


def test_microdevice_preset(tmp_path):
    out = tmp_path / "dev"
    assert main(["microdevice", "--preset", "device_high",
                 "--out", str(out)]) == 0
    assert (out / "device_front.csv").read_text().startswith("t,xstar")
    header = (out / "device_profiles.csv").read_text().splitlines()[0]
    assert header == "t,x,v,u"


def test_solve_pde_coupled_json(tmp_path):
    out = tmp_path / "pde"
    assert main(["solve-pde", "--preset", "device_weak", "--times", "0.5",
                 "--format", "json", "--out", str(out)]) == 0
    doc = json.loads((out / "states.json").read_text())
    assert doc["times"] == [0.5]
    assert len(doc["u"][0]) == 256
    assert "v" in doc and len(doc["v"][0]) == 257


def test_sweep_command(tmp_path):
    base = preset_doc("device_high")
    base["solver"]["n"] = 64
    base["times"] = [0.5]
    sweep_path = tmp_path / "sweep.json"
    sweep_path.write_text(json.dumps(
        {"base": base, "grid": {"spec.device.lambda": [0.05, 0.1]}}))
    out = tmp_path / "sw"
    assert main(["sweep", "--config", str(sweep_path),
                 "--out", str(out)]) == 0
    summary = (out / "summary.csv").read_text().splitlines()
    assert len(summary) == 3  # header plus one row per grid point


# ===== exit codes =====


def test_validation_errors_exit_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "x"}')
    assert main(["compare", "--config", str(bad)]) == 1
    assert main(["compare", "--preset", "no_such_preset"]) == 1
    assert main(["compare"]) == 1
    assert main(["nonsense-subcommand"]) == 1


def test_sweep_doc_fed_to_compare_exits_1(tmp_path):
    doc = {"base": preset_doc("device_high"), "grid": {"spec.device.lambda": [0.1]}}
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(doc))
    assert main(["compare", "--config", str(path)]) == 1


def test_numeric_failure_exits_2(blowup_doc, tmp_path):
    assert main(["compare", "--config", str(blowup_doc),
                 "--out", str(tmp_path / "out")]) == 2


def test_blowup_clamps_in_table_commands(blowup_doc, tmp_path, capsys):
    # the trajectory clamps at the far wall and the device table stops at
    # the critical horizon; both are ordinary exits
    assert main(["front", "--config", str(blowup_doc),
                 "--out", str(tmp_path / "f")]) == 0
    assert main(["microdevice", "--config", str(blowup_doc),
                 "--out", str(tmp_path / "m")]) == 0
    assert "blows up" in capsys.readouterr().out


def test_enforce_failed_rows_exit_3(quick_doc, tmp_path):
    doc, _ = quick_doc
    doc["sup_tol"] = 1e-9  # unreachable bar: rows fail, nothing crashes
    strict = tmp_path / "strict.json"
    strict.write_text(json.dumps(doc))
    assert main(["compare", "--config", str(strict),
                 "--out", str(tmp_path / "o1")]) == 0
    assert main(["compare", "--config", str(strict), "--enforce",
                 "--out", str(tmp_path / "o2")]) == 3
