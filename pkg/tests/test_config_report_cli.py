import csv
import json
import math

import pytest

from cuspwave import cli
from cuspwave.config import OUT_ENV, ExperimentConfig, load_config, validate_config
from cuspwave.report import (COLUMNS, LONG_SCHEMA, SCHEMA, ExpectationReport, emit_reports,
                             read_reports_csv, read_reports_json, run_divergence_experiment)

SMALL = """\
[experiment]
r_values = 20
C_values = 1, 2
observable = height_cutoff(3, 1)
cusp_Y = 5
y_max = 8

[grid]
y_density = 40
n_lower_y = 16
n_lower_x = 32
nx = 32
window = 40

[checks]
window_center = 30
luo_sarnak_r = 20
"""


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.ini"
    p.write_text(SMALL)
    return p


def test_defaults_are_valid():
    cfg = load_config(env={})
    assert validate_config(cfg) == []
    assert cfg.r_values == [80.0] and cfg.C_values == [2.0, 4.0, 8.0]
    assert cfg.out_dir == "cuspwave-out"


def test_env_overrides_output_dir(small_cfg):
    assert load_config(small_cfg, env={OUT_ENV: "/tmp/elsewhere"}).out_dir == "/tmp/elsewhere"
    assert load_config(small_cfg, env={}).out_dir == "cuspwave-out"


@pytest.mark.parametrize("change,fragment", [
    ({"r_values": [5.0]}, "below 10"),
    ({"r_values": [480.0]}, "envelope"),
    ({"C_values": [0.5]}, "C = 0.5"),
    ({"y_max": 9.0}, "support top"),
    ({"cusp_Y": 12.0}, "cusp_Y"),
    ({"per_panel": 2}, "Nyquist"),
    ({"fmt": "xml"}, "format"),
    ({"n_lower_x": 4}, "lower-region"),
    ({"observable": "banana(1)"}, "banana"),
])
def test_validation_messages(change, fragment):
    cfg = ExperimentConfig(**change)
    msgs = validate_config(cfg)
    assert any(fragment in m for m in msgs), msgs


def _reports():
    return [ExpectationReport(80.0, 2.0, 2 * math.log(80), 1.0, 1.1, 0.5, 0.25, 0.3, 0.1, 3.0,
                              0.5, 0.9, 1.8),
            ExpectationReport(80.0, 8.0, 8 * math.log(80), status="error: X")]


def test_csv_and_json_round_trip(tmp_path):
    reps = _reports()
    p, lp = emit_reports(reps, tmp_path, "csv")
    assert p.read_text().splitlines()[0] == f"# schema: {SCHEMA}"
    back = read_reports_csv(p)
    assert back[0] == reps[0]
    assert back[1].status == "error: X" and math.isnan(back[1].quantum_norm_sq)
    pj, _ = emit_reports(reps, tmp_path, "json")
    again = read_reports_json(pj)
    assert again[0] == reps[0]
    with pytest.raises(ValueError):
        emit_reports(reps, tmp_path, "xml")


def test_long_format(tmp_path):
    _, lp = emit_reports(_reports(), tmp_path, "csv")
    lines = lp.read_text().splitlines()
    assert lines[0] == f"# schema: {LONG_SCHEMA}"
    rows = list(csv.DictReader(lines[1:]))
    assert list(rows[0]) == ["r", "C", "metric", "value"]
    metrics = {r["metric"] for r in rows}
    assert metrics == set(COLUMNS) - {"r", "C", "status"}
    assert len(rows) == 2 * len(metrics)


def test_sweep_deterministic_and_failure_isolated(small_cfg, tmp_path):
    cfg = load_config(small_cfg, env={})
    cfg.r_values = [20.0, 499.0]           # the second r leaves the K-Bessel envelope
    cache = tmp_path / "cache"
    first = run_divergence_experiment(cfg, cache)
    second = run_divergence_experiment(cfg, cache)
    assert [r.status for r in first[:2]] == ["ok", "ok"]
    assert all(r.status.startswith("error") for r in first[2:])
    for a, b in zip(first[:2], second[:2]):
        assert a == b
    for rep in first[:2]:
        assert 0 <= rep.cusp_mass_fraction <= 1
        assert rep.quantum_ratio > 0 and rep.classical_ratio > 0


def test_cli_specfun_and_checks(tmp_path, capsys):
    assert cli.main(["specfun", "zeta", "2", "--out", str(tmp_path), "--format", "json"]) == 0
    data = json.loads((tmp_path / "specfun_zeta.json").read_text())
    assert data["rows"][0][1] == pytest.approx(math.pi ** 2 / 6)
    assert cli.main(["specfun", "kbessel", "5", "--x", "50", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "specfun_kbessel.csv").read_text().splitlines()
    assert text[0] == "# schema: cuspwave-specfun_kbessel/1"
    assert cli.main(["checks", "--quick", "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "checks.csv").read_text().splitlines()
    assert rows[1] == "check,param,value,reference,discrepancy"


def test_cli_rejects_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\nr_values = 5\n")
    assert cli.main(["sweep", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "below 10" in capsys.readouterr().err


def test_cli_sweep_and_decompose(small_cfg, tmp_path):
    out = tmp_path / "o"
    assert cli.main(["sweep", "--config", str(small_cfg), "--out", str(out), "--threads", "1"]) == 0
    assert (out / "reports.csv").exists() and (out / "reports_long.csv").exists()
    assert (out / "sweep.png").exists()
    assert any((out / ".cache").iterdir())
    assert cli.main(["decompose", "--r", "20", "--out", str(out), "--no-cache"]) == 0
    meta = json.loads((out / "decompose_summary.json").read_text())
    assert meta["parseval_norm_sq"] == pytest.approx(meta["direct_norm_sq"], rel=1e-4)
    assert (out / "decompose.png").exists()


def test_cli_classical_and_eisenstein(small_cfg, tmp_path):
    out = tmp_path / "c"
    assert cli.main(["classical", "--config", str(small_cfg), "--out", str(out)]) == 0
    assert (out / "classical.csv").exists() and (out / "horocycle.png").exists()
    assert cli.main(["eisenstein", "--s", "5", "--nx", "5", "--ny", "4", "--out", str(out)]) == 0
    assert len((out / "eisenstein.csv").read_text().splitlines()) == 2 + 20
