"""Experiment orchestration and report persistence."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
import csv
import json
import logging
import math
from pathlib import Path

import numpy as np

from cuspwave.classical import classical_expectation
from cuspwave.config import ExperimentConfig
from cuspwave.eisenstein import EisensteinEvaluator
from cuspwave.propagation import (cusp_mass_fraction, field_norm_sq, l2_norm_sq,
                                  quantum_expectation, quasimode_defect, synthesize_many)
from cuspwave.quadrature import SpectralGrid
from cuspwave.states import nyquist_bound, vt_coefficients
from cuspwave.surface import Constant, TruncatedDomain

log = logging.getLogger(__name__)

SCHEMA = "cuspwave-report/1"
LONG_SCHEMA = "cuspwave-report-long/1"


@dataclass
class ExpectationReport:
    r: float
    C: float
    T: float
    quantum_norm_sq: float = math.nan
    spectral_norm_sq: float = math.nan
    quantum_expectation: float = math.nan
    classical_expectation: float = math.nan
    classical_norm_sq: float = math.nan
    cusp_mass_fraction: float = math.nan
    quasimode_defect: float = math.nan
    quantum_ratio: float = math.nan
    classical_ratio: float = math.nan
    divergence_factor: float = math.nan
    status: str = "ok"

    def metrics(self):
        return {f.name: getattr(self, f.name) for f in fields(self)
                if f.name not in ("r", "C", "status")}


COLUMNS = [f.name for f in fields(ExpectationReport)]


def build_domain(cfg: ExperimentConfig):
    return TruncatedDomain(cfg.y_max, y_density=cfg.y_density, nx=cfg.nx,
                           n_lower_y=cfg.n_lower_y, n_lower_x=cfg.n_lower_x,
                           breaks=(cfg.cusp_Y,))


def spectral_grid(cfg: ExperimentConfig, r):
    t_max = max(C * math.log(r) for C in cfg.C_values)
    hi = min(0.0, -r + cfg.window)
    spacing = nyquist_bound(t_max, cfg.y_max)
    if cfg.per_panel:
        return SpectralGrid(-(r + cfg.window), hi, 0.5, cfg.per_panel)
    return SpectralGrid.for_rate(-(r + cfg.window), hi, cfg.rate_extra + t_max, spacing=spacing)


def run_divergence_experiment(cfg: ExperimentConfig, cache_dir=None):
    """One ExpectationReport per (r, C); failures are recorded per r-row."""
    reports = []
    g = cfg.g
    dom = build_domain(cfg)
    ev = EisensteinEvaluator(cfg.policy)
    for r in cfg.r_values:
        rows = [ExpectationReport(r, C, C * math.log(r)) for C in cfg.C_values]
        try:
            grid = spectral_grid(cfg, r)
            coeffs = [vt_coefficients(r, row.T, grid, y_max=cfg.y_max) for row in rows]
            states = synthesize_many(coeffs, dom, ev, cache_dir)
            for row, c, st in zip(rows, coeffs, states):
                row.quantum_norm_sq = field_norm_sq(c)
                row.spectral_norm_sq = l2_norm_sq(c)
                row.quantum_expectation = quantum_expectation(g, st)
                row.cusp_mass_fraction = cusp_mass_fraction(st, cfg.cusp_Y)
                row.quasimode_defect = quasimode_defect(c)
                cl = classical_expectation(g, r, row.T)
                row.classical_expectation = cl.value
                row.classical_norm_sq = classical_expectation(Constant(), r, row.T).value
                row.quantum_ratio = row.quantum_expectation / row.quantum_norm_sq
                row.classical_ratio = row.classical_expectation / row.classical_norm_sq
                row.divergence_factor = row.classical_ratio / row.quantum_ratio
        except Exception as exc:  # keep the sweep alive, record why
            log.exception("cell r=%s failed", r)
            for row in rows:
                row.status = f"error: {type(exc).__name__}: {exc}"
        reports.extend(rows)
    return reports


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def emit_reports(reports, out_dir, fmt="csv", stem="reports"):
    """Write reports as CSV (schema comment + header) or JSON, plus the
    long-format file (r, C, metric, value).  Returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if fmt == "csv":
        p = out / f"{stem}.csv"
        with open(p, "w", newline="") as fh:
            fh.write(f"# schema: {SCHEMA}\n")
            w = csv.writer(fh)
            w.writerow(COLUMNS)
            for rep in reports:
                w.writerow([_fmt(getattr(rep, c)) for c in COLUMNS])
    elif fmt == "json":
        p = out / f"{stem}.json"
        with open(p, "w") as fh:
            json.dump({"schema": SCHEMA, "reports": [asdict(r) for r in reports]}, fh,
                      indent=2, sort_keys=True)
    else:
        raise ValueError("format must be csv or json")
    paths.append(p)
    lp = out / f"{stem}_long.csv"
    with open(lp, "w", newline="") as fh:
        fh.write(f"# schema: {LONG_SCHEMA}\n")
        w = csv.writer(fh)
        w.writerow(["r", "C", "metric", "value"])
        for rep in reports:
            for k, v in rep.metrics().items():
                w.writerow([_fmt(rep.r), _fmt(rep.C), k, _fmt(v)])
    paths.append(lp)
    return paths


def read_reports_json(path):
    with open(path) as fh:
        data = json.load(fh)
    return [ExpectationReport(**d) for d in data["reports"]]


def read_reports_csv(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    out = []
    for row in rows:
        kw = {k: (row[k] if k == "status" else float(row[k])) for k in COLUMNS}
        out.append(ExpectationReport(**kw))
    return out
