"""INI-style experiment configuration.

Sections and keys (all optional; defaults shown by `default_config_text`):

    [experiment]  r_values, C_values, observable, cusp_Y, y_max
    [precision]   rel_tol, abs_floor, max_terms
    [grid]        y_density, n_lower_y, n_lower_x, nx, window, rate_extra, per_panel
    [checks]      window_center, luo_sarnak_r, ls_f, ls_g, packet_observable
    [output]      dir, format

The only environment variable consulted is CUSPWAVE_OUT, which overrides
[output] dir.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
import math
import os

from cuspwave.special import PrecisionPolicy
from cuspwave.states import nyquist_bound
from cuspwave.surface import parse_observable

OUT_ENV = "CUSPWAVE_OUT"

DEFAULT_TEXT = """\
[experiment]
r_values = 80
C_values = 2, 4, 8
observable = height_cutoff(10, 1)
cusp_Y = 10
y_max = 12

[precision]
rel_tol = 1e-10
abs_floor = 1e-14
max_terms = 4000

[grid]
y_density = 120
n_lower_y = 24
n_lower_x = 64
nx = 64
window = 70
rate_extra = 30
per_panel = 0

[checks]
window_center = 50
luo_sarnak_r = 100
ls_f = height_cutoff(3, 1)
ls_g = height_cutoff(6, 1)
packet_observable = height_cutoff(6, 1)

[output]
dir = cuspwave-out
format = csv
"""


def _floats(text):
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


@dataclass
class ExperimentConfig:
    r_values: list = field(default_factory=lambda: [80.0])
    C_values: list = field(default_factory=lambda: [2.0, 4.0, 8.0])
    observable: str = "height_cutoff(10, 1)"
    cusp_Y: float = 10.0
    y_max: float = 12.0
    policy: PrecisionPolicy = field(default_factory=PrecisionPolicy)
    y_density: float = 120.0
    n_lower_y: int = 24
    n_lower_x: int = 64
    nx: int = 64
    window: float = 70.0
    rate_extra: float = 30.0
    per_panel: int = 0            # 0: derive from the oscillation rate
    window_center: float = 50.0
    luo_sarnak_r: float = 100.0
    ls_f: str = "height_cutoff(3, 1)"
    ls_g: str = "height_cutoff(6, 1)"
    packet_observable: str = "height_cutoff(6, 1)"
    out_dir: str = "cuspwave-out"
    fmt: str = "csv"

    @property
    def g(self):
        return parse_observable(self.observable)


def load_config(path=None, env=None):
    env = os.environ if env is None else env
    cp = configparser.ConfigParser()
    cp.read_string(DEFAULT_TEXT)
    if path is not None:
        with open(path) as fh:
            cp.read_file(fh)
    e, p, g, c, o = cp["experiment"], cp["precision"], cp["grid"], cp["checks"], cp["output"]
    cfg = ExperimentConfig(
        r_values=_floats(e["r_values"]), C_values=_floats(e["C_values"]),
        observable=e["observable"], cusp_Y=e.getfloat("cusp_Y"), y_max=e.getfloat("y_max"),
        policy=PrecisionPolicy(p.getfloat("rel_tol"), p.getfloat("abs_floor"), p.getint("max_terms")),
        y_density=g.getfloat("y_density"), n_lower_y=g.getint("n_lower_y"),
        n_lower_x=g.getint("n_lower_x"), nx=g.getint("nx"), window=g.getfloat("window"),
        rate_extra=g.getfloat("rate_extra"), per_panel=g.getint("per_panel"),
        window_center=c.getfloat("window_center"), luo_sarnak_r=c.getfloat("luo_sarnak_r"),
        ls_f=c["ls_f"], ls_g=c["ls_g"], packet_observable=c["packet_observable"],
        out_dir=o["dir"], fmt=o["format"])
    if env.get(OUT_ENV):
        cfg.out_dir = env[OUT_ENV]
    return cfg


def validate_config(cfg: ExperimentConfig):
    """Return a list of human-readable violations (empty when valid)."""
    out = []
    for r in cfg.r_values:
        if r < 10:
            out.append(f"r = {r} below 10")
        if r > 500 - cfg.window:
            out.append(f"r + window = {r + cfg.window} exceeds the |s| <= 500 envelope")
    for C in cfg.C_values:
        if C < 1:
            out.append(f"C = {C} below 1")
    if cfg.y_max <= 1:
        out.append("y_max must exceed 1")
    try:
        g = cfg.g
        top = getattr(g, "top", math.inf)
        if math.isfinite(top) and cfg.y_max < top:
            out.append(f"y_max = {cfg.y_max} below observable support top {top}")
    except ValueError as exc:
        out.append(str(exc))
    if not cfg.cusp_Y < cfg.y_max:
        out.append(f"cusp_Y = {cfg.cusp_Y} must lie below y_max = {cfg.y_max}")
    if cfg.per_panel:
        t_max = max((C * math.log(r) for C in cfg.C_values for r in cfg.r_values), default=0.0)
        bound = nyquist_bound(t_max, cfg.y_max)
        spacing = 0.5 / cfg.per_panel
        if spacing > bound:
            out.append(f"s-grid spacing {spacing:.4g} exceeds Nyquist bound "
                       f"min(2pi/T, 2pi/log y_max)/8 = {bound:.4g} (T = {t_max:.3g})")
    if cfg.fmt not in ("csv", "json"):
        out.append(f"format {cfg.fmt!r} not in csv|json")
    if cfg.n_lower_x < 8 or cfg.n_lower_y < 8:
        out.append("lower-region node counts must be >= 8")
    return out
