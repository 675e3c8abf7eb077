"""Command line entry point: cuspwave <subcommand> [options]."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
from pathlib import Path
import sys

import numpy as np

from cuspwave.config import load_config, validate_config


def _writer(out, name, fmt, header, rows, meta=None):
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        p = out / f"{name}.json"
        with open(p, "w") as fh:
            json.dump({"meta": meta or {}, "columns": header,
                       "rows": [[_plain(v) for v in row] for row in rows]}, fh, indent=2)
    else:
        p = out / f"{name}.csv"
        with open(p, "w", newline="") as fh:
            fh.write(f"# schema: cuspwave-{name}/1\n")
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([_plain(v) for v in row])
    return p


def _plain(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    return str(v) if not isinstance(v, str) else v


def cmd_specfun(args, cfg, out, cache):
    from cuspwave import special
    from cuspwave.eisenstein import scattering_phase
    rows = []
    for text in args.values:
        z = complex(text.replace(" ", ""))
        if args.func == "gamma":
            v = complex(special.gamma_complex(z))
        elif args.func == "zeta":
            v = complex(special.zeta(z, cfg.policy))
        elif args.func == "xi":
            v = complex(special.xi_completed(z, cfg.policy))
        elif args.func == "phi":
            v = scattering_phase(z.real)
        else:
            if args.x is None:
                raise SystemExit("kbessel needs --x")
            v = complex(special.bessel_k_imag_order(z.real, args.x))
        rows.append([text, v.real, v.imag])
    return [_writer(out, f"specfun_{args.func}", args.format, ["arg", "re", "im"], rows)]


def cmd_eisenstein(args, cfg, out, cache):
    from cuspwave.eisenstein import EisensteinEvaluator, eisenstein_eval
    from cuspwave.plotting import plot_field
    ev = EisensteinEvaluator(cfg.policy)
    xs = np.linspace(-0.5, 0.5, args.nx)
    ys = np.geomspace(math.sqrt(3) / 2, args.y_top, args.ny)
    vals = np.empty((ys.size, xs.size), dtype=complex)
    rows = []
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            vals[i, j] = eisenstein_eval(complex(x, y), args.s, ev)
            rows.append([x, y, vals[i, j].real, vals[i, j].imag])
    p = _writer(out, "eisenstein", args.format, ["x", "y", "re", "im"], rows, {"s": args.s})
    fig = plot_field(xs, ys, vals, out / "eisenstein.png", f"|E(z, 1/2+{args.s:g}i)|")
    return [p, fig]


def cmd_decompose(args, cfg, out, cache):
    from cuspwave.eisenstein import decompose, parseval_norm_sq
    from cuspwave.plotting import plot_coefficients
    from cuspwave.states import DEFAULT_PROFILE
    c = decompose(args.r)
    rows = [[s, v.real, v.imag, abs(v)] for s, v in zip(c.grid.nodes, c.coef)]
    meta = {"r": args.r, "constant_term": [c.constant_term.real, c.constant_term.imag],
            "parseval_norm_sq": parseval_norm_sq(c), "direct_norm_sq": DEFAULT_PROFILE.norm_sq()}
    p = _writer(out, "decompose", args.format, ["s", "re", "im", "abs"], rows, meta)
    (out / "decompose_summary.json").write_text(json.dumps(meta, indent=2))
    fig = plot_coefficients(c.grid.nodes, c.coef, out / "decompose.png", f"r = {args.r:g}")
    return [p, out / "decompose_summary.json", fig]


def cmd_propagate(args, cfg, out, cache):
    from cuspwave.eisenstein import EisensteinEvaluator
    from cuspwave.plotting import plot_density
    from cuspwave.propagation import export_state_csv, state_summary, synthesize
    from cuspwave.report import build_domain
    from cuspwave.states import default_grid, vt_coefficients
    T = args.C * math.log(args.r)
    grid = default_grid(args.r, T, cfg.y_max, cfg.window)
    c = vt_coefficients(args.r, T, grid, y_max=cfg.y_max)
    st = synthesize(c, build_domain(cfg), EisensteinEvaluator(cfg.policy), cache)
    summary = state_summary(st)
    paths = []
    if args.format == "csv":
        p = out / "state.csv"
        out.mkdir(parents=True, exist_ok=True)
        export_state_csv(st, p)
        paths.append(p)
    js = out / "state_summary.json"
    out.mkdir(parents=True, exist_ok=True)
    js.write_text(json.dumps(summary, indent=2, sort_keys=True))
    paths.append(js)
    paths.append(plot_density(st.y_upper, st.density_upper(), out / "state_density.png",
                              f"r = {args.r:g}, C = {args.C:g}"))
    return paths


def cmd_classical(args, cfg, out, cache):
    from cuspwave.classical import classical_expectation, horocycle_stats
    from cuspwave.plotting import plot_horocycle
    g = cfg.g
    rows = []
    for r in cfg.r_values:
        for C in cfg.C_values:
            T = C * math.log(r)
            res = classical_expectation(g, r, T)
            rows.append([r, C, T, res.value, res.comparator, res.route])
    p = _writer(out, "classical", args.format,
                ["r", "C", "T", "classical_expectation", "comparator", "route"], rows)
    stats = horocycle_stats(g, np.geomspace(0.3, 0.003, 9))
    h = _writer(out, "horocycle", args.format, ["y", "average", "reference", "deviation", "delta_fit"],
                [[s.y, s.average, s.reference, s.deviation, s.delta_fit] for s in stats])
    return [p, h, plot_horocycle(stats, out / "horocycle.png")]


def cmd_checks(args, cfg, out, cache):
    from cuspwave import checks
    from cuspwave.report import build_domain
    from cuspwave.states import QuasimodeWindow
    from cuspwave.surface import parse_observable
    rows = []
    w = QuasimodeWindow.default(cfg.window_center)
    for L in (5.0, 10.0):
        a, b = checks.kernel_double_integral(w, L), checks.plancherel_form(w, L)
        rows.append(["kernel_vs_plancherel", L, a, b, abs(a / b - 1)])
    for t0 in (-0.5, 0.25, 0.5, 1.0, 1.5):
        a, b = checks.u_transform_pairing(t0)
        rows.append(["u_transform_pairing", t0, a.real, b, abs(a - b)])
    cm = checks.corollary_mass(w)
    rows.append(["corollary_mass", w.center, cm, checks.full_transform_mass(w), 0.0])
    if not args.quick:
        dom = build_domain(cfg)
        f, g = parse_observable(cfg.ls_f), parse_observable(cfg.ls_g)
        st = checks.eisenstein_line_state(cfg.luo_sarnak_r, dom, cache_dir=cache)
        from cuspwave.surface import normalized_area
        ratio = checks.luo_sarnak_ratio(f, g, cfg.luo_sarnak_r, state=st)
        area = normalized_area(f) / normalized_area(g)
        rows.append(["luo_sarnak_ratio", cfg.luo_sarnak_r, ratio, area, abs(ratio / area - 1)])
        gr, ref = checks.luo_sarnak_growth(f, cfg.luo_sarnak_r, state=st)
        rows.append(["luo_sarnak_growth", cfg.luo_sarnak_r, gr, ref, gr / ref])
        pg = parse_observable(cfg.packet_observable)
        pk = checks.eisenstein_packet(w, dom, cache_dir=cache)
        val = checks.packet_expectation(pg, pk)
        rows.append(["packet_expectation", w.center, val, checks.packet_comparator(pg, w),
                     val / checks.packet_comparator(pg, w)])
    return [_writer(out, "checks", args.format, ["check", "param", "value", "reference", "discrepancy"], rows)]


def cmd_sweep(args, cfg, out, cache):
    from cuspwave.plotting import plot_sweep
    from cuspwave.report import emit_reports, run_divergence_experiment
    reports = run_divergence_experiment(cfg, cache)
    paths = emit_reports(reports, out, args.format)
    if reports:
        paths.append(plot_sweep(reports, out / "sweep.png"))
    return paths


COMMANDS = {
    "specfun": cmd_specfun, "eisenstein": cmd_eisenstein, "decompose": cmd_decompose,
    "propagate": cmd_propagate, "classical": cmd_classical, "checks": cmd_checks,
    "sweep": cmd_sweep,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI configuration file")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--format", choices=("csv", "json"), help="tabular output format")
    common.add_argument("--threads", type=int, default=None, help="numba worker threads")
    common.add_argument("--no-cache", action="store_true", help="do not read or write the mode-table cache")
    common.add_argument("-v", "--verbose", action="store_true")
    ap = argparse.ArgumentParser(prog="cuspwave", description=__doc__, parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("specfun", parents=[common], help="evaluate special functions")
    p.add_argument("func", choices=("gamma", "zeta", "xi", "phi", "kbessel"))
    p.add_argument("values", nargs="+", help="complex arguments (e.g. 0.5+14.13j); order for kbessel")
    p.add_argument("--x", type=float, help="argument x of K_{ir}(x)")
    p = sub.add_parser("eisenstein", parents=[common], help="dump E(z, 1/2+is) on a grid")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--nx", type=int, default=41)
    p.add_argument("--ny", type=int, default=41)
    p.add_argument("--y-top", type=float, default=3.0)
    p = sub.add_parser("decompose", parents=[common], help="Eisenstein transform of f_r")
    p.add_argument("--r", type=float, required=True)
    p = sub.add_parser("propagate", parents=[common], help="synthesize V_T f_r")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--C", type=float, required=True)
    sub.add_parser("classical", parents=[common], help="classical expectations and horocycles")
    p = sub.add_parser("checks", parents=[common], help="window/kernel and Luo-Sarnak checks")
    p.add_argument("--quick", action="store_true", help="skip the surface integrals")
    sub.add_parser("sweep", parents=[common], help="headline divergence experiment")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = load_config(args.config)
    if args.format:
        cfg.fmt = args.format
    args.format = cfg.fmt
    if args.out:
        cfg.out_dir = str(args.out)
    problems = validate_config(cfg)
    if problems:
        for msg in problems:
            print(f"config: {msg}", file=sys.stderr)
        return 2
    if args.threads:
        import numba
        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    out = Path(cfg.out_dir)
    cache = None if args.no_cache else out / ".cache"
    paths = COMMANDS[args.command](args, cfg, out, cache)
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
