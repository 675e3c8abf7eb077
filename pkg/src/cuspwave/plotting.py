"""Matplotlib figures written next to the delimited output."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_sweep(reports, path):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    for r in sorted({rep.r for rep in reports}):
        rows = sorted((rep for rep in reports if rep.r == r), key=lambda x: x.C)
        C = [x.C for x in rows]
        ax1.plot(C, [x.quantum_ratio for x in rows], "o-", label=f"quantum r={r:g}")
        ax1.plot(C, [x.classical_ratio for x in rows], "s--", label=f"classical r={r:g}")
        ax2.plot(C, [x.cusp_mass_fraction for x in rows], "o-", label=f"r={r:g}")
    ax1.set_xlabel("C  (T = C log r)")
    ax1.set_ylabel("normalised compact-part mass")
    ax1.legend(fontsize=7)
    ax2.set_xlabel("C")
    ax2.set_ylabel("cusp mass fraction")
    ax2.legend(fontsize=7)
    return _save(fig, path)


def plot_coefficients(s, coef, path, title=""):
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.semilogy(s, np.abs(coef) + 1e-300)
    ax.set_xlabel("s")
    ax.set_ylabel("|c(s)|")
    ax.set_title(title)
    return _save(fig, path)


def plot_density(y, dens, path, title=""):
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.plot(y, dens / y ** 2)
    ax.set_xscale("log")
    ax.set_xlabel("y")
    ax.set_ylabel("x-averaged |F|^2 / y^2")
    ax.set_title(title)
    return _save(fig, path)


def plot_field(x, y, values, path, title=""):
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.pcolormesh(x, y, np.abs(values), shading="auto")
    fig.colorbar(im, ax=ax, label="|E|")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    return _save(fig, path)


def plot_horocycle(stats, path):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    y = np.array([s.y for s in stats])
    d = np.array([s.deviation for s in stats])
    ax.loglog(y, np.maximum(d, 1e-18), "o-")
    ax.set_xlabel("y")
    ax.set_ylabel("|average - area|")
    return _save(fig, path)
