"""Composite Gauss-Legendre rules used throughout the package."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np


@lru_cache(maxsize=64)
def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a, b, n):
    """n-point Gauss-Legendre nodes and weights on [a, b]."""
    x, w = _gl(int(n))
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def composite_gl(a, b, width, n):
    """Equal panels of width <= `width` on [a, b], n nodes each."""
    if b <= a:
        return np.empty(0), np.empty(0)
    npan = max(1, int(math.ceil((b - a) / width - 1e-12)))
    edges = np.linspace(a, b, npan + 1)
    x, w = _gl(int(n))
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class SpectralGrid:
    """Gauss-Legendre grid on a window [s_lo, s_hi] of the spectral line.

    Panels have a fixed width and `per_panel` nodes; `mean_spacing` is what
    the Nyquist checks compare against the oscillation periods in play.
    """

    s_lo: float
    s_hi: float
    width: float = 0.5
    per_panel: int = 16
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.s_hi > self.s_lo:
            raise ValueError("empty spectral window")
        x, w = composite_gl(self.s_lo, self.s_hi, self.width, self.per_panel)
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "weights", w)

    @property
    def mean_spacing(self):
        return (self.s_hi - self.s_lo) / self.nodes.size

    @classmethod
    def for_rate(cls, s_lo, s_hi, rate, width=0.5, spacing=None):
        """Grid resolving integrands whose phase changes by <= `rate` per unit s.

        The node count per panel follows the Gauss-Legendre rule of thumb
        2n >~ e*theta + 12 with theta the phase swept over half a panel; an
        optional `spacing` bound tightens it further.
        """
        theta = 0.5 * rate * width
        n = int(math.ceil(0.5 * (math.e * theta + 12.0)))
        if spacing is not None:
            n = max(n, int(math.ceil(width / spacing)))
        return cls(s_lo, s_hi, width, max(n, 8))
