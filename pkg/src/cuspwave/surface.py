"""Geometry of the modular surface SL(2,Z)\\H.

Points, fundamental-domain reduction, height observables and quadrature over
the truncated fundamental domain {|x| <= 1/2, |z| >= 1, y <= y_max}.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from cuspwave.quadrature import composite_gl, gauss_legendre

VOLUME = math.pi / 3.0
_Y_FLOOR = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class UpperHalfPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError("point must lie in the upper half-plane (y > 0)")

    @property
    def z(self):
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z):
        return cls(float(z.real), float(z.imag))


@dataclass(frozen=True)
class ModularGroupElement:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError("determinant must be 1")

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    def __matmul__(self, other):
        return ModularGroupElement(
            self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d)

    def act(self, z):
        z = complex(z)
        return (self.a * z + self.b) / (self.c * z + self.d)

    def is_parabolic_translation(self):
        """True for +-(1 n; 0 1), the stabiliser of the cusp."""
        return self.c == 0 and abs(self.a) == 1


_S = ModularGroupElement(0, -1, 1, 0)


def _translation(n):
    return ModularGroupElement(1, n, 0, 1)


_TIE = 1e-12


def reduce(z: UpperHalfPoint, max_iter=10000):
    """Map z into the closed standard fundamental domain.

    Returns (w, gamma) with gamma.act(z) == w.  Boundary ties go to
    x = -1/2 on the vertical sides and to x <= 0 on the unit arc.
    """
    w = z.z
    g = ModularGroupElement.identity()
    for _ in range(max_iter):
        n = -math.floor(w.real + 0.5)
        if n:
            w = w + n
            g = _translation(n) @ g
        if abs(w) < 1.0 - 1e-15:
            w = -1.0 / w
            g = _S @ g
        else:
            break
    # recompute from the matrix so the returned pair is exactly consistent,
    # then settle boundary ties on the recomputed value
    w = g.act(z.z)
    if w.real >= 0.5 - _TIE:
        g = _translation(-1) @ g
        w = g.act(z.z)
    if w.real > _TIE and abs(abs(w) - 1.0) <= _TIE:
        g = _S @ g
        w = g.act(z.z)
    return UpperHalfPoint(w.real, w.imag), g


def reduce_array(x, y, max_iter=200):
    """Vectorised reduction; returns (x_red, y_red, c, d) with c, d the
    bottom row of the reducing matrix."""
    zr = np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float)
    zr = zr.copy()
    shape = zr.shape
    zr = zr.ravel()
    c = np.zeros(zr.shape, dtype=np.int64)
    d = np.ones(zr.shape, dtype=np.int64)
    a = np.ones(zr.shape, dtype=np.int64)
    b = np.zeros(zr.shape, dtype=np.int64)
    active = np.ones(zr.shape, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        n = -np.floor(zr[idx].real + 0.5)
        zr[idx] += n
        ni = n.astype(np.int64)
        a[idx] += ni * c[idx]
        b[idx] += ni * d[idx]
        inside = np.abs(zr[idx]) < 1.0 - 1e-15
        flip = idx[inside]
        zr[flip] = -1.0 / zr[flip]
        a[flip], c[flip] = -c[flip], a[flip].copy()
        b[flip], d[flip] = -d[flip], b[flip].copy()
        active[idx[~inside]] = False
    edge = zr.real >= 0.5
    zr[edge] -= 1.0
    a[edge] -= c[edge]
    b[edge] -= d[edge]
    return zr.real.reshape(shape), zr.imag.reshape(shape), c.reshape(shape), d.reshape(shape)


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    out = np.where(t >= 1.0, 1.0, 0.0)
    mid = (t > 0) & (t < 1)
    tm = t[mid]
    e0 = np.exp(-1.0 / tm)
    e1 = np.exp(-1.0 / (1.0 - tm))
    out[mid] = e0 / (e0 + e1)
    return out


@dataclass(frozen=True)
class HeightCutoff:
    """Observable equal to 1 for y <= Y and 0 for y >= Y + w (smooth between),
    evaluated at the reduced point."""

    Y: float
    w: float = 1.0
    height_only = True

    def profile(self, y):
        return 1.0 - smooth_step((np.asarray(y, dtype=float) - self.Y) / self.w)

    def __call__(self, x, y):
        return self.profile(y)

    @property
    def low_value(self):
        return 1.0

    @property
    def top(self):
        return self.Y + self.w

    @property
    def height_breaks(self):
        return (self.Y, self.Y + self.w)


@dataclass(frozen=True)
class Constant:
    value: float = 1.0
    height_only = True

    def profile(self, y):
        return np.full(np.shape(y), self.value, dtype=float)

    def __call__(self, x, y):
        return self.profile(y)

    @property
    def low_value(self):
        return self.value

    @property
    def top(self):
        return math.inf

    height_breaks = ()


@dataclass(frozen=True)
class CuspIndicator:
    """Indicator of {y > Y}; only used for the strip-measure check."""

    Y: float
    height_only = True

    def profile(self, y):
        return (np.asarray(y, dtype=float) > self.Y).astype(float)

    def __call__(self, x, y):
        return self.profile(y)

    @property
    def low_value(self):
        return 0.0

    @property
    def height_breaks(self):
        return (self.Y,)


@dataclass(frozen=True)
class FunctionObservable:
    """Wrap an arbitrary vectorised g(x, y) on reduced points."""

    func: object
    height_only = False

    def __call__(self, x, y):
        return np.asarray(self.func(x, y), dtype=float)


def parse_observable(spec: str):
    """'height_cutoff(Y, w)' or 'constant(c)' -> observable."""
    spec = spec.strip()
    name, _, rest = spec.partition("(")
    args = [float(v) for v in rest.rstrip(")").split(",") if v.strip()] if rest else []
    name = name.strip()
    if name == "height_cutoff":
        return HeightCutoff(*args)
    if name == "constant":
        return Constant(*args)
    raise ValueError(f"unknown observable {spec!r}")


@dataclass(frozen=True)
class TruncatedDomain:
    """Fundamental domain cut at y_max with a fixed quadrature layout.

    Upper part (1 <= y <= y_max): Gauss-Legendre panels in log y with
    `y_density` nodes per unit of log y, and `nx` periodic trapezoid nodes
    in x.  Lower part (sqrt(3)/2 <= y <= 1): y = 1 - t^2 so the arc boundary
    x = sqrt(1 - y^2) becomes smooth, with `n_lower_y` x `n_lower_x`
    Gauss-Legendre nodes.
    """

    y_max: float
    y_density: float = 60.0
    nx: int = 64
    n_lower_y: int = 24
    n_lower_x: int = 48
    panel: float = 0.25
    breaks: tuple = ()

    def __post_init__(self):
        if not self.y_max > 1:
            raise ValueError("y_max must exceed 1")

    @property
    def grid_spec(self):
        return (self.y_max, self.y_density, self.nx, self.n_lower_y, self.n_lower_x,
                self.panel, tuple(self.breaks))

    def upper_y(self):
        """(y, w) with sum w f(y) ~ int_1^{y_max} f(y) dy / y^2.

        Heights listed in `breaks` are panel edges, so indicator functions
        of {y <= Y} integrate exactly for Y in breaks.
        """
        n = max(4, int(math.ceil(self.y_density * self.panel)))
        edges = sorted({0.0, math.log(self.y_max)}
                       | {math.log(b) for b in self.breaks if 1.0 < b < self.y_max})
        us, ws = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            u, wu = composite_gl(lo, hi, self.panel, n)
            us.append(u)
            ws.append(wu)
        u = np.concatenate(us)
        y = np.exp(u)
        return y, np.concatenate(ws) / y

    def lower_nodes(self):
        """(x, y, w) on the region |x| in [sqrt(1-y^2), 1/2], y in [sqrt3/2, 1];
        both halves of the symmetric region are included via |x|."""
        t_top = math.sqrt(1.0 - _Y_FLOOR)
        t, wt = gauss_legendre(0.0, t_top, self.n_lower_y)
        y = 1.0 - t * t
        wy = 2.0 * t * wt
        xs, ys, ws = [], [], []
        for yi, wyi in zip(y, wy):
            x0 = math.sqrt(max(0.0, 1.0 - yi * yi))
            xg, wg = gauss_legendre(x0, 0.5, self.n_lower_x)
            xs.append(np.concatenate([xg, -xg]))
            ys.append(np.full(2 * xg.size, yi))
            ws.append(np.concatenate([wg, wg]) * wyi / (yi * yi))
        return np.concatenate(xs), np.concatenate(ys), np.concatenate(ws)

    def lower_y(self):
        """Distinct y nodes of the lower region."""
        t_top = math.sqrt(1.0 - _Y_FLOOR)
        t, _ = gauss_legendre(0.0, t_top, self.n_lower_y)
        return 1.0 - t * t

    def x_trapezoid(self):
        x = -0.5 + (np.arange(self.nx) + 0.5) / self.nx
        return x, np.full(self.nx, 1.0 / self.nx)


def surface_integral(g, dom: TruncatedDomain, normalization="raw"):
    """int g dmu over the truncated domain; mu = dx dy / y^2 ('raw') or
    (3/pi) dx dy / y^2 ('probability')."""
    yu, wu = dom.upper_y()
    if getattr(g, "height_only", False):
        upper = float(np.dot(wu, g.profile(yu)))
    else:
        x, wx = dom.x_trapezoid()
        vals = np.broadcast_to(g(x[None, :], yu[:, None]), (yu.size, x.size))
        upper = float(np.dot(wu, vals @ wx))
    xl, yl, wl = dom.lower_nodes()
    lower = float(np.dot(wl, np.broadcast_to(g(xl, yl), np.shape(xl))))
    total = upper + lower
    if normalization == "probability":
        return total / VOLUME
    if normalization != "raw":
        raise ValueError("normalization must be 'raw' or 'probability'")
    return total


def normalized_area(g, y_max=None):
    """(3/pi) int_M g dmu for a height-only observable, to high accuracy."""
    top = getattr(g, "top", math.inf)
    if y_max is None:
        y_max = top if math.isfinite(top) else 1e6
    dom = TruncatedDomain(max(y_max, 1.5), y_density=200.0, n_lower_y=40, n_lower_x=40,
                          breaks=tuple(getattr(g, "height_breaks", ())))
    val = surface_integral(g, dom, "probability")
    if isinstance(g, Constant):
        val += g.value / (VOLUME * y_max)
    return val
