"""Classical side: the geodesic-flow average W_T f_r, horocycle averages and
the classical expectation with its closed-form leading term.

W_T f_r(y) = (1/T) int_0^T a(y e^t) e^{-t/2} y^{-ir} dt.  The phases
e^{itr} of the flow cancel the ones picked up along the way, which is why
everything classical is independent of r.
"""
from __future__ import annotations

from dataclasses import dataclass
import csv
import math

import numba as nb
import numpy as np
from scipy.interpolate import CubicSpline

from cuspwave.quadrature import composite_gl, gauss_legendre
from cuspwave.states import DEFAULT_PROFILE
from cuspwave.surface import Constant, normalized_area, reduce_array

_NT = 64


def wt_amplitude(y, T, profile=DEFAULT_PROFILE):
    """(1/T) int_0^T a(y e^t) e^{-t/2} dt, by Gauss-Legendre on the
    sub-interval where y e^t lies in the support."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.zeros(y.shape)
    t0 = np.maximum(0.0, np.log(profile.lo / y))
    t1 = np.minimum(T, np.log(profile.hi / y))
    live = t1 > t0
    x, w = np.polynomial.legendre.leggauss(_NT)
    for i in np.nonzero(live)[0]:
        half = 0.5 * (t1[i] - t0[i])
        t = t0[i] + half * (x + 1.0)
        out[i] = half * np.dot(w, profile(y[i] * np.exp(t)) * np.exp(-0.5 * t)) / T
    return out


def wt_amplitude_substituted(y, T, profile=DEFAULT_PROFILE):
    """The same amplitude as (1/T) int_y^{y e^T} a(u) sqrt(y/u) du/u."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.zeros(y.shape)
    lo = np.maximum(y, profile.lo)
    hi = np.minimum(y * math.exp(T), profile.hi)
    for i in np.nonzero(hi > lo)[0]:
        u, w = gauss_legendre(lo[i], hi[i], _NT)
        out[i] = np.dot(w, profile(u) * np.sqrt(y[i] / u) / u) / T
    return out


def wt_eval(y, r, T, profile=DEFAULT_PROFILE):
    """W_T f_r(y) = y^{-ir} * amplitude."""
    if T <= 0:
        raise ValueError("T must be positive")
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("y must be positive")
    amp = wt_amplitude(y, T, profile)
    out = amp * np.exp(-1j * r * np.log(np.atleast_1d(y)))
    return out[0] if y.ndim == 0 else out


@dataclass(frozen=True)
class LagrangianFamily:
    T: float
    lo: float = 2.0
    hi: float = 3.0

    @property
    def y_range(self):
        return (self.lo * math.exp(-self.T), self.hi)


# ------------------------------------------------------------ horocycles

class UndersampledError(ValueError):
    pass


def horocycle_average(g, y, n_samples=None):
    """int_0^1 g(reduce(x + iy)) dx by the periodic trapezoid rule."""
    if y < 1e-3:
        raise ValueError("horocycle_average needs y >= 1e-3")
    if n_samples is None:
        n_samples = max(16, int(math.ceil(10.0 / y)))
    if n_samples < 2.0 / y:
        raise UndersampledError(f"{n_samples} samples < 2/y = {2.0 / y:.1f}")
    x = (np.arange(n_samples) + 0.5) / n_samples
    xr, yr, _, _ = reduce_array(x, np.full(n_samples, float(y)))
    return float(np.mean(g(xr, yr)))


@nb.njit(cache=True)
def totients(n):
    phi = np.arange(n + 1, dtype=np.int64)
    for p in range(2, n + 1):
        if phi[p] == p:
            for k in range(p, n + 1, p):
                phi[k] -= phi[k] // p
    return phi


def _horoball_integral(g, H, n=24):
    """J(H) = int_R (g(H/(1+tau^2)) - g_low) dtau for height-only g."""
    H = np.atleast_1d(np.asarray(H, dtype=float))
    out = np.zeros(H.shape)
    live = H > 1.0
    if not live.any():
        return out
    Hl = H[live]
    taus = [np.zeros(Hl.size)]
    for b in sorted(getattr(g, "height_breaks", ()), reverse=True):
        if b > 1.0:
            taus.append(np.sqrt(np.maximum(Hl / b - 1.0, 0.0)))
    taus.append(np.sqrt(Hl - 1.0))
    x, w = np.polynomial.legendre.leggauss(n)
    acc = np.zeros(Hl.size)
    for a, b in zip(taus[:-1], taus[1:]):
        half = 0.5 * (b - a)
        t = 0.5 * (a + b)[:, None] + half[:, None] * x[None, :]
        vals = g.profile(Hl[:, None] / (1.0 + t * t)) - g.low_value
        acc += half * (vals @ w)
    out[live] = 2.0 * acc
    return out


def horocycle_average_exact(g, y):
    """Exact horocycle average for a height-only g that is constant (= low_value)
    on reduced heights <= 1, via the Ford horoballs met by the horocycle."""
    y = float(y)
    if y >= 1.0:
        return float(g.profile(y))
    cmax = int(math.floor(1.0 / math.sqrt(y)))
    phi = totients(cmax)[1:]
    c = np.arange(1, cmax + 1, dtype=float)
    return float(g.low_value + y * np.dot(phi, _horoball_integral(g, 1.0 / (c * c * y))))


@dataclass(frozen=True)
class HorocycleStats:
    y: float
    average: float
    reference: float
    deviation: float
    delta_fit: float


def horocycle_stats(g, ys, n_samples=None):
    """Sampled horocycle averages against the normalised area of g, with the
    decay exponent delta fitted from deviation ~ y^delta."""
    ref = normalized_area(g)
    ys = np.asarray(ys, dtype=float)
    avg = np.array([horocycle_average(g, y, n_samples) for y in ys])
    dev = np.abs(avg - ref)
    ok = dev > 0
    delta = float(np.polyfit(np.log(ys[ok]), np.log(dev[ok]), 1)[0]) if ok.sum() >= 2 else math.nan
    return [HorocycleStats(float(y), float(a), ref, float(d), delta) for y, a, d in zip(ys, avg, dev)]


def export_horocycle_csv(stats, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y", "average", "reference", "deviation", "delta_fit"])
        for s in stats:
            w.writerow([repr(s.y), repr(s.average), repr(s.reference), repr(s.deviation), repr(s.delta_fit)])


# ------------------------------------------------------------ expectation

@dataclass(frozen=True)
class ClassicalResult:
    value: float
    comparator: float     # (C_a^2 / T) * normalised int g
    route: str


def _lagrangian_weight(lam, T, profile):
    """P(e^lam)^2 with P(y) = int_{max(y,lo)}^{min(y e^T,hi)} a(u) u^{-3/2} du."""
    lam = np.asarray(lam, dtype=float)
    y = np.exp(lam)
    lo = np.maximum(y, profile.lo)
    hi = np.minimum(y * math.exp(T), profile.hi)
    x, w = np.polynomial.legendre.leggauss(_NT)
    out = np.zeros(lam.shape)
    live = hi > lo
    half = 0.5 * (hi[live] - lo[live])
    u = lo[live][:, None] + half[:, None] * (x[None, :] + 1.0)
    out[live] = (half * ((profile(u) * u ** -1.5) @ w)) ** 2
    return out


def _lambda_nodes(a, b, width=0.25, n=16):
    return composite_gl(a, b, width, n)


def classical_expectation(g, r, T, profile=DEFAULT_PROFILE, route="auto", rng_free_samples=None):
    """int_0^inf |W_T f_r(y)|^2 (int_0^1 g(x+iy) dx) dy/y^2 (unfolded strip).

    Height-only observables that are constant below reduced height 1 use the
    exact Ford-horoball sum; anything else samples horocycles down to
    y = 1e-3 and uses the normalised area of g below (equidistribution).
    r enters only through a unimodular phase and drops out.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    llo = math.log(profile.lo) - T
    lhi = math.log(profile.hi)
    c_a = profile.c_a
    comparator = c_a * c_a / T * normalized_area(g)
    exact_ok = getattr(g, "height_only", False) and hasattr(g, "low_value")
    if isinstance(g, Constant):
        lam, wl = _lambda_nodes(llo, lhi)
        val = g.value * float(np.dot(wl, _lagrangian_weight(lam, T, profile))) / T ** 2
        return ClassicalResult(val, comparator, "constant")
    if route == "sampling" or not exact_ok:
        return ClassicalResult(_classical_sampled(g, T, profile, llo, lhi), comparator, "sampling")
    return ClassicalResult(_classical_exact(g, T, profile, llo, lhi), comparator, "horoball")


def _classical_sampled(g, T, profile, llo, lhi):
    area = normalized_area(g) if getattr(g, "height_only", False) else None
    lam, wl = _lambda_nodes(llo, lhi)
    wgt = _lagrangian_weight(lam, T, profile)
    avg = np.empty(lam.size)
    floor = math.log(1e-3)
    for i, l in enumerate(lam):
        if l < floor:
            if area is None:
                raise ValueError("sampling route needs height-only g below y = 1e-3")
            avg[i] = area
        else:
            avg[i] = horocycle_average(g, math.exp(l))
    return float(np.dot(wl, wgt * avg)) / T ** 2


def _classical_exact(g, T, profile, llo, lhi):
    # heights y >= 1: the horocycle stays in the fundamental domain
    total = 0.0
    if lhi > 0:
        lam, wl = _lambda_nodes(max(0.0, llo), lhi)
        total += float(np.dot(wl, _lagrangian_weight(lam, T, profile) * g.profile(np.exp(lam))))
    if llo >= 0:
        return total / T ** 2
    lam, wl = _lambda_nodes(llo, min(0.0, lhi))
    wgt = _lagrangian_weight(lam, T, profile)
    total += g.low_value * float(np.dot(wl, wgt))
    # horoball part: sum_c phi(c) c^-2 R(2 log c),
    # R(sig) = int_{mu<0} w(mu - sig) e^mu J(e^-mu) dmu
    mu, wm = _lambda_nodes(llo, 0.0)
    kern = wm * np.exp(mu) * _horoball_integral(g, np.exp(-mu))
    sig_max = -llo
    sig = np.linspace(0.0, sig_max, max(400, int(200 * sig_max)))
    lam_f = np.linspace(llo - 1.0, lhi + 1.0, max(4000, int(400 * (lhi - llo + 2))))
    w_spline = CubicSpline(lam_f, _lagrangian_weight(lam_f, T, profile))
    rvals = np.empty(sig.size)
    for i, sv in enumerate(sig):
        arg = mu - sv
        wv = np.where((arg >= llo) & (arg <= 0.0), w_spline(np.clip(arg, llo, 0.0)), 0.0)
        rvals[i] = float(np.dot(kern, wv))
    r_spline = CubicSpline(sig, rvals)
    cmax = int(math.floor(math.exp(0.5 * sig_max)))
    phi = totients(cmax)
    acc = 0.0
    for start in range(1, cmax + 1, 1 << 20):
        c = np.arange(start, min(cmax, start + (1 << 20) - 1) + 1, dtype=float)
        acc += float(np.dot(phi[start:start + c.size] / (c * c), r_spline(2.0 * np.log(c))))
    total += acc
    return total / T ** 2


# ------------------------------------------------------------ injectivity

@dataclass(frozen=True)
class InjectivityReport:
    T: float
    pairs: int
    collisions: int
    translation_related: int
    min_separation: float


def lift_reduce(x, y):
    """Reduce points with upward unit direction; returns (x, y, angle) in S*M.

    Under z -> gamma z a tangent direction turns by -2 arg(cz + d).
    """
    xr, yr, c, d = reduce_array(x, y)
    ang = 0.5 * math.pi - 2.0 * np.angle(c * (np.asarray(x) + 1j * np.asarray(y)) + d)
    return xr, yr, np.mod(ang, 2.0 * math.pi)


def injectivity_check(T, sample_count, seed=0, profile=DEFAULT_PROFILE, tol=1e-9):
    """Flow random horocycle points (initial height h in the support) down
    for random times t in [0, T], landing at y = h e^{-t}, and count pairs
    with distinct initial heights whose images in S*M coincide."""
    rng = np.random.default_rng(seed)
    y1 = rng.uniform(profile.lo, profile.hi, sample_count)
    y2 = rng.uniform(profile.lo, profile.hi, sample_count)
    t1 = rng.uniform(0.0, T, sample_count)
    t2 = rng.uniform(0.0, T, sample_count)
    x1 = rng.uniform(-0.5, 0.5, sample_count)
    x2 = rng.uniform(-0.5, 0.5, sample_count)
    a = lift_reduce(x1, y1 * np.exp(-t1))
    b = lift_reduce(x2, y2 * np.exp(-t2))
    sep = np.abs(a[0] - b[0]) + np.abs(a[1] - b[1]) + np.abs(np.angle(np.exp(1j * (a[2] - b[2]))))
    same_height = np.abs(y1 - y2) <= tol * y1
    collide = (sep <= tol) & ~same_height
    return InjectivityReport(float(T), int(sample_count), int(collide.sum()),
                             int(((sep <= tol) & same_height).sum()), float(sep.min()))
