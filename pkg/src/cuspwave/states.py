"""Lagrangian states a(y) y^{-ir}, their Mellin data, the time-averaged
coefficients of V_T, and quasimode windows."""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from cuspwave.quadrature import SpectralGrid, gauss_legendre

_MELLIN_NODES = 400


@dataclass(frozen=True)
class BumpProfile:
    """a(y) = amplitude * exp(-1/((y-lo)(hi-y))) on (lo, hi), zero elsewhere."""

    lo: float = 2.0
    hi: float = 3.0
    amplitude: float = 1.0

    def __post_init__(self):
        if not (0 < self.lo < self.hi):
            raise ValueError("need 0 < lo < hi")
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape)
        inside = (y > self.lo) & (y < self.hi)
        yi = y[inside]
        out[inside] = self.amplitude * np.exp(-1.0 / ((yi - self.lo) * (self.hi - yi)))
        return out[()] if out.ndim == 0 else out

    @property
    def max_value(self):
        half = 0.5 * (self.hi - self.lo)
        return self.amplitude * math.exp(-1.0 / (half * half))

    def _log_nodes(self):
        u, w = gauss_legendre(math.log(self.lo), math.log(self.hi), _MELLIN_NODES)
        return u, w, self(np.exp(u))

    def mellin(self, eta, shift=-0.5):
        """int a(y) y^{shift + i eta} dy / y (default: the state's Mellin data)."""
        eta = np.asarray(eta, dtype=float)
        u, w, av = self._log_nodes()
        base = w * av * np.exp(shift * u)
        flat = eta.ravel()
        out = np.empty(flat.size, dtype=complex)
        for start in range(0, flat.size, 2048):
            chunk = flat[start:start + 2048]
            out[start:start + 2048] = np.exp(1j * np.outer(chunk, u)) @ base
        out = out.reshape(eta.shape)
        return out[()] if out.ndim == 0 else out

    @property
    def c_a(self):
        """C_a = int a(u) u^{-3/2} du = mellin(0)."""
        return float(self.mellin(0.0).real)

    def norm_sq(self):
        """||a(y) y^{-ir}||^2 = int a^2 y^{-2} dy."""
        u, w, av = self._log_nodes()
        return float(np.dot(w, av * av * np.exp(-u)))


DEFAULT_PROFILE = BumpProfile()


def bump_eval(y, profile=DEFAULT_PROFILE):
    return profile(y)


def mellin_hat_a(eta, profile=DEFAULT_PROFILE):
    """a^(eta) = int_0^inf a(y) y^{-1/2 + i eta} dy / y."""
    return profile.mellin(eta)


def constant_component(r, profile=DEFAULT_PROFILE):
    """f^_r(0) = int a(y) y^{-ir-2} dy."""
    return profile.mellin(-np.asarray(r, dtype=float), shift=-1.0)


def u_T(sigma, T):
    """u_T(sigma) = (e^{i T sigma} - 1) / (i T sigma), u_T(0) = 1."""
    x = T * np.asarray(sigma, dtype=float)
    out = np.empty(x.shape, dtype=complex)
    small = np.abs(x) < 0.5
    xs = 1j * x[small]
    # sum_k (i x)^k / (k+1)!
    acc = np.zeros(xs.shape, dtype=complex)
    term = np.ones(xs.shape, dtype=complex)
    for k in range(1, 24):
        acc += term
        term = term * xs / (k + 1)
    out[small] = acc
    xb = x[~small]
    out[~small] = (np.exp(1j * xb) - 1.0) / (1j * xb)
    return out[()] if out.ndim == 0 else out


class NyquistError(ValueError):
    """Spectral grid too coarse for the oscillations it must resolve."""


def nyquist_bound(T, y_max):
    """Largest admissible mean node spacing: min(2pi/T, 2pi/log y_max) / 8."""
    bounds = [2.0 * math.pi / math.log(y_max)] if y_max > 1 else []
    if T > 0:
        bounds.append(2.0 * math.pi / T)
    return min(bounds) / 8.0 if bounds else math.inf


def default_grid(r, T, y_max=12.0, window=None, rate_extra=30.0):
    """Half-line grid s in [-(r + W), min(0, -r + W)] for one state.

    W defaults to 150 at T = 0 (where the bump's Mellin tail matters) and
    to 70 once the u_T factor damps it.
    """
    if window is None:
        window = 150.0 if T == 0 else 70.0
    hi = min(0.0, -r + window)
    return SpectralGrid.for_rate(-(r + window), hi, rate_extra + T,
                                 spacing=nyquist_bound(T, y_max))


@dataclass(frozen=True)
class WavePacketCoefficients:
    """Spectral data of V_T f_r on the half-line s <= 0.

    `dominant` and `suppressed` hold u_T(s+r) a^(-s-r) and
    u_T(s+r) phi(1/2-is) a^(s-r) on the grid.  `amplitude` is the
    coefficient the synthesis actually uses: the literal spectral integral
    over the whole line, folded onto s <= 0 with the symmetry of E, gives
    (1/2pi) int_{s<=0} amplitude(s) E(z, 1/2+is) ds with
    amplitude = (u_T(r+s) + u_T(r-s))/2 * c(s).
    """

    r: float
    T: float
    grid: SpectralGrid
    transform: np.ndarray       # c(s) = a^(-s-r) + phi(1/2-is) a^(s-r)
    dominant: np.ndarray
    suppressed: np.ndarray
    amplitude: np.ndarray
    weight_plus: np.ndarray     # u_T(r+s)
    weight_minus: np.ndarray    # u_T(r-s)
    constant_term: complex
    suppressed_sup: float

    @property
    def s(self):
        return self.grid.nodes

    def scaled(self, factor):
        """Coefficients of factor * V_T f_r (factor may be complex)."""
        return WavePacketCoefficients(
            self.r, self.T, self.grid, self.transform * factor, self.dominant * factor,
            self.suppressed * factor, self.amplitude * factor, self.weight_plus,
            self.weight_minus, self.constant_term * factor, self.suppressed_sup * abs(factor))


def constant_multiplier(r, T):
    """Time average of e^{it(sqrt(-Delta-1/4)+r)} on constants (eigenvalue 0)."""
    if T == 0:
        return 1.0 + 0j
    z = T * (1j * r - 0.5)
    return complex((np.exp(z) - 1.0) / z)


def vt_coefficients(r, T, grid=None, profile=DEFAULT_PROFILE, y_max=12.0):
    """Coefficients of V_T f_r on a half-line grid (see WavePacketCoefficients)."""
    from cuspwave.eisenstein import scattering_phase_array

    if T < 0:
        raise ValueError("T must be nonnegative")
    if grid is None:
        grid = default_grid(r, T, y_max)
    if grid.s_hi > 0:
        raise ValueError("grid must lie on the half-line s <= 0")
    bound = nyquist_bound(T, y_max)
    if grid.mean_spacing > bound:
        raise NyquistError(f"mean spacing {grid.mean_spacing:.4g} exceeds Nyquist bound {bound:.4g}")
    s = grid.nodes
    phi_minus = scattering_phase_array(-s)
    a_dom = profile.mellin(-s - r)
    a_sup = phi_minus * profile.mellin(s - r)
    up = u_T(s + r, T)
    um = u_T(r - s, T)
    c = a_dom + a_sup
    ct = complex(constant_component(r, profile)) * constant_multiplier(r, T)
    return WavePacketCoefficients(
        float(r), float(T), grid, c, up * a_dom, up * a_sup, 0.5 * (up + um) * c,
        up, um, ct, suppressed_branch_sup(r, T, profile))


def suppressed_branch_sup(r, T, profile=DEFAULT_PROFILE, window=150.0, n=6001):
    """sup over the whole line of |u_T(s+r) phi(1/2-is) a^(s-r)| (= |u_T(s+r) a^(s-r)|)."""
    s = np.linspace(r - window, r + window, n)
    s = s[np.abs(s) > 1e-6]
    return float(np.max(np.abs(u_T(s + r, T) * profile.mellin(s - r))))


# ---------------------------------------------------------------- windows

@dataclass(frozen=True)
class QuasimodeWindow:
    """Gaussian window exp(-(r-r_j)^2/(2 eps^2)) cut at |r-r_j| = cut*eps,
    normalised to unit integral.  Transform convention:
    h^(t) = int h(r) e^{-irt} dr, so h^(0) = 1."""

    center: float
    width: float
    cut: float = 6.0
    n_nodes: int = 160

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("window width must be positive")

    @classmethod
    def default(cls, r_j):
        return cls(r_j, 1.0 / math.log(r_j))

    def _raw(self, r):
        d = (np.asarray(r, dtype=float) - self.center) / self.width
        return np.where(np.abs(d) <= self.cut, np.exp(-0.5 * d * d), 0.0)

    def nodes(self):
        """Gauss-Legendre nodes/weights covering the support."""
        half = self.cut * self.width
        return gauss_legendre(self.center - half, self.center + half, self.n_nodes)

    @property
    def _norm(self):
        x, w = self.nodes()
        return float(np.dot(w, self._raw(x)))

    def __call__(self, r):
        return self._raw(r) / self._norm

    def moment_abs(self):
        """int h(r) |r - r_j| dr (split at the kink)."""
        half = self.cut * self.width
        total = 0.0
        for lo, hi in ((self.center - half, self.center), (self.center, self.center + half)):
            x, w = gauss_legendre(lo, hi, self.n_nodes // 2)
            total += float(np.dot(w, self(x) * np.abs(x - self.center)))
        return total


def quasimode_window_eval(w: QuasimodeWindow, r):
    return w(r)


def window_ft(w: QuasimodeWindow, t):
    """h^(t) = int h(r) e^{-irt} dr."""
    t = np.asarray(t, dtype=float)
    x, wt = w.nodes()
    vals = wt * w(x)
    out = np.exp(-1j * np.outer(t.ravel(), x)) @ vals
    out = out.reshape(t.shape)
    return out[()] if out.ndim == 0 else out
