"""Eisenstein series E(z, 1/2+is) for SL(2,Z), its scattering phase, and
the Eisenstein transform of x-independent states.

Normalisation: E(z, w) = sum over Gamma_inf\\Gamma of Im(gamma z)^w with
Gamma_inf containing -I, so that

    E(z, 1/2+is) = y^{1/2+is} + phi y^{1/2-is}
                   + (4 sqrt(y) / xi(1+2is)) sum_{n>=1} n^{is} sigma_{-2is}(n)
                     K_{is}(2 pi n y) cos(2 pi n x),
    phi = phi(1/2+is) = xi(2is) / xi(1+2is).

Nonzero modes are only exponentially small once 2 pi n y exceeds |s|, so
the truncation order grows like |s| / (2 pi y) rather than staying fixed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import hashlib
import math
from pathlib import Path

import numpy as np

from cuspwave import _modes
from cuspwave.special import DEFAULT_POLICY, PrecisionPolicy, loggamma, log_xi, zeta
from cuspwave.special import EnvelopeError, bessel_k_imag_order_scaled
from cuspwave.quadrature import SpectralGrid
from cuspwave.surface import VOLUME, UpperHalfPoint
from cuspwave.states import DEFAULT_PROFILE, constant_component

PHI_AT_HALF = -1.0  # limit of phi(1/2+is) as s -> 0
_KERNEL_VERSION = "kbessel-sd-2"


class TruncationError(ValueError):
    """Fourier truncation cannot reach the requested tail tolerance."""


# ------------------------------------------------------------ scattering

def scattering_phase_array(s):
    """phi(1/2+is) = xi(2is)/xi(1+2is) for an array of nonzero s."""
    s = np.asarray(s, dtype=float)
    return np.exp(log_xi(2j * s) - log_xi(1.0 + 2j * s))


def scattering_phase_expanded(s):
    """Same quantity from sqrt(pi) Gamma(is) zeta(2is) / (Gamma(1/2+is) zeta(1+2is))."""
    s = np.asarray(s, dtype=float)
    lg = loggamma(1j * s) - loggamma(0.5 + 1j * s)
    return math.sqrt(math.pi) * np.exp(lg) * zeta(2j * s) / zeta(1.0 + 2j * s)


@dataclass(frozen=True)
class ScatteringPhase:
    s: float
    value: complex


def scattering_phase(s: float) -> complex:
    if abs(s) <= 1e-6:
        raise ValueError("scattering_phase needs |s| > 1e-6 (limit phi(1/2) = -1)")
    return complex(scattering_phase_array(np.array([s]))[0])


def inverse_xi_scaled(s):
    """exp(-pi|s|/2) / xi(1+2is): O(1) partner of the scaled K-Bessel."""
    s = np.asarray(s, dtype=float)
    return np.exp(-0.5 * math.pi * np.abs(s) - log_xi(1.0 + 2j * s))


def divisor_power_sums(n_max, s):
    """sigma[n-1, k] = sum_{d | n} d^{-2 i s_k}."""
    s = np.asarray(s, dtype=float)
    out = np.zeros((n_max, s.size), dtype=complex)
    for d in range(1, n_max + 1):
        term = np.exp(-2j * s * math.log(d))
        out[d - 1::d] += term
    return out


def mode_coefficients(n_max, s, inv_xi=None):
    """A[n-1, k] with E's n-th mode = A * sqrt(y) * exp(pi|s|/2) K_{is}(2 pi n y) cos(2 pi n x)."""
    s = np.asarray(s, dtype=float)
    if inv_xi is None:
        inv_xi = inverse_xi_scaled(s)
    n = np.arange(1, n_max + 1)
    return 4.0 * np.exp(1j * np.outer(np.log(n), s)) * divisor_power_sums(n_max, s) * inv_xi[None, :]


# ------------------------------------------------------------ evaluator

@dataclass(frozen=True)
class EisensteinEvaluator:
    """Configured evaluator for E(z, 1/2+is).

    `cutoff` is the decay exponent beyond which a mode is dropped
    (exp(-cutoff) below abs_floor by default); `n_cap` bounds the number of
    modes any single evaluation may need.
    """

    policy: PrecisionPolicy = DEFAULT_POLICY
    n_cap: int = 400
    min_y: float = 0.1

    @property
    def cutoff(self):
        return -math.log(self.policy.abs_floor) + 2.0

    def n_trunc(self, y, s_abs):
        """Smallest N with every mode n > N below the tail tolerance at (y, |s|)."""
        n = 0
        while True:
            x = 2.0 * math.pi * (n + 1) * y
            if _modes.decay_exponent(float(s_abs), x) <= -self.cutoff:
                return n
            n += 1
            if n > self.n_cap:
                raise TruncationError(
                    f"need more than n_cap={self.n_cap} modes at y={y:.4g}, |s|={s_abs:.4g}")

    def __call__(self, z, s):
        return eisenstein_eval(z, s, self)


DEFAULT_EVALUATOR = EisensteinEvaluator()


def eisenstein_eval(z, s, ev: EisensteinEvaluator = DEFAULT_EVALUATOR):
    """E(z, 1/2+is) at one point for scalar or array s.

    The expansion converges for every y > 0, so z need not be reduced; only
    y >= ev.min_y is accepted to keep the truncation bounded.
    """
    if isinstance(z, UpperHalfPoint):
        x, y = z.x, z.y
    else:
        x, y = float(np.real(z)), float(np.imag(z))
    if y < ev.min_y:
        raise TruncationError(f"y={y} below evaluator minimum {ev.min_y}")
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(np.abs(s_arr) > 500):
        raise ValueError("|s| <= 500 required")
    phi = np.where(np.abs(s_arr) > 1e-12, 0j, PHI_AT_HALF)
    nz = np.abs(s_arr) > 1e-12
    phi[nz] = scattering_phase_array(s_arr[nz])
    ly = math.log(y)
    out = math.sqrt(y) * (np.exp(1j * s_arr * ly) + phi * np.exp(-1j * s_arr * ly))
    n_max = ev.n_trunc(y, float(np.max(np.abs(s_arr))))
    if n_max:
        a = mode_coefficients(n_max, s_arr)
        n = np.arange(1, n_max + 1)
        xs = 2.0 * math.pi * n * y
        kv = bessel_k_imag_order_scaled(np.abs(s_arr)[None, :], xs[:, None])
        out = out + math.sqrt(y) * np.sum(a * kv * np.cos(2.0 * math.pi * n * x)[:, None], axis=0)
    return out[0] if np.ndim(s) == 0 else out


# ------------------------------------------------------------ transforms

@dataclass(frozen=True)
class SpectralCoefficients:
    """Eisenstein transform of an x-independent state on the half-line s <= 0.

    The full-line coefficient obeys c(-s) = phi(1/2+is) c(s), so
    (1/4pi) int_R (...) ds equals (1/2pi) int_{s<=0} (...) ds for every
    quantity built from c E or |c|^2; only s <= 0 is stored.
    """

    constant_term: complex
    grid: SpectralGrid
    coef: np.ndarray
    nyquist_spacing: float = math.inf

    def scaled(self, factor):
        return SpectralCoefficients(self.constant_term * factor, self.grid,
                                    self.coef * factor, self.nyquist_spacing)


def transform_x_independent(profile, r, s):
    """a^(-s-r) + phi(1/2-is) a^(s-r)."""
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) <= 1e-6):
        raise ValueError("s = 0 is excluded (scattering phase precondition)")
    return profile.mellin(-s - r) + scattering_phase_array(-s) * profile.mellin(s - r)


def decompose(r, grid=None, profile=DEFAULT_PROFILE):
    """SpectralCoefficients of f_r = a(y) y^{-ir}."""
    from cuspwave.states import default_grid, nyquist_bound
    if grid is None:
        grid = default_grid(r, 0.0)
    c = transform_x_independent(profile, r, grid.nodes)
    ct = complex(constant_component(r, profile))
    return SpectralCoefficients(ct, grid, c, nyquist_bound(0.0, 12.0))


class UnderresolvedWarning(UserWarning):
    pass


def parseval_norm_sq(c: SpectralCoefficients):
    """|constant_term|^2 / vol(M) + (1/4pi) int_R |c|^2 ds."""
    if c.grid.mean_spacing > c.nyquist_spacing:
        import warnings
        warnings.warn("spectral grid coarser than its Nyquist bound", UnderresolvedWarning)
    return abs(c.constant_term) ** 2 / VOLUME + float(
        np.dot(c.grid.weights, np.abs(c.coef) ** 2)) / (2.0 * math.pi)


# ------------------------------------------------------------ mode table

@dataclass
class ModeTable:
    """exp(pi|s|/2) K_{is}(2 pi n y) for all live (n, y, s) on fixed grids.

    This is the dominant cost of synthesis.  Pairs (n, y) are stored with
    the prefix of the |s|-descending node list on which the mode is above
    the cutoff; everything else is exponentially small and skipped.
    """

    s: np.ndarray            # ascending, all <= 0
    y: np.ndarray
    cutoff: float
    pn: np.ndarray = field(repr=False)
    piy: np.ndarray = field(repr=False)
    plen: np.ndarray = field(repr=False)
    offsets: np.ndarray = field(repr=False)
    table: np.ndarray = field(repr=False)
    nmax: np.ndarray = field(repr=False)

    @staticmethod
    def key(s, y, cutoff):
        h = hashlib.sha256()
        h.update(_KERNEL_VERSION.encode())
        h.update(np.ascontiguousarray(s, dtype=float).tobytes())
        h.update(np.ascontiguousarray(y, dtype=float).tobytes())
        h.update(repr(float(cutoff)).encode())
        return h.hexdigest()[:24]

    @classmethod
    def build(cls, s, y, cutoff=34.0, n_cap=2000, cache_dir=None):
        s = np.asarray(s, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(np.diff(s) <= 0) or s[-1] > 0:
            raise ValueError("s nodes must be ascending and <= 0")
        if s.size and -s[0] > 500.0:
            raise EnvelopeError(f"|s| = {-s[0]:.4g} exceeds the K-Bessel envelope |s| <= 500")
        path = None
        if cache_dir is not None:
            path = Path(cache_dir) / f"modes-{cls.key(s, y, cutoff)}.npz"
            if path.exists():
                d = np.load(path)
                return cls(s, y, cutoff, d["pn"], d["piy"], d["plen"], d["offsets"],
                           d["table"], d["nmax"])
        abs_s = np.ascontiguousarray(-s)
        pn, piy, plen, nmax = _modes.pair_ranges(abs_s, y, cutoff, n_cap)
        if np.any(nmax >= n_cap):
            raise TruncationError("mode table needs more than n_cap modes")
        offsets = np.zeros(pn.size + 1, dtype=np.int64)
        np.cumsum(plen, out=offsets[1:])
        table = _modes.fill_table(abs_s, y, pn, piy, plen, offsets)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp.npz")
            np.savez(tmp, pn=pn, piy=piy, plen=plen, offsets=offsets, table=table, nmax=nmax)
            tmp.replace(path)
        return cls(s, y, cutoff, pn, piy, plen, offsets, table, nmax)

    @property
    def n_max(self):
        return int(self.nmax.max()) if self.nmax.size else 0

    def nonzero_modes(self, amplitudes, inv_xi=None):
        """B[m, n-1, iy] = sqrt(y) sum_k amplitudes[m, k] A_n(s_k) K-table.

        `amplitudes` already carries quadrature weights.  Node order in the
        table is |s|-descending, i.e. the ascending s order of self.s.
        """
        amplitudes = np.atleast_2d(amplitudes)
        nm = self.n_max
        out = np.zeros((amplitudes.shape[0], nm, self.y.size), dtype=complex)
        if nm == 0:
            return out
        a = mode_coefficients(nm, self.s, inv_xi)
        g = np.ascontiguousarray(a[None, :, :] * amplitudes[:, None, :])
        vals = _modes.contract(self.pn, self.plen, self.offsets, self.table, g)
        out[:, self.pn - 1, self.piy] = vals.T
        return out * np.sqrt(self.y)[None, None, :]
