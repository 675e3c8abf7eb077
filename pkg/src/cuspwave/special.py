"""Complex Gamma, Riemann zeta, completed xi and K_{ir}(x).

Everything here works in double precision and accepts numpy arrays.  Values
that would over- or underflow on the critical lines (Gamma at large imaginary
part, the functional-equation factor of zeta) are assembled in log space.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import bernoulli

from cuspwave import _kbessel


@dataclass(frozen=True)
class PrecisionPolicy:
    """Accuracy targets shared by the numerical kernels.

    rel_tol is the relative error target, abs_floor the magnitude below which
    absolute error governs, and max_terms the series / quadrature budget.
    """

    rel_tol: float = 1e-10
    abs_floor: float = 1e-14
    max_terms: int = 4000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_POLICY = PrecisionPolicy()


class PoleError(ValueError):
    """Argument sits on (or numerically at) a pole."""


class EnvelopeError(ValueError):
    """Argument outside the supported range."""


# Lanczos coefficients, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def log_sin(z):
    """log(sin z) without overflow for large |Im z| (branch unspecified)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    up = z.imag > 0
    # sin z = e^{-iz}(1 - e^{2iz}) (i/2) for Im z > 0; mirrored below
    zu = z[up]
    out[up] = -1j * zu + np.log1p(-np.exp(2j * zu)) + np.log(0.5j)
    zd = z[~up]
    out[~up] = 1j * zd + np.log1p(-np.exp(-2j * zd)) + np.log(-0.5j)
    return out


def _is_nonpositive_integer(z):
    return (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))


def loggamma(z):
    """log Gamma(z) for complex z (Lanczos, reflection for Re z < 1/2).

    Agrees with the principal branch only modulo 2*pi*i, which is all the
    callers need since they exponentiate.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(_is_nonpositive_integer(z)):
        raise PoleError("Gamma has a pole at non-positive integers")
    out = np.empty_like(z)
    left = z.real < 0.5
    if np.any(left):
        zl = z[left]
        out[left] = math.log(math.pi) - log_sin(math.pi * zl) - _lanczos_log(1.0 - zl)
    if np.any(~left):
        out[~left] = _lanczos_log(z[~left])
    return out[0] if scalar else out


def _lanczos_log(z):
    z = z - 1.0
    acc = np.full_like(z, _LANCZOS[0])
    for i in range(1, len(_LANCZOS)):
        acc = acc + _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(acc)


def gamma_complex(z):
    """Gamma(z) for complex z, |Im z| <= 500.

    Raises PoleError at non-positive integers and OverflowError when the
    result is not representable.
    """
    lg = loggamma(z)
    if np.any(np.real(lg) > 709.0):
        raise OverflowError("Gamma(z) overflows double precision")
    return np.exp(lg)


_EM_ORDER = 12
_B2K = np.array([float(bernoulli(2 * k)[-1]) for k in range(1, _EM_ORDER + 1)])
_FACT2K = np.array([math.factorial(2 * k) for k in range(1, _EM_ORDER + 1)], dtype=float)


def _zeta_em(s, policy=DEFAULT_POLICY):
    """Euler-Maclaurin zeta for Re s >= 1/2 (vectorised, chunked by N)."""
    s = np.asarray(s, dtype=complex)
    out = np.empty_like(s)
    nterm = np.maximum(20, np.ceil(2.0 * np.abs(s.imag))).astype(int)
    nterm = np.minimum(nterm, policy.max_terms)
    # group by N so each block is one (len, N) matrix
    for big_n in np.unique(nterm):
        idx = np.nonzero(nterm == big_n)[0]
        for start in range(0, len(idx), 256):
            sel = idx[start:start + 256]
            out[sel] = _zeta_em_block(s[sel], int(big_n))
    return out


def _zeta_em_block(s, big_n):
    n = np.arange(1, big_n, dtype=float)
    log_n = np.log(n)
    head = np.exp(-np.outer(s, log_n)).sum(axis=1)
    log_big = math.log(big_n)
    big_pow = np.exp(-s * log_big)  # N^{-s}
    total = head + big_n * big_pow / (s - 1.0) + 0.5 * big_pow
    # tail terms B_{2k}/(2k)! s(s+1)...(s+2k-2) N^{-s-2k+1}
    rising = s.copy()
    npow = big_pow / big_n
    for k in range(_EM_ORDER):
        total = total + _B2K[k] / _FACT2K[k] * rising * npow
        rising = rising * (s + 2 * k + 1) * (s + 2 * k + 2)
        npow = npow / (big_n * big_n)
    return total


def log_chi(s):
    """log of chi(s) = 2^s pi^{s-1} sin(pi s/2) Gamma(1-s), zeta(s)=chi(s)zeta(1-s)."""
    s = np.asarray(s, dtype=complex)
    return (s * math.log(2.0) + (s - 1.0) * math.log(math.pi)
            + log_sin(0.5 * math.pi * s) + loggamma(1.0 - s))


def zeta(s, policy=DEFAULT_POLICY):
    """Riemann zeta for -2 <= Re s <= 3, |Im s| <= 500, s != 1."""
    s = np.asarray(s, dtype=complex)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    if np.any(s == 1.0):
        raise PoleError("zeta has a pole at s = 1")
    out = np.empty_like(s)
    left = s.real < 0.5
    if np.any(~left):
        out[~left] = _zeta_em(s[~left], policy)
    if np.any(left):
        sl = s[left]
        # trivial zeros make log chi singular; return them exactly
        trivial = (sl.imag == 0) & (sl.real < 0) & (np.mod(sl.real, 2.0) == 0)
        vals = np.zeros_like(sl)
        origin = sl == 0.0   # the reflection would hit the pole at 1
        vals[origin] = -0.5
        keep = ~(trivial | origin)
        if np.any(keep):
            vals[keep] = np.exp(log_chi(sl[keep])) * _zeta_em(1.0 - sl[keep], policy)
        out[left] = vals
    return out[0] if scalar else out


def log_xi(s, policy=DEFAULT_POLICY):
    """log of xi(s) = pi^{-s/2} Gamma(s/2) zeta(s) (branch unspecified)."""
    s = np.asarray(s, dtype=complex)
    if np.any((np.abs(s) < 1e-8) | (np.abs(s - 1.0) < 1e-8)):
        raise PoleError("xi(s) has poles at s = 0 and s = 1")
    return -0.5 * s * math.log(math.pi) + loggamma(0.5 * s) + np.log(zeta(s, policy))


def xi_completed(s, policy=DEFAULT_POLICY):
    """xi(s) = pi^{-s/2} Gamma(s/2) zeta(s); poles at 0 and 1."""
    return np.exp(log_xi(s, policy))


def bessel_k_imag_order_scaled(r, x):
    """exp(pi*|r|/2) * K_{ir}(x): O(1) in the oscillatory regime x < |r|."""
    r = np.abs(np.asarray(r, dtype=float))
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.5) or np.any(r > 500.0):
        raise EnvelopeError("K_{ir}(x) supported for x >= 0.5 and |r| <= 500")
    rb, xb = np.broadcast_arrays(r, x)
    out = _kbessel.k_scaled_array(np.ascontiguousarray(rb.ravel()),
                                  np.ascontiguousarray(xb.ravel()))
    out = out.reshape(rb.shape)
    return out[()] if out.ndim == 0 else out


def bessel_k_imag_order(r, x):
    """K_{ir}(x) for real r, x (underflows to 0 once pi*|r|/2 passes ~745)."""
    scaled = bessel_k_imag_order_scaled(r, x)
    return scaled * np.exp(-0.5 * math.pi * np.abs(np.asarray(r, dtype=float)))
