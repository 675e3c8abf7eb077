"""Steepest-descent quadrature for exp(pi a/2) K_{ia}(x).

K_{ia}(x) = Re int e^{-phi(t)} dt with phi(t) = x cosh t - i a t, taken from
the imaginary axis to +inf.  The path runs along steepest-descent arms of the
relevant saddle, parametrised by phi(t) - phi(t0) = tau^2, so the integrand
e^{-tau^2} dt/dtau never oscillates:

* a <= x: one saddle t0 = i arcsin(a/x); one arm to the right.
* a > x: saddle t0 = arccosh(a/x) + i pi/2; a down-right arm (A) and an
  up-left arm (B) whose far end is closed off at i*inf.

Small orders with x of the same size have strongly curved arms; there the
plain cosine integral is used instead (its cancellation costs at most e^{3 pi}).
Near a = x the saddles coalesce into a cubic one; the tau-panels are graded
geometrically towards the crossover scale so both regimes stay resolved.
"""
import math

import numba as nb
import numpy as np

_TAU_MAX = 6.5


def node_rule(n_per_panel=16, tail=(2.0, _TAU_MAX)):
    """Gauss-Legendre reference nodes and the regular tau panel breakpoints."""
    x, w = np.polynomial.legendre.leggauss(n_per_panel)
    return x, w, np.asarray(tail, dtype=float)


_GL_X, _GL_W, _TAIL = node_rule()
_SMALL_ORDER = 6.0
_DX, _DW = np.polynomial.legendre.leggauss(20)


@nb.njit(cache=True)
def _direct(a, x):
    """exp(pi a/2) int_0^T e^{-x cosh t} cos(a t) dt for small a (cancellation <= e^{3 pi})."""
    top = math.acosh(max(45.0 / x, 1.0)) + 0.5
    n_pan = 12
    h = top / n_pan
    acc = 0.0
    for p in range(n_pan):
        mid = (p + 0.5) * h
        for k in range(_DX.size):
            t = mid + 0.5 * h * _DX[k]
            acc += 0.5 * h * _DW[k] * math.exp(-x * math.cosh(t)) * math.cos(a * t)
    return math.exp(0.5 * math.pi * a) * acc


@nb.njit(cache=True)
def _sinh_minus_id(d):
    if abs(d) < 0.1:
        d2 = d * d
        return d * d2 * (1.0 / 6 + d2 * (1.0 / 120 + d2 * (1.0 / 5040 + d2 * (
            1.0 / 362880 + d2 / 39916800))))
    return np.sinh(d) - d


@nb.njit(cache=True)
def _hyp(d):
    """sinh d, cosh d - 1, sinh d - d without cancellation."""
    if abs(d) < 0.1:
        d2 = d * d
        cm = d2 * (0.5 + d2 * (1.0 / 24 + d2 * (1.0 / 720 + d2 * (1.0 / 40320 + d2 / 3628800))))
        smi = _sinh_minus_id(d)
        return d + smi, cm, smi
    e = np.exp(d)
    ei = 1.0 / e
    sh = 0.5 * (e - ei)
    return sh, 0.5 * (e + ei) - 1.0, sh - d


@nb.njit(cache=True)
def _breakpoints(tau_c, tail):
    # regular tail panels plus geometric grading below min(1, tau_c)
    if tau_c >= tail[0]:
        out = np.empty(tail.size + 1)
        out[0] = 0.0
        out[1:] = tail
        return out
    lo = max(tau_c * 0.25, 1e-9)
    nlev = 0
    b = tail[0]
    while b > lo:
        b *= 0.25
        nlev += 1
    out = np.empty(tail.size + nlev + 1)
    out[0] = 0.0
    b = tail[0]
    for j in range(nlev):
        b *= 0.25
        out[nlev - j] = b
    out[nlev + 1:] = tail
    return out


@nb.njit(cache=True)
def _arm(p2, p3, dir_q, dir_c, brk, graded, glx, glw, tol=1e-13):
    """int_0^inf e^{-tau^2} dt/dtau along one arm, t = t0 + delta."""
    ap2 = abs(p2)
    ap3 = abs(p3)
    acc = 0j
    delta = 0j
    slope = 0j
    tau_prev = 0.0
    first = True
    for p in range(brk.size - 1):
        lo = brk[p]
        hi = brk[p + 1]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        for k in range(glx.size):
            if lo == 0.0 and graded:
                # tau = hi v^3 removes the tau^{-1/3} endpoint behaviour of a cubic saddle
                v = 0.5 * (1.0 + glx[k])
                tau = hi * v * v * v
                wk = 1.5 * hi * v * v * glw[k]
            else:
                tau = mid + half * glx[k]
                wk = half * glw[k]
            tau2 = tau * tau
            if first:
                mq = tau * math.sqrt(2.0 / ap2) if ap2 > 0 else np.inf
                mc = (6.0 * tau2 / ap3) ** (1.0 / 3.0) if ap3 > 0 else np.inf
                if mq < mc:
                    delta = dir_q * mq
                else:
                    delta = dir_c * mc
                first = False
            else:
                delta = delta + (tau - tau_prev) * slope
            for _ in range(40):
                sh, cm, smi = _hyp(delta)
                f = p2 * cm + p3 * smi - tau2
                fp = p2 * sh + p3 * cm
                step = f / fp
                delta = delta - step
                if abs(step) <= tol * (1.0 + abs(delta)):
                    break
            sh, cm, smi = _hyp(delta)
            fp = p2 * sh + p3 * cm
            slope = 2.0 * tau / fp
            acc += wk * math.exp(-tau2) * slope
            tau_prev = tau
    return acc


@nb.njit(cache=True)
def k_scaled(a, x, glx, glw, tail):
    a = abs(a)
    if a <= _SMALL_ORDER and x <= 4.0 * _SMALL_ORDER:
        return _direct(a, x)
    p3 = 1j * a
    if a <= x:
        v0 = math.asin(a / x)
        p2 = complex(math.sqrt(max(x * x - a * a, 0.0)))
        # phi0 - pi a / 2 = sqrt(x^2 - a^2) - a arccos(a / x) >= 0
        expo = -(math.sqrt(max(x * x - a * a, 0.0)) - a * (0.5 * math.pi - v0))
        tau_c = math.sqrt(abs(p2) ** 3 / a ** 2) if a > 0 else np.inf
        brk = _breakpoints(tau_c, tail)
        j = _arm(p2, p3, 1.0 + 0j, complex(math.cos(math.pi / 6), -0.5), brk, tau_c < tail[0], glx, glw)
        return math.exp(expo) * j.real
    root = math.sqrt(a * a - x * x)
    u0 = math.acosh(a / x)
    c = root - a * u0
    p2 = 1j * root
    tau_c = math.sqrt(root ** 3 / a ** 2)
    brk = _breakpoints(tau_c, tail)
    s2 = math.sqrt(0.5)
    ja = _arm(p2, p3, complex(s2, -s2), complex(math.cos(math.pi / 6), -0.5), brk, tau_c < tail[0], glx, glw)
    jb = _arm(p2, p3, complex(-s2, s2), 1j, brk, tau_c < tail[0], glx, glw)
    return ((complex(math.cos(c), -math.sin(c))) * (ja - jb)).real


@nb.njit(cache=True)
def k_scaled_array(a, x, glx=_GL_X, glw=_GL_W, tail=_TAIL):
    out = np.empty(a.size)
    for i in range(a.size):
        out[i] = k_scaled(a[i], x[i], glx, glw, tail)
    return out
