"""numba kernels for the K-Bessel mode table and its contraction."""
import math

import numba as nb
import numpy as np

from cuspwave._kbessel import _GL_W, _GL_X, _TAIL, k_scaled

# the system TBB is often too old for numba; try OpenMP first
if nb.config.THREADING_LAYER == "default":
    nb.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]


@nb.njit(cache=True)
def decay_exponent(a, x):
    """log of the envelope of exp(pi a/2) K_{ia}(x) beyond the turning point
    (0 for x <= a)."""
    if x <= a:
        return 0.0
    if a == 0.0:
        return -x
    return -(math.sqrt(x * x - a * a) - a * math.acos(a / x))


@nb.njit(cache=True)
def pair_ranges(abs_s, y, cutoff, n_cap):
    """Enumerate (n, y-index) pairs with a live s-range.

    abs_s must be sorted in decreasing order; the live range for a pair is
    the prefix of nodes with decay_exponent > -cutoff.  Returns arrays
    (n, iy, length) and the largest n needed at each y.
    """
    cap = 0
    for iy in range(y.size):
        for n in range(1, n_cap + 1):
            x = 2.0 * math.pi * n * y[iy]
            if decay_exponent(abs_s[0], x) <= -cutoff:
                break
            cap += 1
    pn = np.empty(cap, dtype=np.int64)
    piy = np.empty(cap, dtype=np.int64)
    plen = np.empty(cap, dtype=np.int64)
    nmax = np.zeros(y.size, dtype=np.int64)
    j = 0
    for iy in range(y.size):
        for n in range(1, n_cap + 1):
            x = 2.0 * math.pi * n * y[iy]
            if decay_exponent(abs_s[0], x) <= -cutoff:
                break
            k = 0
            while k < abs_s.size and decay_exponent(abs_s[k], x) > -cutoff:
                k += 1
            pn[j] = n
            piy[j] = iy
            plen[j] = k
            nmax[iy] = n
            j += 1
    return pn, piy, plen, nmax


@nb.njit(cache=True, parallel=True)
def fill_table(abs_s, y, pn, piy, plen, offsets):
    out = np.empty(offsets[-1])
    for j in nb.prange(pn.size):
        x = 2.0 * math.pi * pn[j] * y[piy[j]]
        base = offsets[j]
        for k in range(plen[j]):
            out[base + k] = k_scaled(abs_s[k], x, _GL_X, _GL_W, _TAIL)
    return out


@nb.njit(cache=True)
def contract(pn, plen, offsets, table, g):
    """out[j, m] = sum_k table[j, k] * g[m, n_j - 1, k] over the live prefix."""
    nvec = g.shape[0]
    out = np.zeros((pn.size, nvec), dtype=np.complex128)
    for j in range(pn.size):
        base = offsets[j]
        n = pn[j] - 1
        for m in range(nvec):
            acc = 0j
            for k in range(plen[j]):
                acc += table[base + k] * g[m, n, k]
            out[j, m] = acc
    return out
