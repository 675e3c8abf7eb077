"""Quantum side: synthesis of V_T f_r on the surface and its expectations.

The field is stored through its x-Fourier data at the quadrature heights,

    F(x + iy) = Z(y) + sum_{n>=1} B_n(y) cos(2 pi n x),

so on the upper part of the domain (y >= 1, full period in x) the x-integral
of |F|^2 is |Z|^2 + (1/2) sum |B_n|^2 and only the region below y = 1 needs
pointwise values.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import csv
import json
import math
import warnings

import numpy as np

from cuspwave.eisenstein import (DEFAULT_EVALUATOR, ModeTable, eisenstein_eval,
                                 inverse_xi_scaled, scattering_phase_array)
from cuspwave.states import WavePacketCoefficients
from cuspwave.surface import VOLUME, TruncatedDomain


class InconsistentNormWarning(UserWarning):
    """Domain integral exceeds the spectral norm beyond tolerance."""


@dataclass
class SynthesizedState:
    coefficients: WavePacketCoefficients
    domain: TruncatedDomain
    constant_term: complex
    y_upper: np.ndarray
    w_upper: np.ndarray
    z_upper: np.ndarray
    b_upper: np.ndarray = field(repr=False)      # (n_max, ny_upper)
    y_lower: np.ndarray = field(repr=False)
    z_lower: np.ndarray = field(repr=False)
    b_lower: np.ndarray = field(repr=False)      # (n_max, ny_lower)

    def density_upper(self):
        """int_{-1/2}^{1/2} |F(x+iy)|^2 dx at the upper heights."""
        return np.abs(self.z_upper) ** 2 + 0.5 * np.sum(np.abs(self.b_upper) ** 2, axis=0)

    def _fourier(self, z, b, y_index, x):
        n = np.arange(1, b.shape[0] + 1)
        cos = np.cos(2.0 * math.pi * np.outer(x, n))
        return z[y_index] + np.einsum("pn,np->p", cos, b[:, y_index])

    def values_lower(self):
        """F at the lower-region quadrature nodes (domain.lower_nodes order)."""
        xl, yl, _ = self.domain.lower_nodes()
        idx = np.searchsorted(-self.y_lower, -yl)
        return self._fourier(self.z_lower, self.b_lower, idx, xl)

    def values_upper(self, x):
        """F on the tensor grid (upper heights) x (given x values)."""
        n = np.arange(1, self.b_upper.shape[0] + 1)
        cos = np.cos(2.0 * math.pi * np.outer(n, x))
        return self.z_upper[:, None] + self.b_upper.T @ cos


def _spectral_weights(c: WavePacketCoefficients):
    return c.grid.weights * c.amplitude / (2.0 * math.pi)


def _zero_mode(s, m, phi, y, constant):
    ly = np.log(y)
    e_plus = np.exp(1j * np.outer(ly, s))
    sy = np.sqrt(y)
    return constant + sy * (e_plus @ m + np.conj(e_plus) @ (phi * m))


def synthesize_amplitudes(s, m, dom: TruncatedDomain, ev=DEFAULT_EVALUATOR, cache_dir=None,
                          constants=None, coefficients=None, table=None):
    """Fields F_i = constants_i + sum_k m[i, k] E(z, 1/2 + i s_k) on the domain.

    `m` (rows = fields) already includes quadrature weights; s must be
    ascending and <= 0.  All fields share one mode table.
    """
    s = np.asarray(s, dtype=float)
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    if constants is None:
        constants = np.zeros(m.shape[0], dtype=complex)
    if coefficients is None:
        coefficients = [None] * m.shape[0]
    y_up, w_up = dom.upper_y()
    y_low = dom.lower_y()
    y_all = np.concatenate([y_up, y_low])
    if table is None:
        table = ModeTable.build(s, y_all, cutoff=ev.cutoff, cache_dir=cache_dir)
    b = table.nonzero_modes(m, inverse_xi_scaled(s))
    phi = np.where(np.abs(s) > 1e-12, 0j, -1.0)
    nz = np.abs(s) > 1e-12
    phi[nz] = scattering_phase_array(s[nz])
    nu = y_up.size
    out = []
    for i in range(m.shape[0]):
        z = _zero_mode(s, m[i], phi, y_all, constants[i])
        out.append(SynthesizedState(coefficients[i], dom, constants[i], y_up, w_up, z[:nu],
                                    b[i][:, :nu], y_low, z[nu:], b[i][:, nu:]))
    return out


def synthesize_many(coeffs, dom: TruncatedDomain, ev=DEFAULT_EVALUATOR, cache_dir=None,
                    table=None):
    """Synthesize several coefficient sets sharing one spectral grid."""
    coeffs = list(coeffs)
    if not coeffs:
        return []
    grid = coeffs[0].grid
    for c in coeffs[1:]:
        if c.grid != grid:
            raise ValueError("all coefficient sets must share one spectral grid")
    m = np.stack([_spectral_weights(c) for c in coeffs])
    consts = np.array([c.constant_term / VOLUME for c in coeffs])
    states = synthesize_amplitudes(grid.nodes, m, dom, ev, cache_dir, consts, coeffs, table)
    for st, c in zip(states, coeffs):
        st.constant_term = c.constant_term
    return states


def synthesize(c: WavePacketCoefficients, dom: TruncatedDomain, ev=DEFAULT_EVALUATOR,
               cache_dir=None):
    """V_T f_r on the truncated domain from its spectral coefficients."""
    return synthesize_many([c], dom, ev, cache_dir)[0]


def synthesize_points(c: WavePacketCoefficients, points, ev=DEFAULT_EVALUATOR):
    """Pointwise synthesis constant/vol + (1/2pi) int_{s<=0} amplitude E ds."""
    m = _spectral_weights(c)
    out = []
    for z in points:
        e = eisenstein_eval(z, c.grid.nodes, ev)
        out.append(c.constant_term / VOLUME + np.dot(m, e))
    return np.array(out)


# ------------------------------------------------------------- norms

def l2_norm_sq(c: WavePacketCoefficients):
    """Spectral-side norm |ct|^2/vol + (1/4pi) int_R |u_T(s+r) c(s)|^2 ds.

    On s <= 0 the full-line integrand pairs u_T(r+s) and u_T(r-s) against
    the same |c(s)|^2.
    """
    dens = (np.abs(c.weight_plus) ** 2 + np.abs(c.weight_minus) ** 2) * np.abs(c.transform) ** 2
    return abs(c.constant_term) ** 2 / VOLUME + float(np.dot(c.grid.weights, dens)) / (4.0 * math.pi)


def field_norm_sq(c: WavePacketCoefficients):
    """L^2(M) norm of the synthesized field: |ct|^2/vol + (1/2pi) int_{s<=0} |amplitude|^2."""
    return abs(c.constant_term) ** 2 / VOLUME + float(
        np.dot(c.grid.weights, np.abs(c.amplitude) ** 2)) / (2.0 * math.pi)


def quantum_expectation(g, st: SynthesizedState):
    """int over the truncated domain of g |V_T f_r|^2 dmu."""
    dom = st.domain
    if getattr(g, "height_only", False):
        upper = float(np.dot(st.w_upper, g.profile(st.y_upper) * st.density_upper()))
    else:
        x, wx = dom.x_trapezoid()
        vals = np.abs(st.values_upper(x)) ** 2 * g(x[None, :], st.y_upper[:, None])
        upper = float(np.dot(st.w_upper, vals @ wx))
    xl, yl, wl = dom.lower_nodes()
    lower = float(np.dot(wl, g(xl, yl) * np.abs(st.values_lower()) ** 2))
    return upper + lower


def domain_norm_sq(st: SynthesizedState):
    """int over the truncated domain of |V_T f_r|^2."""
    xl, yl, wl = st.domain.lower_nodes()
    lower = float(np.dot(wl, np.abs(st.values_lower()) ** 2))
    return float(np.dot(st.w_upper, st.density_upper())) + lower


def mass_below(st: SynthesizedState, Y):
    """Domain mass in {y <= Y}; exact quadrature when Y is a domain break."""
    xl, yl, wl = st.domain.lower_nodes()
    lower = float(np.dot(wl, np.abs(st.values_lower()) ** 2))
    sel = st.y_upper <= Y
    return lower + float(np.dot(st.w_upper[sel], st.density_upper()[sel]))


@dataclass(frozen=True)
class CuspMass:
    fraction: float
    above_in_domain: float
    discrepancy: float   # spectral norm minus domain norm (mass above y_max)
    norm_sq: float


def cusp_mass(st: SynthesizedState, Y, rtol=1e-6):
    if not Y < st.domain.y_max:
        raise ValueError("Y must lie below y_max")
    norm = field_norm_sq(st.coefficients)
    dom_total = domain_norm_sq(st)
    below = mass_below(st, Y)
    disc = norm - dom_total
    if disc < -rtol * norm:
        warnings.warn(f"domain mass exceeds spectral norm by {-disc:.3g}", InconsistentNormWarning)
    frac = (dom_total - below + disc) / norm
    return CuspMass(min(1.0, max(0.0, frac)), dom_total - below, disc, norm)


def cusp_mass_fraction(st: SynthesizedState, Y):
    """Share of ||V_T f_r||^2 above height Y (mass beyond y_max included)."""
    return cusp_mass(st, Y).fraction


def zero_mode_tail(c: WavePacketCoefficients, y_from, decades=None, density=40.0):
    """int_{y_from}^inf |Z(y)|^2 dy/y^2 from the zero mode alone.

    Nonzero modes are below exp(-2 pi y_from + |s|)-sized there, so this is
    the cusp mass above y_from once 2 pi y_from exceeds the spectral window.
    """
    from cuspwave.quadrature import composite_gl
    s = c.grid.nodes
    m = _spectral_weights(c)
    phi = scattering_phase_array(s)
    top = math.log(y_from) + (decades if decades is not None else c.T + 8.0)
    u, wu = composite_gl(math.log(y_from), top, 0.25, max(8, int(density * 0.25)))
    total = 0.0
    for start in range(0, u.size, 512):
        yy = np.exp(u[start:start + 512])
        z = _zero_mode(s, m, phi, yy, c.constant_term / VOLUME)
        total += float(np.dot(wu[start:start + 512] / yy, np.abs(z) ** 2))
    return total


def quasimode_defect(c, r=None):
    """||(Delta + 1/4 + r^2) psi|| / ||psi|| evaluated spectrally.

    Accepts WavePacketCoefficients or (s, weights, amplitude) arrays.
    """
    if isinstance(c, WavePacketCoefficients):
        s, w, h = c.grid.nodes, c.grid.weights, c.amplitude
        r = c.r if r is None else r
    else:
        s, w, h = c
    den = float(np.dot(w, np.abs(h) ** 2))
    if den <= 0:
        raise ValueError("zero-norm state")
    num = float(np.dot(w, np.abs((s * s - r * r) * h) ** 2))
    return math.sqrt(num / den)


# ------------------------------------------------------------- export

def export_state_csv(st: SynthesizedState, path, nx=None):
    """Rows (x, y, Re, Im) on the upper tensor grid and the lower nodes."""
    x = st.domain.x_trapezoid()[0] if nx is None else -0.5 + (np.arange(nx) + 0.5) / nx
    up = st.values_upper(x)
    xl, yl, _ = st.domain.lower_nodes()
    low = st.values_lower()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "re", "im"])
        for i, yy in enumerate(st.y_upper):
            for j, xx in enumerate(x):
                v = up[i, j]
                w.writerow([repr(float(xx)), repr(float(yy)), repr(float(v.real)), repr(float(v.imag))])
        for xx, yy, v in zip(xl, yl, low):
            w.writerow([repr(float(xx)), repr(float(yy)), repr(float(v.real)), repr(float(v.imag))])


def state_summary(st: SynthesizedState):
    c = st.coefficients
    return {
        "r": c.r, "T": c.T, "y_max": st.domain.y_max,
        "spectral_norm_sq": l2_norm_sq(c), "field_norm_sq": field_norm_sq(c),
        "domain_norm_sq": domain_norm_sq(st), "quasimode_defect": quasimode_defect(c),
        "suppressed_branch_sup": c.suppressed_sup,
    }


def export_state_json(st: SynthesizedState, path):
    with open(path, "w") as fh:
        json.dump(state_summary(st), fh, indent=2, sort_keys=True)
