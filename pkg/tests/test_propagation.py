import json
import math
from dataclasses import replace

import numpy as np
import pytest

from cuspwave.eisenstein import scattering_phase_array
from cuspwave.propagation import (InconsistentNormWarning, cusp_mass, cusp_mass_fraction,
                                  domain_norm_sq, export_state_csv, export_state_json,
                                  field_norm_sq, l2_norm_sq, quantum_expectation,
                                  quasimode_defect, synthesize, synthesize_many,
                                  synthesize_points, zero_mode_tail)
from cuspwave.quadrature import SpectralGrid
from cuspwave.states import DEFAULT_PROFILE, BumpProfile, NyquistError, vt_coefficients
from cuspwave.surface import VOLUME, Constant, HeightCutoff, TruncatedDomain

R, T = 20.0, 3.0


@pytest.fixture(scope="module")
def coeffs():
    return vt_coefficients(R, T, y_max=20.0)


@pytest.fixture(scope="module")
def domain():
    return TruncatedDomain(20.0, breaks=(5.0, 10.0))


@pytest.fixture(scope="module")
def state(coeffs, domain, cache_dir):
    return synthesize(coeffs, domain, cache_dir=cache_dir)


def target(z, r):
    y = z.imag
    return DEFAULT_PROFILE(y) * y ** (-1j * r)


def test_keystone_reconstruction_r20():
    c = vt_coefficients(R, 0.0)
    rng = np.random.default_rng(3)
    pts = [complex(rng.uniform(-0.5, 0.5), yy) for yy in np.linspace(1.9, 3.1, 8)]
    pts += [0.25 + 1.2j, -0.4 + 4.0j]          # off the support band: target 0
    got = synthesize_points(c, pts)
    want = np.array([target(z, R) for z in pts])
    assert np.max(np.abs(got - want)) <= 1e-3 * DEFAULT_PROFILE.max_value


def test_zero_coefficients_give_constant(coeffs):
    zero = replace(coeffs, amplitude=np.zeros_like(coeffs.amplitude))
    vals = synthesize_points(zero, [0.1 + 1.5j, -0.3 + 0.95j])
    assert np.allclose(vals, coeffs.constant_term / VOLUME, rtol=0, atol=1e-18)


def test_conjugate_field(coeffs):
    # conj E(z, 1/2+is) = E(z, 1/2-is) = phi(1/2-is) E(z, 1/2+is)
    s = coeffs.grid.nodes
    conj = replace(coeffs, amplitude=np.conj(coeffs.amplitude) * scattering_phase_array(-s),
                   constant_term=np.conj(coeffs.constant_term))
    pts = [0.1 + 2.4j, -0.2 + 1.1j, 0.45 + 0.95j]
    a = synthesize_points(coeffs, pts)
    b = synthesize_points(conj, pts)
    assert np.max(np.abs(b - np.conj(a))) <= 1e-10 * np.max(np.abs(a))


def test_linearity(coeffs, domain, cache_dir):
    other = vt_coefficients(R + 1.5, T, grid=coeffs.grid)
    both = replace(coeffs, amplitude=coeffs.amplitude + other.amplitude,
                   constant_term=coeffs.constant_term + other.constant_term)
    s1, s2, s12 = synthesize_many([coeffs, other, both], domain, cache_dir=cache_dir)
    x = domain.x_trapezoid()[0]
    up = s1.values_upper(x) + s2.values_upper(x)
    low = s1.values_lower() + s2.values_lower()
    scale = np.max(np.abs(s12.values_upper(x)))
    assert np.max(np.abs(s12.values_upper(x) - up)) <= 1e-10 * scale
    assert np.max(np.abs(s12.values_lower() - low)) <= 1e-10 * scale


def test_phase_covariance(coeffs, state, domain, cache_dir):
    turned = synthesize(coeffs.scaled(np.exp(0.7j)), domain, cache_dir=cache_dir)
    assert np.allclose(turned.density_upper(), state.density_upper(), rtol=1e-12, atol=0)
    g = HeightCutoff(5.0, 1.0)
    assert quantum_expectation(g, turned) == pytest.approx(quantum_expectation(g, state), rel=1e-12)
    assert cusp_mass_fraction(turned, 10.0) == pytest.approx(cusp_mass_fraction(state, 10.0),
                                                             rel=1e-12, abs=1e-15)


def test_norm_at_t0_and_homogeneity():
    c0 = vt_coefficients(R, 0.0)
    assert l2_norm_sq(c0) == pytest.approx(DEFAULT_PROFILE.norm_sq(), rel=1e-6)
    doubled = vt_coefficients(R, 0.0, profile=BumpProfile(amplitude=2.0))
    assert l2_norm_sq(doubled) == pytest.approx(4 * l2_norm_sq(c0), rel=1e-12)


def test_expectation_of_one_at_t0(cache_dir):
    c0 = vt_coefficients(R, 0.0, y_max=6.0)
    st = synthesize(c0, TruncatedDomain(6.0), cache_dir=cache_dir)
    assert quantum_expectation(Constant(1.0), st) == pytest.approx(DEFAULT_PROFILE.norm_sq(), rel=1e-4)
    assert cusp_mass_fraction(st, 5.0) == pytest.approx(0.0, abs=1e-4)


def test_positivity_and_nesting(state):
    assert quantum_expectation(HeightCutoff(5.0, 1.0), state) >= 0
    fr = [cusp_mass_fraction(state, Y) for Y in (2.0, 5.0, 10.0, 15.0)]
    assert all(a >= b for a, b in zip(fr, fr[1:]))
    assert all(0.0 <= f <= 1.0 for f in fr)
    with pytest.raises(ValueError):
        cusp_mass_fraction(state, 25.0)


@pytest.mark.slow
@pytest.mark.parametrize("y_max", [20.0, 50.0])
def test_parseval_consistency(coeffs, y_max, cache_dir):
    # the zero-mode tail is the whole mass above y_max once 2 pi y_max > |s|
    st = synthesize(coeffs, TruncatedDomain(y_max), cache_dir=cache_dir)
    dom = domain_norm_sq(st)
    full = field_norm_sq(coeffs)
    assert dom <= full
    assert dom + zero_mode_tail(coeffs, y_max) == pytest.approx(full, rel=1e-6)


def test_inconsistent_norm_flagged(coeffs, state):
    shrunk = replace(state, coefficients=coeffs.scaled(0.5))
    with pytest.warns(InconsistentNormWarning):
        cusp_mass(shrunk, 10.0)


def test_nyquist_rejected():
    coarse = SpectralGrid(-90.0, 0.0, 3.0, 4)
    with pytest.raises(NyquistError):
        vt_coefficients(R, 40.0, grid=coarse)


def test_quasimode_defect_exact_eigenfunction():
    s = np.array([-30.0, -20.0, -10.0])
    h = np.array([0.0, 1.0, 0.0])
    assert quasimode_defect((s, np.ones(3), h), 20.0) == 0.0
    with pytest.raises(ValueError):
        quasimode_defect((s, np.ones(3), np.zeros(3)), 20.0)


def test_quasimode_defect_monotone_in_window():
    s = np.linspace(-60, 0, 6001)
    w = np.full(s.size, s[1] - s[0])
    narrow = np.exp(-((s + 30) / 1.0) ** 2)
    wide = np.exp(-((s + 30) / 2.0) ** 2)
    assert quasimode_defect((s, w, wide), 30.0) > quasimode_defect((s, w, narrow), 30.0)


def brute_amplitude(s, r, T):
    # independent route: trapezoid Mellin transform on a dense y grid
    y = np.linspace(2.0, 3.0, 2001)
    a = np.array([DEFAULT_PROFILE(v) for v in y])
    wy = np.full(y.size, y[1] - y[0])
    wy[[0, -1]] *= 0.5

    def hat(eta):
        base = wy * a * y ** -1.5
        return np.concatenate([np.exp(1j * np.outer(e, np.log(y))) @ base
                               for e in np.array_split(eta, max(1, eta.size // 256))])

    def u(sig):
        x = T * sig
        return np.where(np.abs(x) < 1e-12, 1.0, (np.exp(1j * x) - 1) / (1j * np.where(x == 0, 1, x)))

    c = hat(-s - r) + scattering_phase_array(-s) * hat(s - r)
    return 0.5 * (u(r + s) + u(r - s)) * c


def test_quasimode_defect_against_dense_quadrature():
    r = 80.0
    T = 4 * math.log(r)
    c = vt_coefficients(r, T)
    s = np.linspace(c.grid.s_lo, c.grid.s_hi, 10 * c.grid.nodes.size)
    h = brute_amplitude(s, r, T)
    w = np.full(s.size, s[1] - s[0])
    oracle = quasimode_defect((s, w, h), r)
    got = quasimode_defect(c)
    assert got == pytest.approx(oracle, rel=1e-3)
    assert got <= 10 * r / math.log(r)


def test_exports(state, tmp_path):
    export_state_json(state, tmp_path / "s.json")
    data = json.loads((tmp_path / "s.json").read_text())
    assert data["r"] == R and data["spectral_norm_sq"] > 0
    export_state_csv(state, tmp_path / "s.csv", nx=4)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "x,y,re,im"
    assert len(lines) == 1 + 4 * state.y_upper.size + state.domain.lower_nodes()[0].size
